#pragma once

#include <cstdint>
#include <vector>

#include "jumpbsde/grid.hpp"

namespace jumpbsde {

struct Jump {
    double time = 0.0;
    double size = 0.0;  // nonzero by invariant
};

// Discretely observed cadlag path. values[k] holds X at grid point k (the
// right limit); jumps record (time, size) with every jump time on the grid
// and at most one jump per time. The left limit at a jump time s is
// value(s) - size(s); elsewhere the two coincide.
class CadlagPath {
public:
    CadlagPath(GridPtr grid, std::vector<double> values, std::vector<Jump> jumps);
    static CadlagPath constant(GridPtr grid, double level);

    const TimeGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<Jump>& jumps() const { return jumps_; }

    double initial() const { return values_.front(); }
    double terminal() const { return values_.back(); }
    double value(std::size_t k) const { return values_[k]; }
    double left_limit(std::size_t k) const;

    // Value at the largest grid point <= t (discrete observation convention).
    double value_at(double t) const;
    // Left limit at t; t must sit on the grid within kTimeEps.
    double left_limit_at(double t) const;
    // Left limit when t is a grid point, value_at(t) otherwise (paths are
    // flat between their grid points, so off-grid times cannot be jumps).
    double pre_value_at(double t) const;
    // 0 when t is not a jump time.
    double jump_size_at(double t) const;

    // Values sampled at the points of `g`; every point of g must lie on this
    // path's grid.
    std::vector<double> values_on(const TimeGrid& g) const;

private:
    GridPtr grid_;
    std::vector<double> values_;
    std::vector<Jump> jumps_;  // sorted by time
};

struct PathEnsemble {
    GridPtr base_grid;                  // slice grid shared by all paths
    std::vector<CadlagPath> paths;      // each path's grid refines base_grid
    std::vector<std::uint64_t> seeds;   // distinct, one per path
};

// Throws when a path's grid does not refine the base grid or seeds repeat.
void validate_ensemble(const PathEnsemble& ens);

// Sum of increment products over the shared grid. Throws on grid mismatch.
double discrete_bracket(const CadlagPath& x, const CadlagPath& y);

struct OrthogonalityReport {
    double mean = 0.0;
    double std_error = 0.0;
    bool pass = false;
};

// Per-path discrete brackets of y against n on the base grid; pass iff
// |mean| <= 3 std errors. Requires matching path counts and >= 30 paths.
OrthogonalityReport orthogonality_test(const PathEnsemble& y, const PathEnsemble& n);

}  // namespace jumpbsde
