#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace jumpbsde {

// Absolute tolerance for matching event times against grid points.
inline constexpr double kTimeEps = 1e-12;

// Strictly increasing times with points.front() == 0 and points.back() == T.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> points);
    static TimeGrid uniform(double horizon, std::size_t steps);

    std::size_t size() const { return points_.size(); }
    std::size_t intervals() const { return points_.size() - 1; }
    double operator[](std::size_t k) const { return points_[k]; }
    double horizon() const { return points_.back(); }
    const std::vector<double>& points() const { return points_; }

    // Largest k with points[k] <= t + kTimeEps; requires t >= -kTimeEps.
    std::size_t floor_index(double t) const;
    // Index of the grid point equal to t within kTimeEps, if any.
    std::optional<std::size_t> index_of(double t) const;
    bool contains_time(double t) const { return index_of(t).has_value(); }

    // Union of this grid and extra times; times within kTimeEps collapse
    // onto the existing point.
    TimeGrid refined_with(std::vector<double> extra) const;

    bool same_points(const TimeGrid& other) const;
    // True when every point of `coarse` appears in this grid.
    bool refines(const TimeGrid& coarse) const;

private:
    std::vector<double> points_;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

inline GridPtr make_uniform_grid(double horizon, std::size_t steps) {
    return std::make_shared<const TimeGrid>(TimeGrid::uniform(horizon, steps));
}

inline GridPtr make_grid(std::vector<double> points) {
    return std::make_shared<const TimeGrid>(TimeGrid(std::move(points)));
}

}  // namespace jumpbsde
