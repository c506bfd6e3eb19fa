#include "jumpbsde/path.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace jumpbsde {

CadlagPath::CadlagPath(GridPtr grid, std::vector<double> values, std::vector<Jump> jumps)
    : grid_(std::move(grid)), values_(std::move(values)), jumps_(std::move(jumps)) {
    if (!grid_) throw std::invalid_argument("CadlagPath: null grid");
    if (values_.size() != grid_->size())
        throw std::invalid_argument("CadlagPath: values/grid size mismatch");
    std::sort(jumps_.begin(), jumps_.end(),
              [](const Jump& a, const Jump& b) { return a.time < b.time; });
    double prev = -1.0;
    for (const Jump& j : jumps_) {
        if (j.size == 0.0) throw std::invalid_argument("CadlagPath: zero-size jump");
        if (!grid_->contains_time(j.time))
            throw std::invalid_argument("CadlagPath: jump time off the grid");
        if (j.time <= prev + kTimeEps)
            throw std::invalid_argument("CadlagPath: duplicate jump time");
        if (j.time <= kTimeEps) throw std::invalid_argument("CadlagPath: jump at time 0");
        prev = j.time;
    }
}

CadlagPath CadlagPath::constant(GridPtr grid, double level) {
    std::vector<double> values(grid->size(), level);
    return CadlagPath(std::move(grid), std::move(values), {});
}

double CadlagPath::left_limit(std::size_t k) const {
    return values_[k] - jump_size_at((*grid_)[k]);
}

double CadlagPath::value_at(double t) const { return values_[grid_->floor_index(t)]; }

double CadlagPath::left_limit_at(double t) const {
    auto k = grid_->index_of(t);
    if (!k) throw std::invalid_argument("CadlagPath::left_limit_at: time off the grid");
    return left_limit(*k);
}

double CadlagPath::pre_value_at(double t) const {
    auto k = grid_->index_of(t);
    return k ? left_limit(*k) : value_at(t);
}

double CadlagPath::jump_size_at(double t) const {
    auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t - kTimeEps,
                               [](const Jump& j, double s) { return j.time < s; });
    if (it != jumps_.end() && std::abs(it->time - t) <= kTimeEps) return it->size;
    return 0.0;
}

std::vector<double> CadlagPath::values_on(const TimeGrid& g) const {
    std::vector<double> out(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        auto idx = grid_->index_of(g[k]);
        if (!idx) throw std::invalid_argument("CadlagPath::values_on: point missing from grid");
        out[k] = values_[*idx];
    }
    return out;
}

void validate_ensemble(const PathEnsemble& ens) {
    if (!ens.base_grid) throw std::invalid_argument("ensemble: null base grid");
    if (!ens.seeds.empty()) {
        if (ens.seeds.size() != ens.paths.size())
            throw std::invalid_argument("ensemble: seeds/paths size mismatch");
        std::set<std::uint64_t> distinct(ens.seeds.begin(), ens.seeds.end());
        if (distinct.size() != ens.seeds.size())
            throw std::invalid_argument("ensemble: repeated seed");
    }
    for (const CadlagPath& p : ens.paths)
        if (!p.grid().refines(*ens.base_grid))
            throw std::invalid_argument("ensemble: path grid does not refine the base grid");
}

double discrete_bracket(const CadlagPath& x, const CadlagPath& y) {
    if (!x.grid().same_points(y.grid()))
        throw std::invalid_argument("discrete_bracket: paths live on different grids");
    double acc = 0.0;
    for (std::size_t k = 1; k < x.grid().size(); ++k)
        acc += (x.value(k) - x.value(k - 1)) * (y.value(k) - y.value(k - 1));
    return acc;
}

OrthogonalityReport orthogonality_test(const PathEnsemble& y, const PathEnsemble& n) {
    if (y.paths.size() != n.paths.size())
        throw std::invalid_argument("orthogonality_test: path count mismatch");
    const std::size_t m = y.paths.size();
    if (m < 30) throw std::invalid_argument("orthogonality_test: need at least 30 paths");
    std::vector<double> brackets(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto yv = y.paths[i].values_on(*y.base_grid);
        const auto nv = n.paths[i].values_on(*y.base_grid);
        double acc = 0.0;
        for (std::size_t k = 1; k < yv.size(); ++k)
            acc += (yv[k] - yv[k - 1]) * (nv[k] - nv[k - 1]);
        brackets[i] = acc;
    }
    double mean = 0.0;
    for (double b : brackets) mean += b;
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (double b : brackets) var += (b - mean) * (b - mean);
    var /= static_cast<double>(m - 1);
    OrthogonalityReport rep;
    rep.mean = mean;
    rep.std_error = std::sqrt(var / static_cast<double>(m));
    rep.pass = std::abs(mean) <= 3.0 * rep.std_error;
    return rep;
}

}  // namespace jumpbsde
