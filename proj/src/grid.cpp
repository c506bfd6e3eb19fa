#include "jumpbsde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jumpbsde {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw std::invalid_argument("TimeGrid: need at least two points");
    if (std::abs(points_.front()) > kTimeEps)
        throw std::invalid_argument("TimeGrid: first point must be 0");
    points_.front() = 0.0;
    for (std::size_t k = 1; k < points_.size(); ++k) {
        if (points_[k] <= points_[k - 1] + kTimeEps)
            throw std::invalid_argument("TimeGrid: points must be strictly increasing");
    }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
    if (steps == 0 || horizon <= 0.0) throw std::invalid_argument("TimeGrid::uniform: bad shape");
    std::vector<double> pts(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k)
        pts[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
    pts.back() = horizon;
    return TimeGrid(std::move(pts));
}

std::size_t TimeGrid::floor_index(double t) const {
    if (t < -kTimeEps) throw std::out_of_range("TimeGrid::floor_index: negative time");
    auto it = std::upper_bound(points_.begin(), points_.end(), t + kTimeEps);
    if (it == points_.begin()) return 0;
    return static_cast<std::size_t>(std::distance(points_.begin(), it)) - 1;
}

std::optional<std::size_t> TimeGrid::index_of(double t) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), t - kTimeEps);
    if (it == points_.end() || std::abs(*it - t) > kTimeEps) return std::nullopt;
    return static_cast<std::size_t>(std::distance(points_.begin(), it));
}

TimeGrid TimeGrid::refined_with(std::vector<double> extra) const {
    std::vector<double> merged = points_;
    for (double t : extra) {
        if (t < -kTimeEps || t > horizon() + kTimeEps)
            throw std::invalid_argument("TimeGrid::refined_with: time outside [0, T]");
        auto it = std::lower_bound(merged.begin(), merged.end(), t - kTimeEps);
        if (it != merged.end() && std::abs(*it - t) <= kTimeEps) continue;
        merged.insert(it, t);
    }
    return TimeGrid(std::move(merged));
}

bool TimeGrid::same_points(const TimeGrid& other) const {
    if (points_.size() != other.points_.size()) return false;
    for (std::size_t k = 0; k < points_.size(); ++k)
        if (std::abs(points_[k] - other.points_[k]) > kTimeEps) return false;
    return true;
}

bool TimeGrid::refines(const TimeGrid& coarse) const {
    for (double t : coarse.points())
        if (!contains_time(t)) return false;
    return true;
}

}  // namespace jumpbsde
