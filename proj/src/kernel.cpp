#include "jumpbsde/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "jumpbsde/quadrature.hpp"

namespace jumpbsde {

MarkKernel MarkKernel::discrete(std::vector<double> marks, std::vector<double> masses) {
    if (marks.size() != masses.size())
        throw std::invalid_argument("MarkKernel::discrete: marks/masses size mismatch");
    MarkKernel k;
    for (std::size_t i = 0; i < marks.size(); ++i) {
        if (masses[i] < 0.0) throw std::invalid_argument("MarkKernel::discrete: negative mass");
        if (masses[i] == 0.0) continue;
        k.marks_.push_back(marks[i]);
        k.masses_.push_back(masses[i]);
        k.mass_ += masses[i];
    }
    return k;
}

MarkKernel MarkKernel::point(double mark, double mass) {
    return discrete({mark}, {mass});
}

MarkKernel MarkKernel::density(double total_mass, std::function<double(double)> unit_pdf,
                               double lo, double hi, std::function<double(double)> unit_quantile,
                               int quad_order) {
    if (total_mass < 0.0) throw std::invalid_argument("MarkKernel::density: negative mass");
    if (hi <= lo) throw std::invalid_argument("MarkKernel::density: empty support");
    MarkKernel k;
    k.mass_ = total_mass;
    k.density_ = std::move(unit_pdf);
    k.quantile_ = std::move(unit_quantile);
    k.lo_ = lo;
    k.hi_ = hi;
    k.quad_order_ = quad_order;
    return k;
}

double MarkKernel::integrate(const std::function<double(double)>& f) const {
    if (mass_ == 0.0) return 0.0;
    if (density_) {
        const auto& gl = GaussLegendre::order(quad_order_);
        return mass_ * gl.integrate([&](double e) { return f(e) * density_(e); }, lo_, hi_);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < marks_.size(); ++i) acc += masses_[i] * f(marks_[i]);
    return acc;
}

double MarkKernel::mean_of(const std::function<double(double)>& f) const {
    if (mass_ == 0.0) return 0.0;
    return integrate(f) / mass_;
}

double MarkKernel::sample(double u) const {
    if (mass_ == 0.0) throw std::logic_error("MarkKernel::sample: zero kernel");
    if (density_) {
        if (!quantile_) throw std::logic_error("MarkKernel::sample: density kernel lacks quantile");
        return quantile_(u);
    }
    // inverse cdf over the discrete atoms; u in (0, 1]
    double acc = 0.0;
    for (std::size_t i = 0; i < marks_.size(); ++i) {
        acc += masses_[i] / mass_;
        if (u <= acc) return marks_[i];
    }
    return marks_.back();
}

MarkKernel MarkKernel::scaled(double factor) const {
    if (factor < 0.0) throw std::invalid_argument("MarkKernel::scaled: negative factor");
    MarkKernel k = *this;
    k.mass_ *= factor;
    if (k.density_ == nullptr) {
        for (double& m : k.masses_) m *= factor;
    }
    if (k.mass_ == 0.0) return MarkKernel{};
    return k;
}

MarkKernel MarkKernel::truncated(double eps, double* dropped_mass) const {
    if (density_) throw std::logic_error("MarkKernel::truncated: discrete kernels only");
    MarkKernel k;
    double dropped = 0.0;
    for (std::size_t i = 0; i < marks_.size(); ++i) {
        if (std::abs(marks_[i]) < eps) {
            dropped += masses_[i];
            continue;
        }
        k.marks_.push_back(marks_[i]);
        k.masses_.push_back(masses_[i]);
        k.mass_ += masses_[i];
    }
    if (dropped_mass) *dropped_mass = dropped;
    return k;
}

}  // namespace jumpbsde
