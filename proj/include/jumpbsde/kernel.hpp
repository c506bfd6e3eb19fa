#pragma once

#include <functional>
#include <vector>

namespace jumpbsde {

// Finite measure on mark space R. Two representations: a discrete mixture
// sum_i masses[i] * delta_{marks[i]}, or total_mass times a probability
// density on [lo, hi] integrated by Gauss-Legendre quadrature. Sampling a
// density kernel requires its quantile function.
class MarkKernel {
public:
    MarkKernel() = default;  // zero measure

    static MarkKernel discrete(std::vector<double> marks, std::vector<double> masses);
    static MarkKernel point(double mark, double mass = 1.0);
    // unit_pdf integrates to 1 on [lo, hi]; unit_quantile inverts its cdf.
    static MarkKernel density(double total_mass, std::function<double(double)> unit_pdf,
                              double lo, double hi,
                              std::function<double(double)> unit_quantile,
                              int quad_order = 64);

    double mass() const { return mass_; }
    bool is_zero() const { return mass_ == 0.0; }

    // integral of f against the (unnormalized) measure
    double integrate(const std::function<double(double)>& f) const;
    // integral of f against the normalized measure; 0 for the zero kernel
    double mean_of(const std::function<double(double)>& f) const;
    // normalized draw from u in (0, 1]
    double sample(double u) const;

    bool is_discrete() const { return density_ == nullptr; }
    bool is_point_mass() const { return density_ == nullptr && marks_.size() == 1; }
    double point_mark() const { return marks_.front(); }
    const std::vector<double>& marks() const { return marks_; }
    const std::vector<double>& masses() const { return masses_; }

    // Discrete kernels only: drops atoms with |mark| < eps, reporting the
    // removed mass through dropped_mass when non-null.
    MarkKernel truncated(double eps, double* dropped_mass = nullptr) const;

    // Same mark distribution with total mass multiplied by factor >= 0.
    MarkKernel scaled(double factor) const;

private:
    double mass_ = 0.0;
    std::vector<double> marks_;
    std::vector<double> masses_;
    std::function<double(double)> density_;   // normalized pdf when set
    std::function<double(double)> quantile_;  // normalized quantile when set
    double lo_ = 0.0, hi_ = 0.0;
    int quad_order_ = 64;
};

}  // namespace jumpbsde
