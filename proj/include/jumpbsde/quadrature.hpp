#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace jumpbsde {

// Gauss-Legendre nodes and weights on [-1, 1]; instances cached per order.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    static const GaussLegendre& order(int n);

    double integrate(const std::function<double(double)>& f, double lo, double hi) const {
        const double c = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(m + c * nodes[i]);
        return c * acc;
    }
};

}  // namespace jumpbsde
