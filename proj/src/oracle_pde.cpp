#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jumpbsde/oracle.hpp"

namespace jumpbsde {

namespace {

// Thomas algorithm for a tridiagonal system; diagonals passed by value
// because the sweep destroys them.
std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                      std::vector<double> upper, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    return x;
}

}  // namespace

double PdeSolution::value(double t, double x) const {
    const double tc = std::clamp(t, times.front(), times.back());
    const double xc = std::clamp(x, xs.front(), xs.back());
    auto it = std::upper_bound(times.begin(), times.end(), tc);
    std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    k = std::min(k, times.size() - 2);
    auto jt = std::upper_bound(xs.begin(), xs.end(), xc);
    std::size_t i = jt == xs.begin() ? 0 : static_cast<std::size_t>(jt - xs.begin()) - 1;
    i = std::min(i, xs.size() - 2);
    const double wt = (tc - times[k]) / (times[k + 1] - times[k]);
    const double wx = (xc - xs[i]) / (xs[i + 1] - xs[i]);
    const double lo = (1.0 - wx) * v[k][i] + wx * v[k][i + 1];
    const double hi = (1.0 - wx) * v[k + 1][i] + wx * v[k + 1][i + 1];
    return (1.0 - wt) * lo + wt * hi;
}

double PdeSolution::gradient(double t, double x) const {
    const double h = xs[1] - xs[0];
    return (value(t, x + h) - value(t, x - h)) / (2.0 * h);
}

PdeSolution pde_reference_v(const std::function<double(double)>& b,
                            const std::function<double(double)>& sigma,
                            const std::function<double(double)>& terminal, double horizon,
                            double x_lo, double x_hi, int n_x, int n_t) {
    if (n_x < 4 || n_t < 2) throw std::invalid_argument("pde_reference_v: grid too small");
    if (x_hi <= x_lo) throw std::invalid_argument("pde_reference_v: empty spatial interval");
    PdeSolution sol;
    sol.xs.resize(static_cast<std::size_t>(n_x) + 1);
    const double dx = (x_hi - x_lo) / n_x;
    for (int i = 0; i <= n_x; ++i) sol.xs[static_cast<std::size_t>(i)] = x_lo + i * dx;
    sol.times.resize(static_cast<std::size_t>(n_t) + 1);
    const double dt = horizon / n_t;
    for (int k = 0; k <= n_t; ++k) sol.times[static_cast<std::size_t>(k)] = k * dt;

    // march w(m) = v(T - m dt) forward; Dirichlet values frozen at the
    // terminal condition
    std::vector<double> w(sol.xs.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = terminal(sol.xs[i]);
    sol.v.assign(sol.times.size(), std::vector<double>());
    sol.v[static_cast<std::size_t>(n_t)] = w;

    const std::size_t m = w.size() - 2;  // interior nodes
    std::vector<double> lower(m), diag(m), upper(m), rhs(m);
    for (int step = 1; step <= n_t; ++step) {
        for (std::size_t i = 0; i < m; ++i) {
            const double x = sol.xs[i + 1];
            const double alpha = 0.5 * sigma(x) * sigma(x) / (dx * dx);
            const double beta = 0.5 * b(x) / dx;
            const double cl = alpha - beta, cd = -2.0 * alpha, cu = alpha + beta;
            lower[i] = -0.5 * dt * cl;
            diag[i] = 1.0 - 0.5 * dt * cd;
            upper[i] = -0.5 * dt * cu;
            rhs[i] = w[i + 1] + 0.5 * dt * (cl * w[i] + cd * w[i + 1] + cu * w[i + 2]);
        }
        // boundary terms move to the right-hand side
        rhs[0] -= lower[0] * w.front();
        rhs[m - 1] -= upper[m - 1] * w.back();
        lower[0] = 0.0;
        upper[m - 1] = 0.0;
        const std::vector<double> interior = solve_tridiagonal(lower, diag, upper, rhs);
        for (std::size_t i = 0; i < m; ++i) w[i + 1] = interior[i];
        sol.v[static_cast<std::size_t>(n_t - step)] = w;
    }
    return sol;
}

double flow_rk4(const std::function<double(double)>& h, double x0, double dt, int n_steps) {
    double x = x0;
    for (int k = 0; k < n_steps; ++k) {
        const double k1 = h(x);
        const double k2 = h(x + 0.5 * dt * k1);
        const double k3 = h(x + 0.5 * dt * k2);
        const double k4 = h(x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

}  // namespace jumpbsde
