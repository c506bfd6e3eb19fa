#include <cmath>
#include <stdexcept>

#include "jumpbsde/bsde.hpp"

namespace jumpbsde {

namespace {

constexpr double kStateMatchTol = 1e-9;

// rates out of each state at time t, resolved against the state list
std::vector<std::vector<double>> rate_table(const PureJumpSpec& spec,
                                            const std::vector<double>& states, double t) {
    const std::size_t n = states.size();
    std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const MarkKernel kernel = spec.rate_kernel(t, states[i]);
        if (!kernel.is_discrete())
            throw std::invalid_argument("finite-state solve: rate kernel must be discrete");
        for (std::size_t a = 0; a < kernel.marks().size(); ++a) {
            const double mark = kernel.marks()[a];
            bool found = false;
            for (std::size_t j = 0; j < n; ++j) {
                if (std::abs(states[j] - mark) <= kStateMatchTol) {
                    if (j == i)
                        throw std::invalid_argument(
                            "finite-state solve: kernel puts mass on the current state");
                    q[i][j] += kernel.masses()[a];
                    found = true;
                    break;
                }
            }
            if (!found)
                throw std::invalid_argument("finite-state solve: kernel leaves the state space");
        }
    }
    return q;
}

// -v'(t, x_i) = f(t, x_i, v_i, 0, agg_i) + agg_i with the jump aggregate
// agg_i = sum_j q_ij (v_j - v_i)
std::vector<double> backward_rhs(const PureJumpSpec& spec, const DriverSpec& driver,
                                 const std::vector<double>& states, double t,
                                 const std::vector<double>& v) {
    const auto q = rate_table(spec, states, t);
    const std::size_t n = states.size();
    std::vector<double> rhs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double agg = 0.0;
        for (std::size_t j = 0; j < n; ++j) agg += q[i][j] * (v[j] - v[i]);
        rhs[i] = driver.f(t, states[i], v[i], 0.0, agg) + agg;
    }
    return rhs;
}

std::vector<std::vector<double>> integrate_table(const PureJumpSpec& spec,
                                                 const DriverSpec& driver,
                                                 const std::vector<double>& states,
                                                 int time_steps) {
    const std::size_t n = states.size();
    const double dt = spec.horizon / time_steps;
    std::vector<std::vector<double>> table(static_cast<std::size_t>(time_steps) + 1);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = driver.terminal(states[i]);
    table[static_cast<std::size_t>(time_steps)] = v;
    for (int step = time_steps; step-- > 0;) {
        // RK4 on w(s) = v(T - s); each stage re-evaluates the rates
        const double t1 = (step + 1) * dt;
        auto stage = [&](double t, const std::vector<double>& w) {
            return backward_rhs(spec, driver, states, t, w);
        };
        const std::vector<double> k1 = stage(t1, v);
        std::vector<double> tmp(n);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * dt * k1[i];
        const std::vector<double> k2 = stage(t1 - 0.5 * dt, tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * dt * k2[i];
        const std::vector<double> k3 = stage(t1 - 0.5 * dt, tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] + dt * k3[i];
        const std::vector<double> k4 = stage(t1 - dt, tmp);
        for (std::size_t i = 0; i < n; ++i)
            v[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        table[static_cast<std::size_t>(step)] = v;
    }
    return table;
}

}  // namespace

double FiniteStateSolution::value(int time_index, double state, double tol) const {
    const auto k = static_cast<std::size_t>(time_index);
    if (k >= v.size()) throw std::out_of_range("finite-state solution: time index");
    for (std::size_t i = 0; i < states.size(); ++i)
        if (std::abs(states[i] - state) <= tol) return v[k][i];
    throw std::invalid_argument("finite-state solution: unknown state");
}

FiniteStateSolution solve_finite_state(const PureJumpSpec& spec, const DriverSpec& driver,
                                       std::vector<double> states, int time_steps) {
    if (states.size() < 2) throw std::invalid_argument("finite-state solve: need >= 2 states");
    if (time_steps < 2) throw std::invalid_argument("finite-state solve: need >= 2 steps");
    if (!driver.terminal) throw std::invalid_argument("finite-state solve: missing terminal");

    FiniteStateSolution sol;
    sol.states = std::move(states);
    sol.v = integrate_table(spec, driver, sol.states, time_steps);
    sol.times.resize(sol.v.size());
    for (std::size_t k = 0; k < sol.times.size(); ++k)
        sol.times[k] = spec.horizon * static_cast<double>(k) / time_steps;

    // step-halving diagnostic: the half-step table shares every coarse node
    const auto fine = integrate_table(spec, driver, sol.states, 2 * time_steps);
    for (std::size_t k = 0; k < sol.v.size(); ++k)
        for (std::size_t i = 0; i < sol.states.size(); ++i)
            sol.step_sensitivity =
                std::max(sol.step_sensitivity, std::abs(sol.v[k][i] - fine[2 * k][i]));
    sol.stiffness_flag = sol.step_sensitivity > 1e-6;

    double g_sup = 0.0, rate_sup = 0.0, f0_sup = 0.0;
    for (std::size_t i = 0; i < sol.states.size(); ++i) {
        const double x = sol.states[i];
        g_sup = std::max(g_sup, std::abs(driver.terminal(x)));
        rate_sup = std::max(rate_sup, spec.rate_kernel(0.0, x).mass());
        for (const double t : {0.0, 0.5 * spec.horizon, spec.horizon})
            f0_sup = std::max(f0_sup, std::abs(driver.f(t, x, 0.0, 0.0, 0.0)));
    }
    sol.groenwall_bound = (g_sup + spec.horizon * f0_sup) *
                          std::exp((driver.lipschitz_y + 2.0 * rate_sup) * spec.horizon);
    sol.groenwall_ok = true;
    for (const auto& row : sol.v)
        for (const double x : row)
            if (std::abs(x) > sol.groenwall_bound + 1e-9) sol.groenwall_ok = false;
    return sol;
}

}  // namespace jumpbsde
