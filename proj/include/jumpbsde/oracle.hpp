#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jumpbsde/grid.hpp"
#include "jumpbsde/kernel.hpp"

namespace jumpbsde {

// --- finite-state reference via the matrix exponential ---------------------------

struct GeneratorMatrix {
    std::vector<double> states;
    Eigen::MatrixXd q;  // rows sum to zero
};

// exp(m) by scaling and squaring with the degree-13 Pade approximant.
// Self-contained on purpose: reference values must not share code with the
// solvers they check.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m);

struct MatexpReport {
    std::vector<double> v0;           // v(t, .) for the requested t
    double row_sum_error = 0.0;       // max |row sum of exp(Q dt) - 1|
    double rk4_cross_check = 0.0;     // max |matexp v - rk4 v| at t
    bool pass = false;
};

// v(t, x) = E[g(X_T) | X_t = x] for the chain with generator q:
// v(t, .) = exp(Q (T - t)) g. Cross-checked against an independent RK4
// integration of the backward system.
MatexpReport matrix_exponential_v(const GeneratorMatrix& q,
                                  const std::vector<double>& terminal, double t, double horizon);

// RK4 for -v' = Q v with v(T) = terminal, n_steps over [t, T].
std::vector<double> backward_rk4_v(const GeneratorMatrix& q, const std::vector<double>& terminal,
                                   double t, double horizon, int n_steps);

// --- diffusion reference via a parabolic solve ------------------------------------

struct PdeSolution {
    std::vector<double> times;
    std::vector<double> xs;
    std::vector<std::vector<double>> v;  // v[k][i] at (times[k], xs[i])

    double value(double t, double x) const;     // bilinear interpolation
    double gradient(double t, double x) const;  // central difference in x
};

// Crank-Nicolson for v_t + b v_x + sigma^2/2 v_xx = 0, v(T, .) = g, on
// [x_lo, x_hi] with Dirichlet boundaries frozen at the terminal condition.
// Second order in time and space; the tridiagonal systems are solved by the
// Thomas algorithm.
PdeSolution pde_reference_v(const std::function<double(double)>& b,
                            const std::function<double(double)>& sigma,
                            const std::function<double(double)>& terminal, double horizon,
                            double x_lo, double x_hi, int n_x, int n_t);

// --- exhaustive small-path enumeration ---------------------------------------------

struct SmallPathCase {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_diff = 0.0;
};

struct SmallPathReport {
    std::vector<SmallPathCase> cases;
    double max_abs_diff = 0.0;
    bool exact = false;  // every case agrees to the last bit
};

// Enumerates every piecewise-constant path with at most max_events jumps
// over a fixed small grid and mark set, evaluating the transfer identity on
// each by direct summation.
SmallPathReport exhaustive_small_path_check(int max_events = 3);

// --- closed-form flow for the boundary-driven model ---------------------------------

// Deterministic motion x' = h(x) integrated by RK4 with fixed step; used as
// the reference flow for hit-time checks.
double flow_rk4(const std::function<double(double)>& h, double x0, double dt, int n_steps);

}  // namespace jumpbsde
