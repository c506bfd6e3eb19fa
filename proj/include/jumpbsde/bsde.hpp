#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "jumpbsde/basis.hpp"
#include "jumpbsde/forward.hpp"
#include "jumpbsde/grid.hpp"
#include "jumpbsde/kernel.hpp"
#include "jumpbsde/measure.hpp"

namespace jumpbsde {

// Which clock the generator integrates against. Diffusion and pure-jump
// models pay f ds; boundary-forced models pay f dA where A has unit jumps at
// forced times, so the generator enters the backward recursion at atoms too.
enum class DriverClock { lebesgue, compensator };

struct DriverSpec {
    // f(s, x, y, z, u_eval) where u_eval is the compensator-weighted jump
    // term int u(e) nu-rate(de) already assembled by the solver; drivers that
    // do not use it can ignore it
    std::function<double(double, double, double, double, double)> f;
    std::function<double(double)> terminal;  // g(x)
    DriverClock clock = DriverClock::lebesgue;
    double lipschitz_y = 0.0;  // L_y bound for the atom fixed-point check
};

struct SolverOptions {
    int state_degree = 2;       // polynomial degree of the state basis
    int mark_degree = 1;        // mark basis degree for the jump regressions
    std::vector<double> state_values;  // nonempty: use indicator basis instead
    int fixed_point_max_iter = 100;
    double fixed_point_tol = 1e-10;
    double u_truncation = 0.0;  // ignore marks with |gamma| below this
};

struct BsdeSolution {
    GridPtr grid;  // base grid of the ensemble
    double y0 = 0.0;
    double y0_std_error = 0.0;
    // per-path Y evaluated on the path's own grid (right limits)
    std::vector<CadlagPath> y_paths;
    // per-path Z on base-grid intervals; empty when no diffusion part
    std::vector<std::vector<double>> z_paths;
    // U(t, e) realized at each mu atom of each path, aligned with mu.atoms
    std::vector<std::vector<double>> u_at_atoms;
    // fitted slice value functions v_k(x) on base-grid points
    std::vector<std::function<double(double)>> slice_values;
    // fitted z-slice functions z_k(x) on base-grid intervals
    std::vector<std::function<double(double)>> slice_z;
    // fitted u-slice functions u_k(x, e), one per base-grid interval
    std::vector<std::function<double(double, double)>> slice_u;
    int n_paths = 0;
    std::string diagnostics;
};

// Least-squares backward induction over a simulated ensemble. Requires at
// least 100 paths. Conditional expectations are fit on the base grid; event
// times between base points are folded into their interval's regression.
BsdeSolution solve_regression(const ForwardEnsemble& ensemble, const DriverSpec& driver,
                              const SolverOptions& options);

// --- finite state spaces -------------------------------------------------------

struct FiniteStateSolution {
    std::vector<double> states;
    std::vector<double> times;
    // v[k][i] = value at times[k], states[i]
    std::vector<std::vector<double>> v;
    double step_sensitivity = 0.0;  // max |v - v_half| over the table
    bool stiffness_flag = false;    // step_sensitivity above tolerance
    double groenwall_bound = 0.0;   // a-priori sup bound on |v|
    bool groenwall_ok = false;

    double value(int time_index, double state, double tol = 1e-9) const;
};

// Backward ODE system -v' = f(t, x, v, jump term) + sum_e q(x, e)(v(e) - v(x))
// solved by RK4 on a fixed grid, re-solved at half step for a stiffness
// diagnostic. States and rates come from the pure-jump spec's kernel.
FiniteStateSolution solve_finite_state(const PureJumpSpec& spec, const DriverSpec& driver,
                                       std::vector<double> states, int time_steps = 200);

// --- residuals -------------------------------------------------------------------

struct ResidualReport {
    std::vector<double> per_path_max;  // max over t of |residual_t| per path
    double ensemble_mean = 0.0;        // mean of per-path max
    double ensemble_max = 0.0;
};

// Plugs a solution back into the backward equation pathwise:
//   Y_t - Y_T - int_t^T f dclock + int_t^T Z dW + int_(t,T] U d(mu - nu)
// and reports how far each path is from zero.
ResidualReport residual_check(const BsdeSolution& solution, const ForwardEnsemble& ensemble,
                              const DriverSpec& driver);

// Same contraction with caller-supplied fields instead of a fitted solution:
// y(t, x), z(t, x), u(t, x, e) evaluated along each realization.
ResidualReport residual_check_fields(const std::function<double(double, double)>& y,
                                     const std::function<double(double, double)>& z,
                                     const std::function<double(double, double, double)>& u,
                                     const ForwardEnsemble& ensemble, const DriverSpec& driver);

}  // namespace jumpbsde
