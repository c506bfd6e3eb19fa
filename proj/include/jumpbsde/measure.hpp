#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "jumpbsde/grid.hpp"
#include "jumpbsde/kernel.hpp"
#include "jumpbsde/path.hpp"

namespace jumpbsde {

// One-sided time evaluation. Rates and predictable fields may jump with the
// state; integrals over [a, b] use right limits at a and left limits at b so
// piecewise-constant integrands integrate exactly.
enum class Side { left, right };

// --- realized jump measure -------------------------------------------------

struct MeasureAtom {
    double time = 0.0;
    double mark = 0.0;
};

// Atoms of an integer-valued measure on (0, T] x R, sorted by time, at most
// one atom per time.
struct MeasureRealization {
    std::vector<MeasureAtom> atoms;

    bool has_atom_at(double t) const;
    const MeasureAtom* atom_at(double t) const;
};

// Atoms read off a path: one (t, Delta x_t) per nonzero jump.
MeasureRealization jump_measure(const CadlagPath& path);

// --- compensator -----------------------------------------------------------

// Predictable atom of the compensator: at `time` the measure nu({time}, de)
// equals `kernel`, whose mass is at most 1.
struct CompensatorAtom {
    double time = 0.0;
    MarkKernel kernel;
};

// Compensator nu(ds, de) = rate(s) (ds part) + sum of atoms. rate(s, side)
// returns the mark kernel of the ds-density at s, one-sided.
struct CompensatorSpec {
    std::function<MarkKernel(double, Side)> rate;  // may be null: no ds part
    std::vector<CompensatorAtom> atoms;            // sorted by time
    double total_mass_bound = 0.0;                 // sup_s rate mass, for thinning

    bool has_rate() const { return static_cast<bool>(rate); }
    const CompensatorAtom* atom_at(double t) const;
    // integral over (a, b] of the ds part against f(s, e), trapezoid per
    // grid interval; exact for rates piecewise constant between grid points
    double rate_integral(const TimeGrid& grid, double a, double b,
                         const std::function<double(double, double, Side)>& f) const;
};

// --- predictable integrands ------------------------------------------------

struct PredictableField {
    // eval(s, e, side): one-sided in s for the same reason as rates. Fields
    // built from a path must read only its left history at s (left limits);
    // the API offers no lookahead accessor, which is the whole enforcement.
    std::function<double(double, double, Side)> eval;
    bool square_integrable = true;

    double operator()(double s, double e, Side side = Side::left) const {
        return eval(s, e, side);
    }
};

// \hat W_s = integral of W(s, e) against nu({s}, de); zero off compensator atoms.
double hat_w(const PredictableField& w, const CompensatorSpec& nu, double s);

// --- the C(W) functional ---------------------------------------------------

struct GridSeries {
    GridPtr grid;
    std::vector<double> values;  // values[k] at grid point k
};

// Three evaluation routes for the same nondecreasing process. `direct`
// accumulates |W - hat W|^2 against nu plus (1 - mass) |hat W|^2 at atoms;
// `decomposed` accumulates |W|^2 against nu minus |hat W|^2 at atoms;
// `atom_restricted` is the direct form with atom sums taken only over times
// with positive atom mass, splitting full-mass times out separately.
struct CRoute {
    GridSeries direct;
    GridSeries decomposed;
    GridSeries atom_restricted;
};

CRoute c_of_w(const PredictableField& w, const MeasureRealization& mu,
              const CompensatorSpec& nu, const GridPtr& grid);

// --- norms -----------------------------------------------------------------

struct NormEstimate {
    double value = 0.0;      // Monte Carlo mean of the terminal functional
    double std_error = 0.0;  // sample standard error of that mean
    int n_paths = 0;
};

// Realization bundle for ensemble-level functionals.
struct MeasureContext {
    MeasureRealization mu;
    CompensatorSpec nu;
    GridPtr grid;
};

// E[C(W)_T] over realizations (direct route terminal value).
NormEstimate g2_norm(const PredictableField& w, const std::vector<MeasureContext>& contexts);
// E[|W|^2 * nu_T] over realizations.
NormEstimate l2_norm(const PredictableField& w, const std::vector<MeasureContext>& contexts);
// terminal |W|^2 * nu_T for a single realization
double l2_sq_terminal(const PredictableField& w, const MeasureContext& ctx);

// --- compensated integral --------------------------------------------------

// t -> sum_{atoms <= t} W - int_0^t int W dnu, evaluated on the grid. The
// nu part subtracts both the ds component and the atom component.
CadlagPath compensated_integral(const PredictableField& w, const MeasureRealization& mu,
                                const CompensatorSpec& nu, const GridPtr& grid);

// --- event classification ----------------------------------------------------

// Partition of event times: D = atom times of mu, J = times with positive
// compensator atom mass, K = times with atom mass 1 (within tol). K subset J.
struct EventSets {
    std::vector<double> d_times;
    std::vector<double> j_times;
    std::vector<double> k_times;
    bool quasi_left_continuous = false;  // J empty
};

EventSets classify_events(const MeasureRealization& mu, const CompensatorSpec& nu,
                          double mass_tol = 1e-12);

// --- transfer identity -------------------------------------------------------

// Compares sum over jumps of x of phi(s, Delta x_s) against the mark-space
// route: sum over mu-atoms of phi(s, gamma_tilde(s, e)) plus the correction
// sum over predictable jump times of phi(s, Delta xp_s).
struct TransferIdentityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double max_abs_diff = 0.0;  // max over the grid of |lhs_t - rhs_t|
};

TransferIdentityReport transfer_identity_check(
    const std::function<double(double, double)>& phi, const CadlagPath& x_path,
    const MeasureRealization& mu, const std::function<double(double, double)>& gamma_tilde,
    const std::vector<Jump>& xp_jumps);

// Max of max_abs_diff over a fixed family of test functions (powers, a
// bounded nonlinearity, time-weighted variants), all vanishing at x = 0.
double transfer_identity_family_max(const CadlagPath& x_path, const MeasureRealization& mu,
                                    const std::function<double(double, double)>& gamma_tilde,
                                    const std::vector<Jump>& xp_jumps);

}  // namespace jumpbsde
