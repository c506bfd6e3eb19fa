#pragma once

#include <functional>
#include <string>
#include <vector>

#include "jumpbsde/bsde.hpp"
#include "jumpbsde/forward.hpp"
#include "jumpbsde/measure.hpp"

namespace jumpbsde {

// Deterministic value function v(t, x) with optional spatial gradient.
struct ValueFunction {
    std::function<double(double, double)> v;
    std::function<double(double, double)> dx;  // may be null; finite differences then

    double grad(double t, double x, double h = 1e-6) const;
};

// --- Z identification -----------------------------------------------------------

struct ZIdentificationReport {
    double rmse = 0.0;       // root mean square of Z - dx v * ratio over intervals
    double max_abs = 0.0;
    int n_samples = 0;
    bool pass = false;
};

// Checks Z_t = dx v(t, X_t) * bracket_ratio(t, X_t) against the solved Z on
// every base-grid interval of every path. bracket_ratio is d<X^c, M>/d<M>;
// for dX^c = sigma dW against M = W this is sigma(X_t).
ZIdentificationReport identify_z(const ValueFunction& v, const BsdeSolution& solution,
                                 const ForwardEnsemble& ensemble,
                                 const std::function<double(double, double)>& bracket_ratio,
                                 double tolerance);

// --- the H field -----------------------------------------------------------------

// H_s(e) = U_s(e) - (v(s, X_{s-} + gamma_tilde(s, e)) - v(s, X_{s-})),
// evaluated along one realization; predictable in s through left limits.
struct HField {
    PredictableField field;          // H as a predictable function of (s, e)
    std::vector<double> at_atoms;    // H at the realization's mu atoms
    std::vector<double> atom_times;  // matching times
};

// U may come from a fitted solution (slice_u) or a closed form.
HField compute_h(const std::function<double(double, double, double)>& u, const ValueFunction& v,
                 const ForwardRealization& realization);

struct VanishingReport {
    double g2_of_h = 0.0;          // E[C(H)_T] across the ensemble
    double terminal_mean = 0.0;    // mean of int H d(mu - nu) at T
    double terminal_std_error = 0.0;
    bool pass = false;
};

// The identification theorem's conclusion: the compensated integral of H
// vanishes and H is null for the C functional. Monte Carlo on the ensemble.
VanishingReport verify_vanishing(const std::function<double(double, double, double)>& u,
                                 const ValueFunction& v, const ForwardEnsemble& ensemble,
                                 double g2_tolerance);

// --- structure of the null space ---------------------------------------------

struct KDecompositionReport {
    // l fitted per full-mass event time: H should equal l there and vanish off
    std::vector<double> k_times;
    std::vector<double> l_fit;
    double off_k_l2 = 0.0;       // L2 mass of H away from full-mass times
    double on_k_residual = 0.0;  // max |H - l_fit| at full-mass times
};

KDecompositionReport k_decomposition(const std::function<double(double, double, double)>& u,
                                     const ValueFunction& v, const ForwardEnsemble& ensemble);

// --- chain rule remainder -----------------------------------------------------

struct ChainRuleReport {
    std::vector<CadlagPath> a_paths;  // remainder A^v per path on the base grid
    OrthogonalityReport orthogonality;  // terminal A^v against N-fold split
    double terminal_mean = 0.0;
    double terminal_std_error = 0.0;
};

// A^v(t) = v(t, X_t) - v(0, X_0) - int dx v dX^c
//          - compensated integral of the v increment along gamma_tilde.
// include_diffusion = false drops the dX^c term (purely discontinuous X).
ChainRuleReport chain_rule_remainder(const ValueFunction& v, const ForwardEnsemble& ensemble,
                                     bool include_diffusion);

}  // namespace jumpbsde
