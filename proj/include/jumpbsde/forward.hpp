#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "jumpbsde/grid.hpp"
#include "jumpbsde/kernel.hpp"
#include "jumpbsde/measure.hpp"
#include "jumpbsde/path.hpp"

namespace jumpbsde {

enum class EventTag { totally_inaccessible, predictable };

struct TaggedEvent {
    double time = 0.0;
    EventTag tag = EventTag::totally_inaccessible;
};

// One simulated path together with everything the backward pass and the
// checks need: the realized jump measure, the compensator along this path,
// the mark-to-jump map, the martingale/predictable split of the state, the
// driving Brownian increments, and per-event tags.
struct ForwardRealization {
    std::shared_ptr<const CadlagPath> path;
    MeasureRealization mu;
    CompensatorSpec nu;
    // state increment caused by mark e from pre-jump state x, before any
    // masking at forced times: the model's (x, e) jump map
    std::function<double(double, double)> jump_map;
    // post-jump increment as a function of (s, e); equals jump_map at the
    // left limit off forced times and 0 there
    std::function<double(double, double)> gamma_tilde;
    std::shared_ptr<const CadlagPath> x_mart;  // martingale-jump part
    std::shared_ptr<const CadlagPath> x_pred;  // predictable-jump part
    // Brownian increments per interval of path->grid() (empty if no diffusion)
    std::vector<double> brownian_increments;
    // continuous-martingale increments sigma dW per interval (empty if none)
    std::vector<double> xc_increments;
    std::vector<TaggedEvent> tags;  // one per mu atom
    // boundary/forced-event counter process sampled on the path grid
    std::vector<double> pstar;  // empty unless the model forces events
    uint64_t seed = 0;

    const TimeGrid& grid() const { return path->grid(); }
};

// --- model specs -------------------------------------------------------------

// dX = b dt + sigma dW + compensated jumps gamma(X_-, e) under a Poisson
// random measure with finite-activity intensity kernel lambda(de).
struct JumpDiffusionSpec {
    double x0 = 0.0;
    std::function<double(double)> drift;          // b(x)
    std::function<double(double)> sigma;          // sigma(x)
    std::function<double(double, double)> gamma;  // gamma(x, e)
    MarkKernel intensity;                         // lambda(de), finite total mass
    double horizon = 1.0;
    // growth/regularity bound: |gamma(x,e)| <= K (1 ^ |e|) and Lipschitz in
    // x with the same modulus; spot-checked on random samples when > 0
    double lipschitz_bound = 0.0;
    // drop marks with |e| < eps from a discrete intensity (bias reported)
    double truncation_eps = 0.0;
};

// Pure-jump Markov process; atoms carry the post-jump state. The jump rate
// kernel lambda(t, x, de) has total mass bounded by rate_bound (thinning
// envelope) and puts no mass on the current state.
struct PureJumpSpec {
    double x0 = 0.0;
    std::function<MarkKernel(double, double)> rate_kernel;  // lambda(t, x, .)
    double rate_bound = 0.0;
    double horizon = 1.0;
};

// Piecewise-deterministic process on [0, 1]: flow x' = h(x) and jump rate
// lambda(x) with post-jump law p(x, de) in the interior; a forced jump to
// boundary_map(x) whenever the flow reaches the boundary {0, 1}.
struct PdmpSpec {
    double x0 = 0.5;
    std::function<double(double)> flow;             // h(x)
    std::function<double(double)> rate;             // lambda(x)
    std::function<MarkKernel(double)> jump_kernel;  // p(x, .), unit mass, interior
    std::function<double(double)> boundary_map;     // beta: {0,1} -> (0,1)
    double horizon = 1.0;
    double rate_bound = 0.0;  // sup lambda, diagnostics only
};

// --- simulators ----------------------------------------------------------------

// All simulators insert event times into the path grid exactly: the returned
// path's grid is base_grid refined with the event times. Randomness is the
// counter RNG keyed by (master_seed, path_index), so the event skeleton does
// not change when base_grid is refined.
ForwardRealization simulate_jump_diffusion(const JumpDiffusionSpec& spec, const GridPtr& base_grid,
                                           uint64_t master_seed, uint64_t path_index);
ForwardRealization simulate_pure_jump(const PureJumpSpec& spec, const GridPtr& base_grid,
                                      uint64_t master_seed, uint64_t path_index);
ForwardRealization simulate_pdmp(const PdmpSpec& spec, const GridPtr& base_grid,
                                 uint64_t master_seed, uint64_t path_index);

// --- shared stepping ----------------------------------------------------------

// One Euler increment exclusive of realized jumps: b dt + sigma dw minus the
// compensator drift dt * integral of gamma(x, e) against the intensity.
// Shared with the refinement studies so coupled reruns step identically.
double jd_euler_increment(const JumpDiffusionSpec& spec, double x, double dt, double dw);

// Arrival times and marks on (0, horizon], a pure function of the seeds; no
// grid enters, so refining the grid preserves the skeleton.
struct JdEventSkeleton {
    std::vector<double> times;
    std::vector<double> marks;
};
JdEventSkeleton jd_event_skeleton(const JumpDiffusionSpec& spec, uint64_t master_seed,
                                  uint64_t path_index);

// State at the side-appropriate limit: the right limit on the interval just
// after s, the left limit at s itself.
inline double state_at_side(const CadlagPath& p, double s, Side side) {
    return side == Side::right ? p.value_at(s) : p.pre_value_at(s);
}

// --- consistency checks -----------------------------------------------------

struct ReconcileReport {
    double max_jump_mismatch = 0.0;     // path jumps vs mu atoms through gamma_tilde
    double max_split_mismatch = 0.0;    // x_mart + x_pred vs path, all grid points
    double max_forced_atom_gap = 0.0;   // forced events vs their unit compensator atoms
    int violations = 0;                 // offending atoms/times
    bool pass = false;
    std::string detail;
};

// Structural audit of one realization: every path jump appears as a mu atom
// with matching gamma_tilde / predictable-jump value, tags agree with the
// compensator atoms, and the martingale/predictable split adds up.
ReconcileReport reconcile(const ForwardRealization& fr);

// --- ensembles ----------------------------------------------------------------

struct ForwardEnsemble {
    GridPtr base_grid;
    std::vector<ForwardRealization> paths;
    uint64_t master_seed = 0;
};

ForwardEnsemble simulate_ensemble(const JumpDiffusionSpec& spec, const GridPtr& base_grid,
                                  uint64_t master_seed, int n_paths);
ForwardEnsemble simulate_ensemble(const PureJumpSpec& spec, const GridPtr& base_grid,
                                  uint64_t master_seed, int n_paths);
ForwardEnsemble simulate_ensemble(const PdmpSpec& spec, const GridPtr& base_grid,
                                  uint64_t master_seed, int n_paths);

PathEnsemble to_path_ensemble(const ForwardEnsemble& fe);

}  // namespace jumpbsde
