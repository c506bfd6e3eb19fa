#include <cmath>
#include <limits>
#include <stdexcept>

#include "jumpbsde/forward.hpp"
#include "jumpbsde/parallel.hpp"
#include "jumpbsde/rng.hpp"

namespace jumpbsde {

namespace {

constexpr double kBisectTol = 1e-10;          // event-time bisection width
constexpr double kSnapTol = 1e-9;             // snap event times onto grid points
constexpr double kBoundaryTol = 1e-12;        // treat as exactly on the boundary

double rk4_step(const std::function<double(double)>& h, double x, double dt) {
    const double k1 = h(x);
    const double k2 = h(x + 0.5 * dt * k1);
    const double k3 = h(x + 0.5 * dt * k2);
    const double k4 = h(x + dt * k3);
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

ForwardRealization simulate_pdmp(const PdmpSpec& spec, const GridPtr& base_grid,
                                 uint64_t master_seed, uint64_t path_index) {
    if (std::abs(base_grid->horizon() - spec.horizon) > kTimeEps)
        throw std::invalid_argument("pdmp: grid horizon differs from spec horizon");
    if (spec.x0 <= 0.0 || spec.x0 >= 1.0)
        throw std::invalid_argument("pdmp: initial state must be interior");
    const double T = spec.horizon;

    CounterRng clock(master_seed, path_index, Stream::event_times);
    CounterRng marks(master_seed, path_index, Stream::marks);

    // dynamic knot list: (time, right-limit value, cumulative forced count)
    std::vector<double> times{0.0}, values{spec.x0}, pstar{0.0};
    std::vector<Jump> jumps, interior_jumps, boundary_jumps;
    ForwardRealization fr;
    fr.seed = path_index;

    double tau = 0.0, x = spec.x0, forced = 0.0;
    double threshold = clock.exponential(1.0);  // interior survival budget
    double hazard = 0.0;                        // integrated rate since last jump
    std::size_t bi = 1;                         // next base point index

    auto record = [&](double t, double v) {
        times.push_back(t);
        values.push_back(v);
        pstar.push_back(forced);
    };

    while (tau < T - kTimeEps) {
        while (bi < base_grid->size() && (*base_grid)[bi] <= tau + kTimeEps) ++bi;
        const double t_target = (*base_grid)[bi];
        const double dt = t_target - tau;
        const double x_next = rk4_step(spec.flow, x, dt);
        if (std::abs(x_next - x) > 0.25)
            throw std::runtime_error("pdmp: flow moved a quarter of the domain in one step; "
                                     "refine the grid");

        // candidate boundary hit
        double s_boundary = std::numeric_limits<double>::infinity();
        double boundary = -1.0;
        if (x_next >= 1.0 - kBoundaryTol || x_next <= kBoundaryTol) {
            boundary = x_next >= 0.5 ? 1.0 : 0.0;
            if (std::abs(x_next - boundary) <= kBoundaryTol) {
                s_boundary = t_target;
            } else {
                double lo = tau, hi = t_target;
                while (hi - lo > kBisectTol) {
                    const double mid = 0.5 * (lo + hi);
                    const double xm = rk4_step(spec.flow, x, mid - tau);
                    const bool crossed = boundary == 1.0 ? xm >= 1.0 : xm <= 0.0;
                    (crossed ? hi : lo) = mid;
                }
                s_boundary = hi;
            }
        }

        // candidate interior jump via the integrated-rate threshold
        double s_interior = std::numeric_limits<double>::infinity();
        const double rate_here = spec.rate(x);
        const double rate_next = spec.rate(x_next);
        const double hazard_inc = 0.5 * dt * (rate_here + rate_next);
        if (hazard + hazard_inc >= threshold) {
            double lo = tau, hi = t_target;
            while (hi - lo > kBisectTol) {
                const double mid = 0.5 * (lo + hi);
                const double xm = rk4_step(spec.flow, x, mid - tau);
                const double acc = hazard + 0.5 * (mid - tau) * (rate_here + spec.rate(xm));
                (acc >= threshold ? hi : lo) = mid;
            }
            s_interior = hi;
        }

        if (!std::isfinite(s_boundary) && !std::isfinite(s_interior)) {
            record(t_target, x_next);
            tau = t_target;
            x = x_next;
            hazard += hazard_inc;
            ++bi;
            continue;
        }

        const bool is_boundary = s_boundary <= s_interior;
        double s = is_boundary ? s_boundary : s_interior;
        // snap onto a base point when the bisected time is within tolerance
        const std::size_t near = base_grid->floor_index(std::min(s + kSnapTol, T));
        if (std::abs((*base_grid)[near] - s) <= kSnapTol && (*base_grid)[near] > tau + kTimeEps)
            s = (*base_grid)[near];

        if (s >= T - kSnapTol) {
            // an event at the horizon itself does not fire; the realization
            // ends with the pre-event state
            const double x_pre = is_boundary ? boundary : rk4_step(spec.flow, x, T - tau);
            record(T, x_pre);
            tau = T;
            break;
        }

        const double x_pre = is_boundary ? boundary : rk4_step(spec.flow, x, s - tau);
        double e;
        if (is_boundary) {
            e = spec.boundary_map(x_pre);
            if (e <= 0.0 || e >= 1.0)
                throw std::invalid_argument("pdmp: boundary map must land in (0,1)");
            forced += 1.0;
            fr.nu.atoms.push_back({s, MarkKernel::point(e, 1.0)});
            fr.tags.push_back({s, EventTag::predictable});
            boundary_jumps.push_back({s, e - x_pre});
        } else {
            const MarkKernel law = spec.jump_kernel(x_pre);
            if (std::abs(law.mass() - 1.0) > 1e-9)
                throw std::invalid_argument("pdmp: interior post-jump law must have unit mass");
            e = law.sample(marks.uniform01());
            if (e <= 0.0 || e >= 1.0)
                throw std::invalid_argument("pdmp: interior post-jump state must be interior");
            if (std::abs(e - x_pre) <= 1e-12)
                throw std::invalid_argument("pdmp: post-jump law puts mass on the current state");
            fr.tags.push_back({s, EventTag::totally_inaccessible});
            interior_jumps.push_back({s, e - x_pre});
        }
        fr.mu.atoms.push_back({s, e});
        jumps.push_back({s, e - x_pre});
        record(s, e);
        tau = s;
        x = e;
        hazard = 0.0;
        threshold = clock.exponential(1.0);
    }

    GridPtr grid = std::make_shared<const TimeGrid>(TimeGrid(times));
    fr.path = std::make_shared<const CadlagPath>(grid, values, jumps);
    fr.pstar = pstar;

    // compensator: rate part lambda(X_s-) P(X_s-, de), unit atoms already
    // recorded at forced times
    auto path = fr.path;
    auto interior_law = spec.jump_kernel;
    auto bmap = spec.boundary_map;
    auto rate = spec.rate;
    auto law_at = [interior_law, bmap](double state) {
        if (state <= 0.0 || state >= 1.0) return MarkKernel::point(bmap(state), 1.0);
        return interior_law(state);
    };
    fr.nu.rate = [path, law_at, rate](double s, Side side) {
        const double state = state_at_side(*path, s, side);
        return law_at(state).scaled(rate(state));
    };
    fr.nu.total_mass_bound = spec.rate_bound;

    fr.jump_map = [](double x_pre, double e) {
        return (x_pre > 0.0 && x_pre < 1.0) ? e - x_pre : 0.0;
    };
    fr.gamma_tilde = [path](double s, double e) {
        const double x_pre = path->pre_value_at(s);
        return (x_pre > 0.0 && x_pre < 1.0) ? e - x_pre : 0.0;
    };

    // martingale-jump component: interior jumps compensated by the rate
    // drift; the complement picks up the flow and the forced jumps
    auto gt_side = [path](double s, double e, Side side) {
        const double state = state_at_side(*path, s, side);
        return (state > 0.0 && state < 1.0) ? e - state : 0.0;
    };
    std::vector<double> xi(grid->size(), 0.0), xp(grid->size(), 0.0);
    xp[0] = spec.x0;
    std::size_t next_interior = 0;
    for (std::size_t k = 1; k < grid->size(); ++k) {
        const double drift = fr.nu.rate_integral(*grid, (*grid)[k - 1], (*grid)[k], gt_side);
        double jump = 0.0;
        if (next_interior < interior_jumps.size() &&
            std::abs(interior_jumps[next_interior].time - (*grid)[k]) <= kTimeEps) {
            jump = interior_jumps[next_interior].size;
            ++next_interior;
        }
        xi[k] = xi[k - 1] - drift + jump;
        xp[k] = values[k] - xi[k];
    }
    fr.x_mart = std::make_shared<const CadlagPath>(grid, xi, interior_jumps);
    fr.x_pred = std::make_shared<const CadlagPath>(grid, xp, boundary_jumps);
    return fr;
}

ForwardEnsemble simulate_ensemble(const PdmpSpec& spec, const GridPtr& base_grid,
                                  uint64_t master_seed, int n_paths) {
    ForwardEnsemble fe;
    fe.base_grid = base_grid;
    fe.master_seed = master_seed;
    fe.paths.resize(static_cast<std::size_t>(n_paths));
    parallel_chunks(static_cast<std::size_t>(n_paths), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            fe.paths[i] = simulate_pdmp(spec, base_grid, master_seed, i);
    });
    return fe;
}

}  // namespace jumpbsde
