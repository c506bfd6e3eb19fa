#include <cmath>
#include <stdexcept>

#include "jumpbsde/forward.hpp"
#include "jumpbsde/parallel.hpp"
#include "jumpbsde/rng.hpp"

namespace jumpbsde {

ForwardRealization simulate_pure_jump(const PureJumpSpec& spec, const GridPtr& base_grid,
                                      uint64_t master_seed, uint64_t path_index) {
    if (std::abs(base_grid->horizon() - spec.horizon) > kTimeEps)
        throw std::invalid_argument("pure jump: grid horizon differs from spec horizon");
    if (spec.rate_bound <= 0.0) {
        if (spec.rate_kernel && spec.rate_kernel(0.0, spec.x0).mass() > 0.0)
            throw std::invalid_argument("pure jump: zero rate bound with a live kernel");
    }

    // Thinning against the constant envelope: proposals are a homogeneous
    // Poisson stream, accepted with probability mass/bound at the pre-jump
    // state. The event skeleton never reads the grid.
    struct Event {
        double time;
        double state;  // post-jump state carried by the atom
    };
    std::vector<Event> events;
    double x = spec.x0;
    if (spec.rate_bound > 0.0) {
        CounterRng clock(master_seed, path_index, Stream::event_times);
        CounterRng thin(master_seed, path_index, Stream::thinning);
        CounterRng marks(master_seed, path_index, Stream::marks);
        double t = clock.exponential(spec.rate_bound);
        while (t < spec.horizon - kTimeEps) {
            const MarkKernel k = spec.rate_kernel(t, x);
            const double mass = k.mass();
            if (mass > spec.rate_bound + 1e-12)
                throw std::invalid_argument("pure jump: kernel mass exceeds the rate bound");
            const double u = thin.uniform01();
            if (mass > 0.0 && u <= mass / spec.rate_bound) {
                const double e = k.sample(marks.uniform01());
                if (std::abs(e - x) <= 1e-12)
                    throw std::invalid_argument("pure jump: kernel puts mass on the current state");
                if (events.empty() || t > events.back().time + kTimeEps) {
                    events.push_back({t, e});
                    x = e;
                }
            }
            t += clock.exponential(spec.rate_bound);
        }
    }

    std::vector<double> event_times;
    for (const Event& ev : events) event_times.push_back(ev.time);
    GridPtr grid = std::make_shared<const TimeGrid>(base_grid->refined_with(event_times));

    ForwardRealization fr;
    fr.seed = path_index;
    std::vector<double> values(grid->size(), spec.x0);
    std::vector<Jump> jumps;
    std::size_t next_event = 0;
    for (std::size_t k = 1; k < grid->size(); ++k) {
        values[k] = values[k - 1];
        if (next_event < events.size() &&
            std::abs(events[next_event].time - (*grid)[k]) <= kTimeEps) {
            const double t = (*grid)[k];
            const double e = events[next_event].state;
            jumps.push_back({t, e - values[k - 1]});
            values[k] = e;
            fr.mu.atoms.push_back({t, e});
            fr.tags.push_back({t, EventTag::totally_inaccessible});
            ++next_event;
        }
    }
    fr.path = std::make_shared<const CadlagPath>(grid, values, jumps);

    // X^p carries the compensator drift of the jump martingale; its exact
    // complement makes the split sum back to the path bit for bit. The drift
    // integrand is constant between events, so per-interval trapezoids with
    // one-sided evaluation are exact for time-homogeneous kernels.
    auto path = fr.path;
    auto kernel_fn = spec.rate_kernel;
    CompensatorSpec nu;
    nu.rate = [kernel_fn, path](double s, Side side) {
        return kernel_fn(s, state_at_side(*path, s, side));
    };
    nu.total_mass_bound = spec.rate_bound;
    fr.nu = nu;

    std::vector<double> xp(grid->size(), spec.x0), xi(grid->size(), 0.0);
    for (std::size_t k = 1; k < grid->size(); ++k) {
        const double drift = nu.rate_integral(
            *grid, (*grid)[k - 1], (*grid)[k],
            [&](double s, double e, Side side) { return e - state_at_side(*path, s, side); });
        xp[k] = xp[k - 1] + drift;
        xi[k] = values[k] - xp[k];
        if (!std::isfinite(values[k]))
            throw std::runtime_error("pure jump: state became non-finite");
    }
    fr.x_pred = std::make_shared<const CadlagPath>(grid, xp, std::vector<Jump>{});
    fr.x_mart = std::make_shared<const CadlagPath>(grid, xi, jumps);
    fr.jump_map = [](double x_pre, double e) { return e - x_pre; };
    fr.gamma_tilde = [path](double s, double e) { return e - path->pre_value_at(s); };
    return fr;
}

ForwardEnsemble simulate_ensemble(const PureJumpSpec& spec, const GridPtr& base_grid,
                                  uint64_t master_seed, int n_paths) {
    ForwardEnsemble fe;
    fe.base_grid = base_grid;
    fe.master_seed = master_seed;
    fe.paths.resize(static_cast<std::size_t>(n_paths));
    parallel_chunks(static_cast<std::size_t>(n_paths), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            fe.paths[i] = simulate_pure_jump(spec, base_grid, master_seed, i);
    });
    return fe;
}

}  // namespace jumpbsde
