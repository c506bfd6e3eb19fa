#include <cmath>
#include <iostream>
#include <stdexcept>

#include "jumpbsde/forward.hpp"
#include "jumpbsde/parallel.hpp"
#include "jumpbsde/rng.hpp"

namespace jumpbsde {

namespace {

void spot_check_gamma(const JumpDiffusionSpec& spec) {
    if (spec.lipschitz_bound <= 0.0 || spec.intensity.is_zero()) return;
    const double K = spec.lipschitz_bound;
    CounterRng rng(0x9A77A5u, 0, Stream::scratch);
    for (int i = 0; i < 16; ++i) {
        const double x1 = 6.0 * rng.uniform01() - 3.0;
        const double x2 = 6.0 * rng.uniform01() - 3.0;
        const double e = spec.intensity.sample(rng.uniform01());
        const double cap = K * std::min(1.0, std::abs(e));
        if (std::abs(spec.gamma(x1, e)) > cap + 1e-9)
            throw std::invalid_argument("jump diffusion: gamma growth bound violated");
        if (std::abs(spec.gamma(x1, e) - spec.gamma(x2, e)) > cap * std::abs(x1 - x2) + 1e-9)
            throw std::invalid_argument("jump diffusion: gamma Lipschitz bound violated");
    }
}

}  // namespace

double jd_euler_increment(const JumpDiffusionSpec& spec, double x, double dt, double dw) {
    double inc = spec.drift(x) * dt + spec.sigma(x) * dw;
    if (!spec.intensity.is_zero())
        inc -= dt * spec.intensity.integrate([&](double e) { return spec.gamma(x, e); });
    return inc;
}

JdEventSkeleton jd_event_skeleton(const JumpDiffusionSpec& spec, uint64_t master_seed,
                                  uint64_t path_index) {
    JdEventSkeleton sk;
    const double total = spec.intensity.mass();
    if (total <= 0.0) return sk;
    CounterRng clock(master_seed, path_index, Stream::event_times);
    CounterRng marks(master_seed, path_index, Stream::marks);
    double t = clock.exponential(total);
    while (t < spec.horizon - kTimeEps) {
        if (sk.times.empty() || t > sk.times.back() + kTimeEps) {
            sk.times.push_back(t);
            sk.marks.push_back(spec.intensity.sample(marks.uniform01()));
        }
        t += clock.exponential(total);
    }
    return sk;
}

ForwardRealization simulate_jump_diffusion(const JumpDiffusionSpec& spec, const GridPtr& base_grid,
                                           uint64_t master_seed, uint64_t path_index) {
    JumpDiffusionSpec model = spec;
    if (spec.truncation_eps > 0.0) {
        double dropped = 0.0;
        model.intensity = spec.intensity.truncated(spec.truncation_eps, &dropped);
        if (path_index == 0 && dropped > 0.0)
            std::cerr << "jump diffusion: truncation dropped intensity mass " << dropped << "\n";
    }
    spot_check_gamma(model);
    if (std::abs(base_grid->horizon() - model.horizon) > kTimeEps)
        throw std::invalid_argument("jump diffusion: grid horizon differs from spec horizon");
    if (path_index == 0) {
        double max_dt = 0.0;
        for (std::size_t k = 1; k < base_grid->size(); ++k)
            max_dt = std::max(max_dt, (*base_grid)[k] - (*base_grid)[k - 1]);
        if (model.intensity.mass() * max_dt >= 0.1)
            std::cerr << "jump diffusion: intensity * step = " << model.intensity.mass() * max_dt
                      << " >= 0.1; refine the grid\n";
    }

    const JdEventSkeleton sk = jd_event_skeleton(model, master_seed, path_index);
    GridPtr grid = std::make_shared<const TimeGrid>(base_grid->refined_with(sk.times));

    ForwardRealization fr;
    fr.seed = path_index;
    fr.mu.atoms.reserve(sk.times.size());
    for (std::size_t i = 0; i < sk.times.size(); ++i) {
        const auto idx = grid->index_of(sk.times[i]);
        fr.mu.atoms.push_back({(*grid)[*idx], sk.marks[i]});
        fr.tags.push_back({(*grid)[*idx], EventTag::totally_inaccessible});
    }

    // martingale-jump component xi and its complement xp accumulate
    // separately; the path is their exact sum at every grid point
    std::vector<double> xi(grid->size(), 0.0), xp(grid->size(), 0.0), values(grid->size());
    xp[0] = model.x0;
    values[0] = model.x0;
    std::vector<Jump> jumps;
    CounterRng brownian(master_seed, path_index, Stream::brownian);
    fr.brownian_increments.resize(grid->intervals());
    fr.xc_increments.resize(grid->intervals());
    std::size_t next_atom = 0;
    for (std::size_t k = 0; k + 1 < grid->size(); ++k) {
        const double t1 = (*grid)[k + 1];
        const double dt = t1 - (*grid)[k];
        const double x = values[k];
        const double dw = std::sqrt(dt) * brownian.normal();
        fr.brownian_increments[k] = dw;
        fr.xc_increments[k] = model.sigma(x) * dw;
        const double dxp = model.drift(x) * dt + model.sigma(x) * dw;
        double dxi = 0.0;
        if (!model.intensity.is_zero())
            dxi = -dt * model.intensity.integrate([&](double e) { return model.gamma(x, e); });
        double jump = 0.0;
        if (next_atom < fr.mu.atoms.size() &&
            std::abs(fr.mu.atoms[next_atom].time - t1) <= kTimeEps) {
            const double x_pre = (xi[k] + dxi) + (xp[k] + dxp);
            jump = model.gamma(x_pre, fr.mu.atoms[next_atom].mark);
            ++next_atom;
        }
        xi[k + 1] = xi[k] + dxi + jump;
        xp[k + 1] = xp[k] + dxp;
        values[k + 1] = xi[k + 1] + xp[k + 1];
        if (!std::isfinite(values[k + 1]))
            throw std::runtime_error("jump diffusion: state became non-finite");
        if (jump != 0.0) jumps.push_back({t1, jump});
    }

    fr.path = std::make_shared<const CadlagPath>(grid, values, jumps);
    fr.x_mart = std::make_shared<const CadlagPath>(grid, xi, jumps);
    fr.x_pred = std::make_shared<const CadlagPath>(grid, xp, std::vector<Jump>{});
    const MarkKernel rate_kernel = model.intensity;
    fr.nu.rate = [rate_kernel](double, Side) { return rate_kernel; };
    fr.nu.total_mass_bound = rate_kernel.mass();
    fr.jump_map = model.gamma;
    auto gamma = model.gamma;
    auto path = fr.path;
    fr.gamma_tilde = [gamma, path](double s, double e) { return gamma(path->pre_value_at(s), e); };
    return fr;
}

ForwardEnsemble simulate_ensemble(const JumpDiffusionSpec& spec, const GridPtr& base_grid,
                                  uint64_t master_seed, int n_paths) {
    ForwardEnsemble fe;
    fe.base_grid = base_grid;
    fe.master_seed = master_seed;
    fe.paths.resize(static_cast<std::size_t>(n_paths));
    parallel_chunks(static_cast<std::size_t>(n_paths), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            fe.paths[i] = simulate_jump_diffusion(spec, base_grid, master_seed, i);
    });
    return fe;
}

PathEnsemble to_path_ensemble(const ForwardEnsemble& fe) {
    PathEnsemble pe;
    pe.base_grid = fe.base_grid;
    for (const ForwardRealization& fr : fe.paths) {
        pe.paths.push_back(*fr.path);
        pe.seeds.push_back(fr.seed);
    }
    return pe;
}

}  // namespace jumpbsde
