#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "jumpbsde/bsde.hpp"
#include "jumpbsde/parallel.hpp"

namespace jumpbsde {

namespace {

constexpr double kUnitMassTol = 1e-9;

// index k with base[k] < t <= base[k+1]
std::size_t interval_of(const TimeGrid& base, double t) {
    std::size_t k = base.floor_index(t);
    if (base.index_of(t).has_value() && k > 0) --k;
    return std::min(k, base.size() - 2);
}

bool is_forced(const ForwardRealization& fr, double s) {
    const CompensatorAtom* atom = fr.nu.atom_at(s);
    return atom != nullptr && std::abs(atom->kernel.mass() - 1.0) <= kUnitMassTol;
}

// damped iteration for y = base + f(s, x, y, z, u) * da
double implicit_atom_value(const DriverSpec& driver, const SolverOptions& options, double s,
                           double x_pre, double base, double z, double u_agg, double da) {
    if (driver.lipschitz_y > 0.0 &&
        2.0 * driver.lipschitz_y * driver.lipschitz_y * da * da > 1.0 - 1e-6)
        throw std::runtime_error("bsde: atom step violates the contraction condition");
    double y = base;
    for (int it = 0; it < options.fixed_point_max_iter; ++it) {
        const double next = 0.5 * (y + base + driver.f(s, x_pre, y, z, u_agg) * da);
        if (std::abs(next - y) <= options.fixed_point_tol) return next;
        y = next;
    }
    throw std::runtime_error("bsde: implicit atom step did not converge");
}

std::function<double(double)> wrap_fit(const Basis& basis, const LsFit& fit) {
    return [basis, fit](double x) { return fit(basis.eval(x)); };
}

std::function<double(double, double)> wrap_fit2(const Basis2& basis, const LsFit& fit) {
    return [basis, fit](double x, double e) { return fit(basis.eval(x, e)); };
}

}  // namespace

BsdeSolution solve_regression(const ForwardEnsemble& ensemble, const DriverSpec& driver,
                              const SolverOptions& options) {
    const std::size_t n_paths = ensemble.paths.size();
    if (n_paths < 100) throw std::invalid_argument("bsde: need at least 100 paths");
    if (!driver.terminal) throw std::invalid_argument("bsde: driver needs a terminal condition");
    if (!driver.f) throw std::invalid_argument("bsde: driver needs a generator");
    const TimeGrid& base = *ensemble.base_grid;
    const std::size_t n_pts = base.size();

    const Basis state_basis = options.state_values.empty()
                                  ? polynomial_basis(options.state_degree)
                                  : indicator_basis(options.state_values);
    Basis2 jump_basis;
    jump_basis.state = state_basis;
    jump_basis.mark = polynomial_basis(options.mark_degree);

    bool has_diffusion = false;
    for (const auto& fr : ensemble.paths) {
        if (!fr.path) throw std::invalid_argument("bsde: ensemble has an empty path");
        if (!fr.brownian_increments.empty()) has_diffusion = true;
    }

    // per-path indices of the base points inside each refined grid
    std::vector<std::vector<std::size_t>> base_index(n_paths);
    parallel_chunks(n_paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const TimeGrid& g = ensemble.paths[i].path->grid();
            base_index[i].resize(n_pts);
            for (std::size_t k = 0; k < n_pts; ++k) {
                const auto idx = g.index_of(base[k]);
                if (!idx) throw std::invalid_argument("bsde: path grid misses a base point");
                base_index[i][k] = *idx;
            }
        }
    });

    BsdeSolution sol;
    sol.grid = ensemble.base_grid;
    sol.n_paths = static_cast<int>(n_paths);
    sol.slice_values.resize(n_pts);
    sol.slice_z.assign(n_pts - 1, [](double) { return 0.0; });
    sol.slice_u.assign(n_pts - 1, [](double, double) { return 0.0; });
    sol.slice_values[n_pts - 1] = driver.terminal;

    std::vector<double> resp(n_paths), state_now(n_paths), state_next(n_paths);
    int deficient_steps = 0;
    std::size_t u_samples_total = 0;
    std::ostringstream diag;

    for (std::size_t k = n_pts - 1; k-- > 0;) {
        const auto& v_next = sol.slice_values[k + 1];
        const double dt_base = base[k + 1] - base[k];
        for (std::size_t i = 0; i < n_paths; ++i) {
            state_now[i] = ensemble.paths[i].path->value(base_index[i][k]);
            state_next[i] = ensemble.paths[i].path->value(base_index[i][k + 1]);
        }
        const Eigen::MatrixXd design = state_basis.design(state_now);

        // z slice from the Brownian-increment regression with the fitted
        // continuation as a control variate
        if (has_diffusion) {
            Eigen::VectorXd target(n_paths);
            for (std::size_t i = 0; i < n_paths; ++i) {
                const ForwardRealization& fr = ensemble.paths[i];
                double dw = 0.0;
                for (std::size_t j = base_index[i][k]; j < base_index[i][k + 1]; ++j)
                    dw += fr.brownian_increments[j];
                target(static_cast<Eigen::Index>(i)) =
                    (v_next(state_next[i]) - v_next(state_now[i])) * dw / dt_base;
            }
            sol.slice_z[k] = wrap_fit(state_basis, least_squares(design, target));
        }

        // u slice from per-atom value increments against the tensor basis
        {
            std::vector<Eigen::VectorXd> rows;
            std::vector<double> dys;
            for (std::size_t i = 0; i < n_paths; ++i) {
                const ForwardRealization& fr = ensemble.paths[i];
                for (const auto& atom : fr.mu.atoms) {
                    if (atom.time <= base[k] + kTimeEps || atom.time > base[k + 1] + kTimeEps)
                        continue;
                    if (is_forced(fr, atom.time)) continue;
                    if (options.u_truncation > 0.0 &&
                        std::abs(fr.path->jump_size_at(atom.time)) < options.u_truncation)
                        continue;
                    const double x_pre = fr.path->pre_value_at(atom.time);
                    const double x_post = fr.path->value_at(atom.time);
                    rows.push_back(jump_basis.eval(x_pre, atom.mark));
                    dys.push_back(v_next(x_post) - v_next(x_pre));
                }
            }
            u_samples_total += rows.size();
            if (rows.size() >= static_cast<std::size_t>(jump_basis.size())) {
                Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), jump_basis.size());
                Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    X.row(static_cast<Eigen::Index>(r)) = rows[r];
                    y(static_cast<Eigen::Index>(r)) = dys[r];
                }
                sol.slice_u[k] = wrap_fit2(jump_basis, least_squares(X, y));
            }
        }

        // pathwise backward responses through the interval's events
        const auto& z_fn = sol.slice_z[k];
        const auto& u_fn = sol.slice_u[k];
        parallel_chunks(n_paths, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const ForwardRealization& fr = ensemble.paths[i];
                const TimeGrid& g = fr.path->grid();
                const std::size_t j_lo = base_index[i][k];
                const std::size_t j_hi = base_index[i][k + 1];
                double r = v_next(fr.path->value(j_hi));
                auto atom_step = [&](std::size_t j) {
                    const double s = g[j];
                    const CompensatorAtom* atom = fr.nu.atom_at(s);
                    if (atom == nullptr) return;
                    const double m = atom->kernel.mass();
                    const double x_pre = fr.path->pre_value_at(s);
                    const bool forced = std::abs(m - 1.0) <= kUnitMassTol;
                    const double u_agg =
                        forced ? 0.0
                               : atom->kernel.integrate(
                                     [&](double e) { return u_fn(x_pre, e); });
                    r = implicit_atom_value(driver, options, s, x_pre, r,
                                            has_diffusion ? z_fn(x_pre) : 0.0, u_agg, m);
                };
                if (driver.clock == DriverClock::compensator) atom_step(j_hi);
                for (std::size_t j = j_hi; j-- > j_lo;) {
                    const double s = g[j];
                    const double x = fr.path->value(j);
                    const double ds = g[j + 1] - s;
                    double u_agg = 0.0;
                    if (fr.nu.has_rate())
                        u_agg = fr.nu.rate(s, Side::right)
                                    .integrate([&](double e) { return u_fn(x, e); });
                    r += driver.f(s, x, v_next(x), has_diffusion ? z_fn(x) : 0.0, u_agg) * ds;
                    if (j > j_lo && driver.clock == DriverClock::compensator) atom_step(j);
                }
                resp[i] = r;
            }
        });

        Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
            resp.data(), static_cast<Eigen::Index>(n_paths));
        const LsFit fit = least_squares(design, y);
        if (fit.dropped_columns > 0) ++deficient_steps;
        sol.slice_values[k] = wrap_fit(state_basis, fit);

        if (k == 0) {
            double mean = 0.0;
            for (const double v : resp) mean += v;
            mean /= static_cast<double>(n_paths);
            double var = 0.0;
            for (const double v : resp) var += (v - mean) * (v - mean);
            sol.y0 = mean;
            sol.y0_std_error =
                std::sqrt(var / (static_cast<double>(n_paths) - 1.0) / static_cast<double>(n_paths));
        }
    }

    // per-path fields evaluated through the fitted slices
    sol.y_paths.reserve(n_paths);
    if (has_diffusion) sol.z_paths.resize(n_paths);
    sol.u_at_atoms.resize(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        const ForwardRealization& fr = ensemble.paths[i];
        const TimeGrid& g = fr.path->grid();
        std::vector<double> yv(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double s = g[j];
            const auto on_base = base.index_of(s);
            const std::size_t slice = on_base ? *on_base : base.floor_index(s) + 1;
            yv[j] = sol.slice_values[slice](fr.path->value(j));
        }
        // Y jumps: at mu atoms the slice difference; at compensator-clock nu
        // atoms the left limit additionally carries the f dA pay, so it is
        // the same implicit fixed point the backward walk solved
        std::vector<double> jump_times;
        for (const auto& jmp : fr.path->jumps()) jump_times.push_back(jmp.time);
        if (driver.clock == DriverClock::compensator)
            for (const auto& atom : fr.nu.atoms) jump_times.push_back(atom.time);
        std::sort(jump_times.begin(), jump_times.end());
        jump_times.erase(std::unique(jump_times.begin(), jump_times.end(),
                                     [](double a, double b) { return std::abs(a - b) <= kTimeEps; }),
                         jump_times.end());
        std::vector<Jump> yjumps;
        for (const double t : jump_times) {
            const auto on_base = base.index_of(t);
            const std::size_t slice = on_base ? *on_base : base.floor_index(t) + 1;
            const double x_pre = fr.path->pre_value_at(t);
            const double y_right = sol.slice_values[slice](fr.path->value_at(t));
            double y_left = sol.slice_values[slice](x_pre);
            const CompensatorAtom* atom = fr.nu.atom_at(t);
            if (driver.clock == DriverClock::compensator && atom != nullptr) {
                const double m = atom->kernel.mass();
                const std::size_t ki = interval_of(base, t);
                const double u_agg = std::abs(m - 1.0) <= kUnitMassTol
                                         ? 0.0
                                         : atom->kernel.integrate([&](double e) {
                                               return sol.slice_u[ki](x_pre, e);
                                           });
                const double zv = has_diffusion ? sol.slice_z[ki](x_pre) : 0.0;
                y_left = implicit_atom_value(driver, options, t, x_pre, y_right, zv, u_agg, m);
            }
            const double size = y_right - y_left;
            if (size != 0.0) yjumps.push_back({t, size});
        }
        sol.y_paths.emplace_back(fr.path->grid_ptr(), yv, yjumps);

        if (has_diffusion) {
            sol.z_paths[i].resize(n_pts - 1);
            for (std::size_t k = 0; k + 1 < n_pts; ++k)
                sol.z_paths[i][k] = sol.slice_z[k](fr.path->value(base_index[i][k]));
        }
        sol.u_at_atoms[i].reserve(fr.mu.atoms.size());
        for (const auto& atom : fr.mu.atoms) {
            if (is_forced(fr, atom.time)) {
                sol.u_at_atoms[i].push_back(0.0);
                continue;
            }
            const std::size_t k = interval_of(base, atom.time);
            sol.u_at_atoms[i].push_back(
                sol.slice_u[k](fr.path->pre_value_at(atom.time), atom.mark));
        }
    }

    diag << "paths=" << n_paths << " steps=" << n_pts - 1 << " basis=" << state_basis.name
         << " u_samples=" << u_samples_total << " rank_deficient_steps=" << deficient_steps;
    sol.diagnostics = diag.str();
    return sol;
}

}  // namespace jumpbsde
