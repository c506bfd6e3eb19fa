#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jumpbsde/bsde.hpp"
#include "jumpbsde/parallel.hpp"

namespace jumpbsde {

namespace {

constexpr double kUnitMassTol = 1e-9;

// u slice index for time s: interval (t_k, t_{k+1}] maps to k, except a
// right-sided read exactly on a base point belongs to the interval it opens
std::size_t u_slice_index(const TimeGrid& base, double s, Side side) {
    std::size_t k = base.floor_index(s);
    if (side == Side::left && base.index_of(s).has_value() && k > 0) --k;
    return std::min(k, base.size() - 2);
}

// max_t |Y_t - Y_T - int_t^T f dclock + int_t^T Z dW + int_(t,T] U d(mu-nu)|
// via forward accumulators on the path's own grid
double path_residual(const ForwardRealization& fr, const DriverSpec& driver,
                     const std::vector<double>& y_vals,
                     const std::function<double(double)>& y_left,
                     const std::vector<double>& z_step, const PredictableField& u_field) {
    const TimeGrid& g = fr.path->grid();
    const std::size_t n = g.size();
    if (y_vals.size() != n) throw std::invalid_argument("residual: y/path grid mismatch");
    if (!z_step.empty() && z_step.size() != n - 1)
        throw std::invalid_argument("residual: z/path step mismatch");

    const CadlagPath ci = compensated_integral(u_field, fr.mu, fr.nu, fr.path->grid_ptr());

    std::vector<double> F(n, 0.0), ZW(n, 0.0), CI(n, 0.0);
    CI[0] = ci.value_at(g[0]);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double s = g[j];
        const double t_next = g[j + 1];
        const double x = fr.path->value(j);
        const double z = z_step.empty() ? 0.0 : z_step[j];
        double u_agg = 0.0;
        if (fr.nu.has_rate())
            u_agg = fr.nu.rate(s, Side::right).integrate([&](double e) {
                return u_field(s, e, Side::right);
            });
        double df = driver.f(s, x, y_vals[j], z, u_agg) * (t_next - s);
        if (driver.clock == DriverClock::compensator) {
            if (const CompensatorAtom* atom = fr.nu.atom_at(t_next)) {
                const double m = atom->kernel.mass();
                const double x_pre = fr.path->pre_value_at(t_next);
                const double ua = std::abs(m - 1.0) <= kUnitMassTol
                                      ? 0.0
                                      : atom->kernel.integrate([&](double e) {
                                            return u_field(t_next, e, Side::left);
                                        });
                df += driver.f(t_next, x_pre, y_left(t_next), z, ua) * m;
            }
        }
        F[j + 1] = F[j] + df;
        ZW[j + 1] = ZW[j] + (z_step.empty() ? 0.0 : z * fr.brownian_increments[j]);
        CI[j + 1] = ci.value_at(t_next);
    }

    const std::size_t last = n - 1;
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double resid = y_vals[j] - y_vals[last] - (F[last] - F[j]) + (ZW[last] - ZW[j]) +
                             (CI[last] - CI[j]);
        worst = std::max(worst, std::abs(resid));
    }
    return worst;
}

ResidualReport collect(const ForwardEnsemble& ensemble,
                       const std::function<double(std::size_t)>& per_path) {
    ResidualReport rep;
    rep.per_path_max.assign(ensemble.paths.size(), 0.0);
    parallel_chunks(ensemble.paths.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) rep.per_path_max[i] = per_path(i);
    });
    for (const double v : rep.per_path_max) {
        rep.ensemble_mean += v;
        rep.ensemble_max = std::max(rep.ensemble_max, v);
    }
    if (!rep.per_path_max.empty())
        rep.ensemble_mean /= static_cast<double>(rep.per_path_max.size());
    return rep;
}

}  // namespace

ResidualReport residual_check(const BsdeSolution& solution, const ForwardEnsemble& ensemble,
                              const DriverSpec& driver) {
    if (solution.y_paths.size() != ensemble.paths.size())
        throw std::invalid_argument("residual: solution/ensemble path count mismatch");
    const TimeGrid& base = *solution.grid;
    return collect(ensemble, [&](std::size_t i) {
        const ForwardRealization& fr = ensemble.paths[i];
        const TimeGrid& g = fr.path->grid();
        const CadlagPath& yp = solution.y_paths[i];
        if (!yp.grid().same_points(g))
            throw std::invalid_argument("residual: y path grid differs from the forward grid");

        std::vector<double> y_vals(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) y_vals[j] = yp.value(j);

        std::vector<double> z_step;
        if (!solution.z_paths.empty() && !fr.brownian_increments.empty()) {
            z_step.resize(g.size() - 1);
            for (std::size_t j = 0; j + 1 < g.size(); ++j)
                z_step[j] = solution.z_paths[i][std::min(base.floor_index(g[j]),
                                                         base.size() - 2)];
        }

        PredictableField u_field;
        u_field.eval = [&](double s, double e, Side side) {
            const std::size_t k = u_slice_index(base, s, side);
            return solution.slice_u[k](state_at_side(*fr.path, s, side), e);
        };
        auto y_left = [&](double t) { return yp.left_limit_at(t); };
        return path_residual(fr, driver, y_vals, y_left, z_step, u_field);
    });
}

ResidualReport residual_check_fields(const std::function<double(double, double)>& y,
                                     const std::function<double(double, double)>& z,
                                     const std::function<double(double, double, double)>& u,
                                     const ForwardEnsemble& ensemble, const DriverSpec& driver) {
    if (!y || !u) throw std::invalid_argument("residual: need y and u fields");
    return collect(ensemble, [&](std::size_t i) {
        const ForwardRealization& fr = ensemble.paths[i];
        const TimeGrid& g = fr.path->grid();

        std::vector<double> y_vals(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) y_vals[j] = y(g[j], fr.path->value(j));

        std::vector<double> z_step;
        if (z && !fr.brownian_increments.empty()) {
            z_step.resize(g.size() - 1);
            for (std::size_t j = 0; j + 1 < g.size(); ++j)
                z_step[j] = z(g[j], fr.path->value(j));
        }

        PredictableField u_field;
        u_field.eval = [&](double s, double e, Side side) {
            return u(s, state_at_side(*fr.path, s, side), e);
        };
        auto y_left = [&](double t) { return y(t, fr.path->pre_value_at(t)); };
        return path_residual(fr, driver, y_vals, y_left, z_step, u_field);
    });
}

}  // namespace jumpbsde
