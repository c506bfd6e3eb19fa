#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jumpbsde/identify.hpp"

namespace jumpbsde {

namespace {

constexpr double kUnitMassTol = 1e-9;

// v-increment field along the model's jump map: left reads respect the
// forced-time masking of gamma_tilde, right reads rebuild the increment from
// the current state so rate integrands stay right-continuous
PredictableField v_increment_field(const ValueFunction& v, const ForwardRealization& fr) {
    if (!fr.path || !fr.gamma_tilde)
        throw std::invalid_argument("identify: realization lacks path or gamma_tilde");
    auto path = fr.path;
    auto gt = fr.gamma_tilde;
    auto jm = fr.jump_map;
    auto vv = v.v;
    PredictableField w;
    w.eval = [path, gt, jm, vv](double s, double e, Side side) {
        const double x = state_at_side(*path, s, side);
        const double inc = side == Side::left ? gt(s, e) : (jm ? jm(x, e) : gt(s, e));
        return vv(s, x + inc) - vv(s, x);
    };
    return w;
}

}  // namespace

double ValueFunction::grad(double t, double x, double h) const {
    if (dx) return dx(t, x);
    return (v(t, x + h) - v(t, x - h)) / (2.0 * h);
}

ZIdentificationReport identify_z(const ValueFunction& v, const BsdeSolution& solution,
                                 const ForwardEnsemble& ensemble,
                                 const std::function<double(double, double)>& bracket_ratio,
                                 double tolerance) {
    if (!v.v || !bracket_ratio) throw std::invalid_argument("identify_z: missing field");
    if (solution.z_paths.size() != ensemble.paths.size())
        throw std::invalid_argument("identify_z: solution has no z component for this ensemble");
    const TimeGrid& base = *solution.grid;

    ZIdentificationReport rep;
    double sq = 0.0;
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
        const CadlagPath& p = *ensemble.paths[i].path;
        for (std::size_t k = 0; k + 1 < base.size(); ++k) {
            const double t = base[k];
            const double x = p.value_at(t);
            const double target = v.grad(t, x) * bracket_ratio(t, x);
            const double d = solution.z_paths[i][k] - target;
            sq += d * d;
            rep.max_abs = std::max(rep.max_abs, std::abs(d));
            ++rep.n_samples;
        }
    }
    if (rep.n_samples > 0) rep.rmse = std::sqrt(sq / static_cast<double>(rep.n_samples));
    rep.pass = rep.n_samples > 0 && rep.rmse <= tolerance;
    return rep;
}

HField compute_h(const std::function<double(double, double, double)>& u, const ValueFunction& v,
                 const ForwardRealization& realization) {
    if (!u || !v.v) throw std::invalid_argument("compute_h: missing field");
    const PredictableField dv = v_increment_field(v, realization);
    auto path = realization.path;
    auto uf = u;
    HField out;
    out.field.eval = [path, uf, dv](double s, double e, Side side) {
        return uf(s, state_at_side(*path, s, side), e) - dv(s, e, side);
    };
    out.at_atoms.reserve(realization.mu.atoms.size());
    for (const MeasureAtom& a : realization.mu.atoms) {
        out.at_atoms.push_back(out.field(a.time, a.mark, Side::left));
        out.atom_times.push_back(a.time);
    }
    return out;
}

VanishingReport verify_vanishing(const std::function<double(double, double, double)>& u,
                                 const ValueFunction& v, const ForwardEnsemble& ensemble,
                                 double g2_tolerance) {
    if (ensemble.paths.empty()) throw std::invalid_argument("verify_vanishing: empty ensemble");
    VanishingReport rep;
    double term_sq = 0.0;
    for (const ForwardRealization& fr : ensemble.paths) {
        const HField h = compute_h(u, v, fr);
        const CRoute c = c_of_w(h.field, fr.mu, fr.nu, fr.path->grid_ptr());
        rep.g2_of_h += c.direct.values.back();
        const CadlagPath ci = compensated_integral(h.field, fr.mu, fr.nu, fr.path->grid_ptr());
        const double term = ci.values().back();
        rep.terminal_mean += term;
        term_sq += term * term;
    }
    const double n = static_cast<double>(ensemble.paths.size());
    rep.g2_of_h /= n;
    rep.terminal_mean /= n;
    if (ensemble.paths.size() > 1) {
        const double var = (term_sq - n * rep.terminal_mean * rep.terminal_mean) / (n - 1.0);
        rep.terminal_std_error = std::sqrt(std::max(var, 0.0) / n);
    }
    rep.pass = rep.g2_of_h <= g2_tolerance &&
               std::abs(rep.terminal_mean) <= 3.0 * rep.terminal_std_error + 1e-12;
    return rep;
}

KDecompositionReport k_decomposition(const std::function<double(double, double, double)>& u,
                                     const ValueFunction& v, const ForwardEnsemble& ensemble) {
    if (ensemble.paths.empty()) throw std::invalid_argument("k_decomposition: empty ensemble");
    KDecompositionReport rep;
    double off_total = 0.0;
    for (const ForwardRealization& fr : ensemble.paths) {
        const HField h = compute_h(u, v, fr);
        const TimeGrid& g = fr.path->grid();
        auto h_sq = [&](double s, double e, Side side) {
            const double w = h.field(s, e, side);
            return w * w;
        };
        double off = 0.0;
        if (fr.nu.has_rate()) off += fr.nu.rate_integral(g, g[0], g[g.size() - 1], h_sq);
        for (const CompensatorAtom& atom : fr.nu.atoms) {
            const double m = atom.kernel.mass();
            if (std::abs(m - 1.0) <= kUnitMassTol) {
                const double l =
                    atom.kernel.integrate([&](double e) { return h.field(atom.time, e, Side::left); }) /
                    m;
                rep.k_times.push_back(atom.time);
                rep.l_fit.push_back(l);
                if (atom.kernel.is_discrete()) {
                    for (const double mark : atom.kernel.marks())
                        rep.on_k_residual =
                            std::max(rep.on_k_residual,
                                     std::abs(h.field(atom.time, mark, Side::left) - l));
                } else if (const MeasureAtom* realized = fr.mu.atom_at(atom.time)) {
                    rep.on_k_residual =
                        std::max(rep.on_k_residual,
                                 std::abs(h.field(atom.time, realized->mark, Side::left) - l));
                }
            } else {
                off += atom.kernel.integrate(
                    [&](double e) { return h_sq(atom.time, e, Side::left); });
            }
        }
        off_total += off;
    }
    rep.off_k_l2 = off_total / static_cast<double>(ensemble.paths.size());
    return rep;
}

ChainRuleReport chain_rule_remainder(const ValueFunction& v, const ForwardEnsemble& ensemble,
                                     bool include_diffusion) {
    if (!v.v) throw std::invalid_argument("chain_rule_remainder: missing value function");
    if (ensemble.paths.empty())
        throw std::invalid_argument("chain_rule_remainder: empty ensemble");
    const GridPtr base = ensemble.base_grid;

    ChainRuleReport rep;
    PathEnsemble a_ens, n_ens;
    a_ens.base_grid = base;
    n_ens.base_grid = base;
    double term_sq = 0.0;
    for (const ForwardRealization& fr : ensemble.paths) {
        if (!fr.x_mart)
            throw std::invalid_argument("chain_rule_remainder: realization lacks x_mart");
        const CadlagPath& p = *fr.path;
        const TimeGrid& g = p.grid();

        const PredictableField wv = v_increment_field(v, fr);
        const CadlagPath ci = compensated_integral(wv, fr.mu, fr.nu, p.grid_ptr());

        std::vector<double> diff_cum(g.size(), 0.0);
        if (include_diffusion && !fr.xc_increments.empty())
            for (std::size_t j = 0; j + 1 < g.size(); ++j)
                diff_cum[j + 1] = diff_cum[j] + v.grad(g[j], p.value(j)) * fr.xc_increments[j];

        const double v0 = v.v(g[0], p.value(0));
        std::vector<double> a_vals(base->size());
        for (std::size_t k = 0; k < base->size(); ++k) {
            const double t = (*base)[k];
            const auto j = g.index_of(t);
            if (!j) throw std::invalid_argument("chain_rule_remainder: grid does not refine base");
            a_vals[k] = v.v(t, p.value(*j)) - v0 - diff_cum[*j] - ci.value_at(t);
        }
        const double term = a_vals.back();
        rep.terminal_mean += term;
        term_sq += term * term;
        a_ens.paths.emplace_back(base, a_vals, std::vector<Jump>{});
        n_ens.paths.emplace_back(base, fr.x_mart->values_on(*base), std::vector<Jump>{});
        a_ens.seeds.push_back(fr.seed);
        n_ens.seeds.push_back(fr.seed);
        rep.a_paths.emplace_back(base, std::move(a_vals), std::vector<Jump>{});
    }
    const double n = static_cast<double>(ensemble.paths.size());
    rep.terminal_mean /= n;
    if (ensemble.paths.size() > 1) {
        const double var = (term_sq - n * rep.terminal_mean * rep.terminal_mean) / (n - 1.0);
        rep.terminal_std_error = std::sqrt(std::max(var, 0.0) / n);
    }
    rep.orthogonality = orthogonality_test(a_ens, n_ens);
    return rep;
}

}  // namespace jumpbsde
