#include <cmath>
#include <sstream>
#include <stdexcept>

#include "jumpbsde/forward.hpp"

namespace jumpbsde {

namespace {

constexpr double kReconcileTol = 1e-12;

const TaggedEvent* tag_at(const std::vector<TaggedEvent>& tags, double t) {
    for (const auto& tag : tags)
        if (std::abs(tag.time - t) <= kTimeEps) return &tag;
    return nullptr;
}

}  // namespace

ReconcileReport reconcile(const ForwardRealization& fr) {
    if (!fr.path || !fr.x_mart || !fr.x_pred)
        throw std::invalid_argument("reconcile: realization is missing a component path");
    const TimeGrid& grid = fr.path->grid();
    if (!fr.x_mart->grid().same_points(grid) || !fr.x_pred->grid().same_points(grid))
        throw std::invalid_argument("reconcile: component paths live on a different grid");

    ReconcileReport rep;
    std::ostringstream detail;
    auto violate = [&](double t, const char* what) {
        ++rep.violations;
        if (rep.violations <= 8) detail << "t=" << t << ": " << what << "; ";
    };

    // the path must be the exact sum of its components at every grid point
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double gap =
            std::abs(fr.path->value(k) - (fr.x_mart->value(k) + fr.x_pred->value(k)));
        rep.max_split_mismatch = std::max(rep.max_split_mismatch, gap);
        if (gap > kReconcileTol) violate(grid[k], "component sum drifts from the path");
    }

    // every event atom must be tagged and must move the right component
    for (const auto& atom : fr.mu.atoms) {
        const double s = atom.time;
        const double dx = fr.path->jump_size_at(s);
        const double dm = fr.x_mart->jump_size_at(s);
        const double dp = fr.x_pred->jump_size_at(s);
        const double gt = fr.gamma_tilde ? fr.gamma_tilde(s, atom.mark) : dx;
        const TaggedEvent* tag = tag_at(fr.tags, s);
        if (tag == nullptr) {
            violate(s, "untagged event atom");
            continue;
        }
        if (tag->tag == EventTag::totally_inaccessible) {
            const double jump_gap = std::abs(dx - gt);
            rep.max_jump_mismatch = std::max(rep.max_jump_mismatch, jump_gap);
            if (jump_gap > kReconcileTol) violate(s, "jump differs from the integrand");
            if (std::abs(dm - dx) > kReconcileTol)
                violate(s, "martingale component misses an accessible-free jump");
            if (dp != 0.0) violate(s, "predictable component jumps at an inaccessible time");
            if (fr.jump_map) {
                const double mapped = fr.jump_map(fr.path->pre_value_at(s), atom.mark);
                const double map_gap = std::abs(mapped - dx);
                rep.max_jump_mismatch = std::max(rep.max_jump_mismatch, map_gap);
                if (map_gap > kReconcileTol) violate(s, "jump map disagrees with the jump");
            }
        } else {
            if (gt != 0.0) violate(s, "integrand must vanish at forced times");
            if (dm != 0.0) violate(s, "martingale component jumps at a forced time");
            if (std::abs(dp - dx) > kReconcileTol)
                violate(s, "predictable component misses a forced jump");
            const CompensatorAtom* nu_atom = fr.nu.atom_at(s);
            if (nu_atom == nullptr) {
                violate(s, "forced event without a compensator atom");
            } else {
                const double mass_gap = std::abs(nu_atom->kernel.mass() - 1.0);
                double mark_gap = std::abs(nu_atom->kernel.mean_of([&](double e) {
                                      return e - atom.mark;
                                  }));
                rep.max_forced_atom_gap =
                    std::max(rep.max_forced_atom_gap, std::max(mass_gap, mark_gap));
                if (mass_gap > kReconcileTol) violate(s, "forced atom mass is not one");
                if (mark_gap > kReconcileTol) violate(s, "forced atom law misses the mark");
            }
        }
    }

    // full-mass compensator atoms must be realized
    for (const auto& nu_atom : fr.nu.atoms) {
        if (std::abs(nu_atom.kernel.mass() - 1.0) > kReconcileTol) continue;
        if (!fr.mu.has_atom_at(nu_atom.time))
            violate(nu_atom.time, "full-mass compensator atom was not realized");
    }

    // path jumps must be announced by event atoms; component jumps by tags
    for (const auto& j : fr.path->jumps())
        if (!fr.mu.has_atom_at(j.time)) violate(j.time, "path jump without an event atom");
    for (const auto& j : fr.x_mart->jumps()) {
        const TaggedEvent* tag = tag_at(fr.tags, j.time);
        if (tag == nullptr || tag->tag != EventTag::totally_inaccessible)
            violate(j.time, "martingale component jump at a non-inaccessible time");
    }
    for (const auto& j : fr.x_pred->jumps()) {
        const TaggedEvent* tag = tag_at(fr.tags, j.time);
        if (tag == nullptr || tag->tag != EventTag::predictable)
            violate(j.time, "predictable component jump at an unforced time");
    }

    // the forced-event counter must tick exactly at predictable tags
    if (!fr.pstar.empty()) {
        if (fr.pstar.size() != grid.size()) {
            violate(0.0, "forced-event counter length mismatch");
        } else {
            for (std::size_t k = 1; k < grid.size(); ++k) {
                const double inc = fr.pstar[k] - fr.pstar[k - 1];
                const TaggedEvent* tag = tag_at(fr.tags, grid[k]);
                const bool forced = tag != nullptr && tag->tag == EventTag::predictable;
                if (std::abs(inc - (forced ? 1.0 : 0.0)) > kReconcileTol)
                    violate(grid[k], "forced-event counter increment mismatch");
            }
        }
    }

    rep.pass = rep.violations == 0;
    rep.detail = detail.str();
    return rep;
}

}  // namespace jumpbsde
