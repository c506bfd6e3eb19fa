#pragma once

#include <cmath>
#include <vector>

#include "jumpbsde/grid.hpp"
#include "jumpbsde/kernel.hpp"
#include "jumpbsde/measure.hpp"
#include "jumpbsde/rng.hpp"

namespace jumpbsde::testing {

struct CFixture {
    PredictableField w;
    MeasureRealization mu;
    CompensatorSpec nu;
    GridPtr grid;
};

// Deterministic randomized fixture: a polynomial field, a rate that switches
// level mid-horizon, and up to three compensator atoms with masses in (0, 1],
// every third fixture carrying a full-mass atom. Entirely a function of
// `index`, so failures replay.
inline CFixture make_c_fixture(std::uint64_t index) {
    CounterRng rng(0xF1A57EEDull, index, Stream::scratch);
    CFixture fx;
    const int steps = 8 + static_cast<int>(rng.next_u64() % 9);
    fx.grid = make_uniform_grid(1.0, static_cast<std::size_t>(steps));

    // field: a + b e + c s e + d e^2, coefficients in [-1, 1], with an
    // optional level switch at s = 0.5 exercising the one-sided evaluation
    const double a = 2.0 * rng.uniform01() - 1.0;
    const double b = 2.0 * rng.uniform01() - 1.0;
    const double c = 2.0 * rng.uniform01() - 1.0;
    const double d = 2.0 * rng.uniform01() - 1.0;
    const bool switches = (rng.next_u64() % 2) == 0;
    fx.w.eval = [=](double s, double e, Side side) {
        double base = a + b * e + c * s * e + d * e * e;
        if (switches) {
            const bool late = s > 0.5 || (s == 0.5 && side == Side::right);
            if (late) base += 0.25 * e;
        }
        return base;
    };

    // rate: discrete kernel, one or two marks, level switch at 0.5
    const int n_marks = 1 + static_cast<int>(rng.next_u64() % 2);
    std::vector<double> marks, masses_lo, masses_hi;
    for (int i = 0; i < n_marks; ++i) {
        marks.push_back(4.0 * rng.uniform01() - 2.0);
        masses_lo.push_back(1.5 * rng.uniform01());
        masses_hi.push_back(1.5 * rng.uniform01());
    }
    fx.nu.rate = [=](double s, Side side) {
        const bool late = s > 0.5 || (s == 0.5 && side == Side::right);
        return MarkKernel::discrete(marks, late ? masses_hi : masses_lo);
    };
    fx.nu.total_mass_bound = 3.0;

    // compensator atoms; masses in (0, 1], occasionally exactly 1
    const int n_atoms = static_cast<int>(rng.next_u64() % 4);
    double t_prev = 0.1;
    for (int i = 0; i < n_atoms; ++i) {
        CompensatorAtom atom;
        atom.time = t_prev + 0.15 + 0.5 * rng.uniform01() * (1.0 - t_prev - 0.2);
        t_prev = atom.time;
        double mass = (index % 3 == 0 && i == 0) ? 1.0 : 0.2 + 0.8 * rng.uniform01();
        if (mass > 1.0) mass = 1.0;
        const double mark1 = 4.0 * rng.uniform01() - 2.0;
        const double mark2 = 4.0 * rng.uniform01() - 2.0;
        const double split = rng.uniform01();
        atom.kernel = MarkKernel::discrete({mark1, mark2}, {mass * split, mass * (1.0 - split)});
        fx.nu.atoms.push_back(atom);
        // realize the atom as a mu event with probability ~ its mass
        if (rng.uniform01() <= mass) {
            const double u = rng.uniform01();
            fx.mu.atoms.push_back({atom.time, atom.kernel.sample(u)});
        }
    }
    // a couple of totally inaccessible mu atoms off the nu-atom times
    const int n_loose = static_cast<int>(rng.next_u64() % 3);
    for (int i = 0; i < n_loose; ++i) {
        double t = 0.05 + 0.9 * rng.uniform01();
        bool clash = false;
        for (const auto& a2 : fx.nu.atoms)
            if (std::abs(a2.time - t) < 0.02) clash = true;
        for (const auto& m2 : fx.mu.atoms)
            if (std::abs(m2.time - t) < 0.02) clash = true;
        if (clash) continue;
        fx.mu.atoms.push_back({t, 4.0 * rng.uniform01() - 2.0});
    }
    std::sort(fx.mu.atoms.begin(), fx.mu.atoms.end(),
              [](const MeasureAtom& x, const MeasureAtom& y) { return x.time < y.time; });
    return fx;
}

}  // namespace jumpbsde::testing
