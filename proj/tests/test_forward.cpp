#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "jumpbsde/forward.hpp"
#include "jumpbsde/measure.hpp"
#include "jumpbsde/oracle.hpp"
#include "jumpbsde/quadrature.hpp"
#include "jumpbsde/rng.hpp"

using namespace jumpbsde;

namespace {

// one-sample Kolmogorov-Smirnov distance against Exp(rate)
double ks_distance_exponential(std::vector<double> sample, double rate) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = 1.0 - std::exp(-rate * sample[i]);
        d = std::max(d, std::max(f - i / n, (i + 1) / n - f));
    }
    return d;
}

struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
};

MeanStderr summarize(const std::vector<double>& xs) {
    MeanStderr ms;
    const double n = static_cast<double>(xs.size());
    for (const double x : xs) ms.mean += x;
    ms.mean /= n;
    double var = 0.0;
    for (const double x : xs) var += (x - ms.mean) * (x - ms.mean);
    ms.std_error = std::sqrt(var / (n - 1.0) / n);
    return ms;
}

JumpDiffusionSpec compensated_poisson_spec() {
    JumpDiffusionSpec spec;
    spec.x0 = 2.0;
    spec.drift = [](double) { return 0.0; };
    spec.sigma = [](double) { return 0.0; };
    spec.gamma = [](double, double e) { return e; };
    spec.intensity = MarkKernel::point(1.0, 1.0);
    spec.horizon = 1.0;
    spec.lipschitz_bound = 1.5;
    return spec;
}

PureJumpSpec two_state_spec(double q01, double q10) {
    PureJumpSpec spec;
    spec.x0 = 0.2;
    spec.rate_kernel = [q01, q10](double, double x) {
        return std::abs(x - 0.2) < 1e-9 ? MarkKernel::point(0.8, q01)
                                        : MarkKernel::point(0.2, q10);
    };
    spec.rate_bound = std::max(q01, q10);
    spec.horizon = 1.0;
    return spec;
}

}  // namespace

TEST_CASE("euler scheme is reproduced bit for bit when jumps are absent") {
    JumpDiffusionSpec spec;
    spec.x0 = 0.7;
    spec.drift = [](double x) { return 0.2 - 0.5 * x; };
    spec.sigma = [](double x) { return 0.3 + 0.1 * x * x; };
    spec.gamma = [](double, double) { return 0.0; };
    spec.horizon = 1.0;
    const GridPtr grid = make_uniform_grid(1.0, 37);
    const ForwardRealization fr = simulate_jump_diffusion(spec, grid, 42, 3);

    CHECK(fr.mu.atoms.empty());
    CHECK(fr.path->jumps().empty());
    CHECK(fr.path->grid().same_points(*grid));

    CounterRng brownian(42, 3, Stream::brownian);
    double x = spec.x0;
    for (std::size_t k = 0; k + 1 < grid->size(); ++k) {
        const double dt = (*grid)[k + 1] - (*grid)[k];
        const double dw = std::sqrt(dt) * brownian.normal();
        const double dxp = spec.drift(x) * dt + spec.sigma(x) * dw;
        x = x + dxp;
        CHECK(fr.path->value(k + 1) == x);
        CHECK(fr.x_mart->value(k + 1) == 0.0);
        CHECK(fr.brownian_increments[k] == dw);
    }
}

TEST_CASE("compensated jumps leave the terminal mean at the start") {
    const JumpDiffusionSpec spec = compensated_poisson_spec();
    const GridPtr grid = make_uniform_grid(1.0, 25);
    const ForwardEnsemble fe = simulate_ensemble(spec, grid, 7, 3000);
    std::vector<double> terminal, counts;
    for (const auto& fr : fe.paths) {
        terminal.push_back(fr.path->terminal());
        counts.push_back(static_cast<double>(fr.mu.atoms.size()));
    }
    const MeanStderr t = summarize(terminal);
    CHECK(std::abs(t.mean - spec.x0) <= 3.0 * t.std_error);
    const MeanStderr c = summarize(counts);  // Poisson(1) event count
    CHECK(std::abs(c.mean - 1.0) <= 3.0 * c.std_error);
}

TEST_CASE("jump-diffusion realizations are quasi-left-continuous and reconcile") {
    const JumpDiffusionSpec spec = compensated_poisson_spec();
    const GridPtr grid = make_uniform_grid(1.0, 20);
    for (uint64_t idx : {0u, 5u, 11u}) {
        const ForwardRealization fr = simulate_jump_diffusion(spec, grid, 99, idx);
        for (const auto& atom : fr.mu.atoms) CHECK(fr.path->grid().contains_time(atom.time));
        const EventSets ev = classify_events(fr.mu, fr.nu);
        CHECK(ev.j_times.empty());
        CHECK(ev.k_times.empty());
        CHECK(ev.quasi_left_continuous);
        CHECK(ev.d_times.size() == fr.mu.atoms.size());
        const ReconcileReport rep = reconcile(fr);
        CHECK(rep.pass);
        CHECK(rep.violations == 0);
        CHECK(rep.max_split_mismatch == 0.0);  // values are assembled as the sum
    }
}

TEST_CASE("event skeleton does not depend on the observation grid") {
    const JumpDiffusionSpec spec = compensated_poisson_spec();
    const JdEventSkeleton a = jd_event_skeleton(spec, 123, 4);
    const JdEventSkeleton b = jd_event_skeleton(spec, 123, 4);
    CHECK(a.times == b.times);
    CHECK(a.marks == b.marks);
    // different path index gives a different skeleton
    const JdEventSkeleton c = jd_event_skeleton(spec, 123, 5);
    CHECK(a.times != c.times);
    // the simulated paths on two grids share the same event times
    const ForwardRealization f1 = simulate_jump_diffusion(spec, make_uniform_grid(1.0, 10), 123, 4);
    const ForwardRealization f2 = simulate_jump_diffusion(spec, make_uniform_grid(1.0, 64), 123, 4);
    REQUIRE(f1.mu.atoms.size() == f2.mu.atoms.size());
    for (std::size_t i = 0; i < f1.mu.atoms.size(); ++i) {
        CHECK(f1.mu.atoms[i].time == f2.mu.atoms[i].time);
        CHECK(f1.mu.atoms[i].mark == f2.mu.atoms[i].mark);
    }
}

TEST_CASE("poisson first arrivals pass a ks test") {
    // first arrivals only: inter-arrival gaps deeper into the window are
    // length-biased by the horizon censoring
    JumpDiffusionSpec spec = compensated_poisson_spec();
    spec.intensity = MarkKernel::point(1.0, 1.5);
    spec.horizon = 8.0;
    std::vector<double> first;
    for (uint64_t idx = 0; idx < 10000; ++idx) {
        const JdEventSkeleton sk = jd_event_skeleton(spec, 31, idx);
        if (!sk.times.empty()) first.push_back(sk.times.front());
    }
    REQUIRE(first.size() > 9990);
    const double d = ks_distance_exponential(first, 1.5);
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(first.size())));
}

TEST_CASE("jump coefficient bounds are spot checked") {
    JumpDiffusionSpec spec = compensated_poisson_spec();
    spec.lipschitz_bound = 1.0;
    spec.gamma = [](double, double e) { return 3.0 * e; };  // growth violated
    const GridPtr grid = make_uniform_grid(1.0, 10);
    CHECK_THROWS_AS(simulate_jump_diffusion(spec, grid, 1, 0), std::invalid_argument);
    spec.gamma = [](double x, double) { return 2.0 * x; };  // Lipschitz violated
    CHECK_THROWS_AS(simulate_jump_diffusion(spec, grid, 1, 0), std::invalid_argument);
}

TEST_CASE("small marks are truncated away from the intensity") {
    JumpDiffusionSpec spec = compensated_poisson_spec();
    spec.intensity = MarkKernel::discrete({0.001, 1.0}, {0.5, 1.0});
    spec.truncation_eps = 0.01;
    const ForwardRealization fr = simulate_jump_diffusion(spec, make_uniform_grid(1.0, 20), 8, 1);
    CHECK(fr.nu.rate(0.3, Side::right).mass() == 1.0);
    for (const auto& atom : fr.mu.atoms) CHECK(atom.mark == 1.0);
}

TEST_CASE("grid and spec horizons must agree") {
    const JumpDiffusionSpec spec = compensated_poisson_spec();
    CHECK_THROWS_AS(simulate_jump_diffusion(spec, make_uniform_grid(2.0, 10), 1, 0),
                    std::invalid_argument);
}

TEST_CASE("two-state chain occupation matches the matrix exponential") {
    // occupation of the high state from the low start: closed form
    // p(s) = (1/3)(1 - exp(-3 s)), integrated over [0, 1]
    const double expect = 1.0 / 3.0 + (std::exp(-3.0) - 1.0) / 9.0;
    GeneratorMatrix gen;
    gen.states = {0.2, 0.8};
    gen.q = Eigen::MatrixXd(2, 2);
    gen.q << -1.0, 1.0, 2.0, -2.0;
    const GaussLegendre& quad = GaussLegendre::order(16);
    const double via_matexp = quad.integrate(
        [&](double s) { return matrix_exponential(gen.q * s)(0, 1); }, 0.0, 1.0);
    REQUIRE(std::abs(via_matexp - expect) < 1e-12);

    const PureJumpSpec spec = two_state_spec(1.0, 2.0);
    const GridPtr grid = make_uniform_grid(1.0, 50);
    const ForwardEnsemble fe = simulate_ensemble(spec, grid, 2024, 10000);
    std::vector<double> occupation;
    for (const auto& fr : fe.paths) {
        const TimeGrid& g = fr.path->grid();
        double occ = 0.0;
        for (std::size_t k = 0; k + 1 < g.size(); ++k)
            if (std::abs(fr.path->value(k) - 0.8) < 1e-9) occ += g[k + 1] - g[k];
        occupation.push_back(occ);
    }
    const MeanStderr ms = summarize(occupation);
    CHECK(std::abs(ms.mean - expect) <= 3.0 * ms.std_error);
    CHECK(ms.std_error < 5e-3);
}

TEST_CASE("thinned first holding times pass a ks test") {
    PureJumpSpec spec;
    spec.x0 = 0.0;
    spec.rate_kernel = [](double, double x) { return MarkKernel::point(x + 1.0, 1.0); };
    spec.rate_bound = 2.5;  // strict envelope keeps the thinning loop honest
    spec.horizon = 10.0;
    std::vector<double> first;
    for (uint64_t idx = 0; idx < 10000; ++idx) {
        const ForwardRealization fr =
            simulate_pure_jump(spec, make_uniform_grid(10.0, 10), 55, idx);
        if (!fr.mu.atoms.empty()) first.push_back(fr.mu.atoms.front().time);
    }
    REQUIRE(first.size() > 9990);
    CHECK(ks_distance_exponential(first, 1.0) <
          1.63 / std::sqrt(static_cast<double>(first.size())));
}

TEST_CASE("pure-jump realizations reconcile and split exactly") {
    const PureJumpSpec spec = two_state_spec(1.0, 2.0);
    const GridPtr grid = make_uniform_grid(1.0, 40);
    std::vector<double> mart_terminal;
    for (uint64_t idx = 0; idx < 400; ++idx) {
        const ForwardRealization fr = simulate_pure_jump(spec, grid, 77, idx);
        if (idx < 8) {
            const ReconcileReport rep = reconcile(fr);
            CHECK(rep.pass);
            CHECK(rep.violations == 0);
            const EventSets ev = classify_events(fr.mu, fr.nu);
            CHECK(ev.quasi_left_continuous);
            for (const auto& atom : fr.mu.atoms) {
                CHECK((std::abs(atom.mark - 0.2) < 1e-9 || std::abs(atom.mark - 0.8) < 1e-9));
                CHECK(std::abs(fr.path->value_at(atom.time) - atom.mark) < 1e-12);
            }
        }
        mart_terminal.push_back(fr.x_mart->terminal());
    }
    // the martingale component starts at zero and must stay centered
    const MeanStderr ms = summarize(mart_terminal);
    CHECK(std::abs(ms.mean) <= 3.0 * ms.std_error);
}

TEST_CASE("pure-jump misconfiguration is rejected") {
    PureJumpSpec spec = two_state_spec(1.0, 2.0);
    spec.rate_bound = 0.0;
    const GridPtr grid = make_uniform_grid(1.0, 10);
    CHECK_THROWS_AS(simulate_pure_jump(spec, grid, 1, 0), std::invalid_argument);
    spec = two_state_spec(1.0, 2.0);
    spec.rate_bound = 0.5;  // true mass 2 exceeds the declared envelope
    CHECK_THROWS(simulate_pure_jump(spec, grid, 1, 0));
    spec = two_state_spec(1.0, 2.0);
    spec.rate_kernel = [](double, double x) { return MarkKernel::point(x, 1.0); };
    spec.rate_bound = 1.0;
    CHECK_THROWS(simulate_pure_jump(spec, grid, 1, 0));
}

TEST_CASE("deterministic boundary cycling produces exactly three forced events") {
    PdmpSpec spec;
    spec.x0 = 0.5;
    spec.flow = [](double) { return 1.0; };
    spec.rate = [](double) { return 0.0; };
    spec.jump_kernel = [](double x) { return MarkKernel::point(0.25 + 0.5 * x, 1.0); };
    spec.boundary_map = [](double) { return 0.5; };
    spec.horizon = 2.0;
    const GridPtr grid = make_uniform_grid(2.0, 100);
    const ForwardRealization fr = simulate_pdmp(spec, grid, 11, 0);

    REQUIRE(fr.mu.atoms.size() == 3);
    REQUIRE(fr.nu.atoms.size() == 3);
    const double expected_times[] = {0.5, 1.0, 1.5};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(fr.mu.atoms[i].time == expected_times[i]);
        CHECK(fr.mu.atoms[i].mark == 0.5);
        CHECK(fr.nu.atoms[i].time == expected_times[i]);
        CHECK(fr.nu.atoms[i].kernel.mass() == 1.0);
        CHECK(fr.nu.atoms[i].kernel.is_point_mass());
        CHECK(fr.nu.atoms[i].kernel.point_mark() == fr.mu.atoms[i].mark);
        CHECK(fr.path->left_limit_at(expected_times[i]) == 1.0);
        CHECK(fr.tags[i].tag == EventTag::predictable);
    }
    CHECK(fr.pstar.back() == 3.0);
    // the fourth approach reaches the boundary exactly at the horizon and
    // does not fire
    CHECK(fr.path->terminal() == 1.0);
    CHECK(fr.x_mart->terminal() == 0.0);
    CHECK(fr.x_pred->terminal() == 1.0);

    const EventSets ev = classify_events(fr.mu, fr.nu);
    CHECK(ev.k_times == std::vector<double>{0.5, 1.0, 1.5});
    CHECK(ev.j_times == ev.k_times);
    CHECK(!ev.quasi_left_continuous);

    const ReconcileReport rep = reconcile(fr);
    CHECK(rep.pass);
    CHECK(rep.violations == 0);
    CHECK(rep.max_forced_atom_gap == 0.0);
}

TEST_CASE("nonlinear flow hits the boundary at the closed-form time") {
    // x' = 0.3 + 0.2 x from 0.5: x(t) = 2 exp(t/5) - 1.5, hits 1 at
    // t = 5 ln(1.25)
    PdmpSpec spec;
    spec.x0 = 0.5;
    spec.flow = [](double x) { return 0.3 + 0.2 * x; };
    spec.rate = [](double) { return 0.0; };
    spec.jump_kernel = [](double x) { return MarkKernel::point(0.25 + 0.5 * x, 1.0); };
    spec.boundary_map = [](double) { return 0.25; };
    spec.horizon = 2.0;
    const ForwardRealization fr = simulate_pdmp(spec, make_uniform_grid(2.0, 200), 12, 0);
    REQUIRE(fr.mu.atoms.size() == 1);
    const double hit = 5.0 * std::log(1.25);
    CHECK(fr.mu.atoms[0].time == doctest::Approx(hit).epsilon(1e-8));
    CHECK(fr.path->left_limit_at(fr.mu.atoms[0].time) == 1.0);
    CHECK(fr.path->value_at(fr.mu.atoms[0].time) == 0.25);
    CHECK(fr.pstar.back() == 1.0);
    CHECK(reconcile(fr).pass);
}

TEST_CASE("interior clock inverts the survival function correctly") {
    PdmpSpec spec;
    spec.x0 = 0.4;
    spec.flow = [](double) { return -0.1; };
    spec.rate = [](double) { return 2.0; };
    spec.jump_kernel = [](double x) { return MarkKernel::point(0.25 + 0.5 * x, 1.0); };
    spec.boundary_map = [](double) { return 0.5; };
    spec.horizon = 4.0;
    const GridPtr grid = make_uniform_grid(4.0, 200);
    std::vector<double> first_times;
    for (uint64_t idx = 0; idx < 2000; ++idx) {
        const ForwardRealization fr = simulate_pdmp(spec, grid, 404, idx);
        if (idx < 5) {
            const ReconcileReport rep = reconcile(fr);
            CHECK(rep.pass);
        }
        if (!fr.mu.atoms.empty()) first_times.push_back(fr.mu.atoms[0].time);
    }
    REQUIRE(first_times.size() > 1990);  // censoring at T is ~exp(-8)
    const double d = ks_distance_exponential(first_times, 2.0);
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(first_times.size())));
}

TEST_CASE("pdmp misconfiguration is rejected") {
    PdmpSpec spec;
    spec.x0 = 0.5;
    spec.flow = [](double) { return 1.0; };
    spec.rate = [](double) { return 0.0; };
    spec.jump_kernel = [](double x) { return MarkKernel::point(0.25 + 0.5 * x, 1.0); };
    spec.boundary_map = [](double) { return 1.2; };  // leaves the interval
    const GridPtr grid = make_uniform_grid(1.0, 50);
    CHECK_THROWS_AS(simulate_pdmp(spec, grid, 1, 0), std::invalid_argument);

    spec.boundary_map = [](double) { return 0.5; };
    spec.x0 = 1.0;  // starts on the boundary
    CHECK_THROWS_AS(simulate_pdmp(spec, grid, 1, 0), std::invalid_argument);

    spec.x0 = 0.4;
    spec.flow = [](double) { return 0.0; };
    spec.rate = [](double) { return 1.0; };
    spec.jump_kernel = [](double) { return MarkKernel::point(0.7, 0.8); };  // mass 0.8
    spec.horizon = 8.0;
    CHECK_THROWS_AS(simulate_pdmp(spec, make_uniform_grid(8.0, 80), 3, 0),
                    std::invalid_argument);
}

TEST_CASE("reconcile flags tampered realizations") {
    const JumpDiffusionSpec spec = compensated_poisson_spec();
    const GridPtr grid = make_uniform_grid(1.0, 20);
    ForwardRealization fr = simulate_jump_diffusion(spec, grid, 6, 2);
    REQUIRE(!fr.mu.atoms.empty());
    REQUIRE(reconcile(fr).pass);

    SUBCASE("perturbed component sum") {
        std::vector<double> xp(fr.x_pred->values());
        xp[5] += 1e-6;
        fr.x_pred = std::make_shared<const CadlagPath>(fr.path->grid_ptr(), xp,
                                                       fr.x_pred->jumps());
        const ReconcileReport rep = reconcile(fr);
        CHECK(!rep.pass);
        CHECK(rep.violations >= 1);
        CHECK(rep.max_split_mismatch == doctest::Approx(1e-6).epsilon(1e-6));
    }
    SUBCASE("missing event tag") {
        fr.tags.clear();
        const ReconcileReport rep = reconcile(fr);
        CHECK(!rep.pass);
        // one violation per untagged atom, plus the orphaned component jumps
        CHECK(rep.violations >= static_cast<int>(fr.mu.atoms.size()));
    }
    SUBCASE("forced-event counter drift") {
        fr.pstar.assign(fr.path->grid().size(), 0.0);
        fr.pstar.back() = 1.0;  // ticks with no predictable tag
        const ReconcileReport rep = reconcile(fr);
        CHECK(!rep.pass);
    }
}
