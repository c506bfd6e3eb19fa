#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "jumpbsde/bsde.hpp"
#include "jumpbsde/forward.hpp"
#include "jumpbsde/oracle.hpp"

using namespace jumpbsde;

namespace {

PureJumpSpec two_state_spec(double q01, double q10) {
    PureJumpSpec spec;
    spec.x0 = 0.2;
    spec.rate_kernel = [q01, q10](double, double x) {
        return x < 0.5 ? MarkKernel::point(0.8, q01) : MarkKernel::point(0.2, q10);
    };
    spec.rate_bound = std::max(q01, q10);
    spec.horizon = 1.0;
    return spec;
}

GeneratorMatrix two_state_generator(double q01, double q10) {
    GeneratorMatrix gen;
    gen.states = {0.2, 0.8};
    gen.q = Eigen::MatrixXd(2, 2);
    gen.q << -q01, q01, q10, -q10;
    return gen;
}

// value table lookup with linear interpolation in time
double table_value(const FiniteStateSolution& fs, double t, double x) {
    const double dt = fs.times[1] - fs.times[0];
    std::size_t k = static_cast<std::size_t>(t / dt);
    if (k + 1 >= fs.times.size()) k = fs.times.size() - 2;
    const double w = (t - fs.times[k]) / dt;
    std::size_t i = 0;
    while (i < fs.states.size() && std::abs(fs.states[i] - x) > 1e-6) ++i;
    REQUIRE(i < fs.states.size());
    return (1.0 - w) * fs.v[k][i] + w * fs.v[k + 1][i];
}

ForwardRealization hand_path(const GridPtr& g, std::vector<double> values, std::vector<Jump> jumps,
                             std::vector<MeasureAtom> mu_atoms,
                             std::vector<CompensatorAtom> nu_atoms) {
    ForwardRealization fr;
    fr.path = std::make_shared<CadlagPath>(g, std::move(values), std::move(jumps));
    fr.mu.atoms = std::move(mu_atoms);
    fr.nu.atoms = std::move(nu_atoms);
    return fr;
}

}  // namespace

TEST_CASE("finite-state value matches the matrix exponential") {
    const PureJumpSpec spec = two_state_spec(1.0, 2.0);
    DriverSpec driver;
    driver.f = [](double, double, double, double, double) { return 0.0; };
    driver.terminal = [](double x) { return x; };

    const FiniteStateSolution fs = solve_finite_state(spec, driver, {0.2, 0.8}, 200);
    const GeneratorMatrix gen = two_state_generator(1.0, 2.0);
    for (const int k : {0, 50, 140}) {
        const MatexpReport ref =
            matrix_exponential_v(gen, {0.2, 0.8}, fs.times[static_cast<std::size_t>(k)], 1.0);
        REQUIRE(ref.pass);
        CHECK(fs.value(k, 0.2) == doctest::Approx(ref.v0[0]).epsilon(1e-8));
        CHECK(fs.value(k, 0.8) == doctest::Approx(ref.v0[1]).epsilon(1e-8));
    }
    CHECK_FALSE(fs.stiffness_flag);
    CHECK(fs.groenwall_ok);
    CHECK(fs.groenwall_bound >= 0.8);
}

TEST_CASE("finite-state integrator converges at fourth order") {
    const PureJumpSpec spec = two_state_spec(1.0, 2.0);
    DriverSpec driver;
    // y and jump coupling keep the right-hand side nonlinear in the table
    driver.f = [](double, double x, double y, double, double u) {
        return -0.5 * y + 0.3 * u + x;
    };
    driver.terminal = [](double x) { return x * x; };
    driver.lipschitz_y = 0.5;

    const FiniteStateSolution ref = solve_finite_state(spec, driver, {0.2, 0.8}, 1024);
    auto err_at = [&](int steps) {
        const FiniteStateSolution fs = solve_finite_state(spec, driver, {0.2, 0.8}, steps);
        double worst = 0.0;
        for (const double x : {0.2, 0.8})
            worst = std::max(worst, std::abs(fs.value(0, x) - ref.value(0, x)));
        return worst;
    };
    const double e8 = err_at(8);
    const double e16 = err_at(16);
    CHECK(e8 > 1e-12);
    CHECK(e8 / e16 > 12.0);
    CHECK(e8 / e16 < 22.0);
}

TEST_CASE("finite-state linear growth scales the driver-free value") {
    // -v' = Qv + a v has solution exp(a (T-t)) exp(Q (T-t)) g
    const PureJumpSpec spec = two_state_spec(1.0, 2.0);
    const double a = 0.7;
    DriverSpec driver;
    driver.f = [a](double, double, double y, double, double) { return a * y; };
    driver.terminal = [](double x) { return x; };
    driver.lipschitz_y = a;

    const FiniteStateSolution fs = solve_finite_state(spec, driver, {0.2, 0.8}, 400);
    const MatexpReport ref = matrix_exponential_v(two_state_generator(1.0, 2.0), {0.2, 0.8}, 0.0, 1.0);
    REQUIRE(ref.pass);
    CHECK(fs.value(0, 0.2) == doctest::Approx(std::exp(a) * ref.v0[0]).epsilon(1e-8));
    CHECK(fs.value(0, 0.8) == doctest::Approx(std::exp(a) * ref.v0[1]).epsilon(1e-8));
}

TEST_CASE("finite-state rate table rejects unusable kernels") {
    DriverSpec driver;
    driver.f = [](double, double, double, double, double) { return 0.0; };
    driver.terminal = [](double x) { return x; };

    PureJumpSpec self_mass = two_state_spec(1.0, 2.0);
    self_mass.rate_kernel = [](double, double x) { return MarkKernel::point(x, 1.0); };
    CHECK_THROWS_AS(solve_finite_state(self_mass, driver, {0.2, 0.8}, 10), std::invalid_argument);

    PureJumpSpec off_space = two_state_spec(1.0, 2.0);
    off_space.rate_kernel = [](double, double) { return MarkKernel::point(0.9, 1.0); };
    CHECK_THROWS_AS(solve_finite_state(off_space, driver, {0.2, 0.8}, 10), std::invalid_argument);

    PureJumpSpec dens = two_state_spec(1.0, 2.0);
    dens.rate_kernel = [](double, double) {
        return MarkKernel::density(1.0, [](double) { return 0.5; }, -1.0, 1.0,
                                   [](double u) { return 2.0 * u - 1.0; });
    };
    CHECK_THROWS_AS(solve_finite_state(dens, driver, {0.2, 0.8}, 10), std::invalid_argument);

    CHECK_THROWS_AS(solve_finite_state(two_state_spec(1.0, 2.0), driver, {0.2}, 10),
                    std::invalid_argument);
}

TEST_CASE("constant terminal data collapses the regression solve") {
    JumpDiffusionSpec spec;
    spec.x0 = 0.6;
    spec.drift = [](double x) { return -0.2 * x; };
    spec.sigma = [](double) { return 0.25; };
    spec.gamma = [](double, double e) { return 0.1 * e; };
    spec.intensity = MarkKernel::point(1.0, 2.0);
    spec.horizon = 1.0;

    const ForwardEnsemble ens = simulate_ensemble(spec, make_uniform_grid(1.0, 10), 5, 300);
    DriverSpec driver;
    driver.f = [](double, double, double, double, double) { return 0.0; };
    driver.terminal = [](double) { return 4.0; };

    const BsdeSolution sol = solve_regression(ens, driver, SolverOptions{});
    CHECK(sol.y0 == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(sol.y0_std_error <= 1e-12);
    // time zero has a single visited state, so only on-support evaluations
    // are pinned there
    CHECK(sol.slice_values[0](0.6) == doctest::Approx(4.0).epsilon(1e-10));
    for (const std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{10}})
        CHECK(sol.slice_values[k](0.77) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(std::abs(sol.slice_z[0](0.6)) <= 1e-10);
    for (std::size_t k = 1; k < 10; ++k) {
        CHECK(std::abs(sol.slice_z[k](0.9)) <= 1e-10);
        CHECK(std::abs(sol.slice_u[k](0.9, 1.0)) <= 1e-10);
    }
    for (const auto& zs : sol.z_paths)
        for (const double z : zs) CHECK(std::abs(z) <= 1e-10);
    for (const auto& us : sol.u_at_atoms)
        for (const double u : us) CHECK(std::abs(u) <= 1e-10);

    const ResidualReport rep = residual_check(sol, ens, driver);
    CHECK(rep.ensemble_max <= 1e-10);
}

TEST_CASE("driftless diffusion is reproduced as its own martingale") {
    JumpDiffusionSpec spec;
    spec.x0 = 1.0;
    spec.drift = [](double) { return 0.0; };
    spec.sigma = [](double) { return 0.4; };
    spec.gamma = [](double, double) { return 0.0; };
    spec.horizon = 1.0;

    const ForwardEnsemble ens = simulate_ensemble(spec, make_uniform_grid(1.0, 20), 64, 2000);
    DriverSpec driver;
    driver.f = [](double, double, double, double, double) { return 0.0; };
    driver.terminal = [](double x) { return x; };

    const BsdeSolution sol = solve_regression(ens, driver, SolverOptions{});
    CHECK(std::abs(sol.y0 - 1.0) <= 4.0 * sol.y0_std_error + 2e-3);

    REQUIRE(sol.z_paths.size() == 2000);
    double z_mean = 0.0, z_sq = 0.0;
    std::size_t n_z = 0;
    for (const auto& zs : sol.z_paths)
        for (const double z : zs) {
            z_mean += z;
            z_sq += (z - 0.4) * (z - 0.4);
            ++n_z;
        }
    z_mean /= static_cast<double>(n_z);
    CHECK(z_mean == doctest::Approx(0.4).epsilon(0.15));
    CHECK(std::sqrt(z_sq / static_cast<double>(n_z)) < 0.12);

    for (const auto& us : sol.u_at_atoms) CHECK(us.empty());
    const ResidualReport rep = residual_check(sol, ens, driver);
    CHECK(rep.ensemble_mean < 0.15);
}

TEST_CASE("exact fields close the backward equation pathwise") {
    JumpDiffusionSpec spec;
    spec.x0 = 0.3;
    spec.drift = [](double) { return 0.0; };
    spec.sigma = [](double) { return 1.0; };
    spec.gamma = [](double, double) { return 0.0; };
    spec.horizon = 1.0;

    DriverSpec driver;
    driver.f = [](double, double, double, double, double) { return 0.0; };
    driver.terminal = [](double x) { return x * x; };

    // Y_t = X_t^2 + (T - t), Z_t = 2 X_t, U = 0 solves the equation; the
    // pathwise defect is the Euler bracket error and shrinks like sqrt(dt)
    auto y_field = [](double t, double x) { return x * x + (1.0 - t); };
    auto z_field = [](double, double x) { return 2.0 * x; };
    auto u_field = [](double, double, double) { return 0.0; };

    auto mean_residual = [&](std::size_t steps) {
        const ForwardEnsemble ens = simulate_ensemble(spec, make_uniform_grid(1.0, steps), 7, 500);
        return residual_check_fields(y_field, z_field, u_field, ens, driver).ensemble_mean;
    };
    const double coarse = mean_residual(50);
    const double fine = mean_residual(200);
    CHECK(fine < 0.25);
    CHECK(coarse / fine > 1.5);
    CHECK(coarse / fine < 2.8);

    // a biased Z leaves a drift the check must flag
    auto z_bad = [](double, double x) { return 2.0 * x + 0.5; };
    const ForwardEnsemble ens = simulate_ensemble(spec, make_uniform_grid(1.0, 200), 7, 500);
    const double good = residual_check_fields(y_field, z_field, u_field, ens, driver).ensemble_mean;
    const double bad = residual_check_fields(y_field, z_bad, u_field, ens, driver).ensemble_mean;
    CHECK(bad > 2.0 * good);
    CHECK(bad > 0.15);
}

TEST_CASE("two-state chain with a jump-coupled driver matches the ode reference") {
    const PureJumpSpec spec = two_state_spec(1.0, 2.0);
    DriverSpec driver;
    driver.f = [](double, double x, double y, double, double u) {
        return -0.5 * y + 0.3 * u + x;
    };
    driver.terminal = [](double x) { return x * x; };
    driver.lipschitz_y = 0.5;

    const FiniteStateSolution ref = solve_finite_state(spec, driver, {0.2, 0.8}, 400);
    const ForwardEnsemble ens = simulate_ensemble(spec, make_uniform_grid(1.0, 40), 91, 2000);

    SolverOptions options;
    options.state_values = {0.2, 0.8};
    const BsdeSolution sol = solve_regression(ens, driver, options);
    CHECK(std::abs(sol.y0 - ref.value(0, 0.2)) <= 3.0 * sol.y0_std_error + 0.04);

    // realized U against the value-difference of the reference table
    double sq = 0.0;
    std::size_t n_atoms = 0;
    for (std::size_t i = 0; i < ens.paths.size(); ++i) {
        const ForwardRealization& fr = ens.paths[i];
        for (std::size_t a = 0; a < fr.mu.atoms.size(); ++a) {
            const double t = fr.mu.atoms[a].time;
            const double pre = fr.path->pre_value_at(t);
            const double truth = table_value(ref, t, fr.mu.atoms[a].mark) - table_value(ref, t, pre);
            sq += (sol.u_at_atoms[i][a] - truth) * (sol.u_at_atoms[i][a] - truth);
            ++n_atoms;
        }
    }
    REQUIRE(n_atoms > 1000);
    CHECK(std::sqrt(sq / static_cast<double>(n_atoms)) < 0.15);

    // the reference fields close the equation; a shifted U does not
    auto y_field = [&](double t, double x) { return table_value(ref, t, x); };
    auto u_ref = [&](double t, double x, double e) {
        return table_value(ref, t, e) - table_value(ref, t, x);
    };
    auto u_bad = [&](double t, double x, double e) { return u_ref(t, x, e) + 0.3; };
    const double good =
        residual_check_fields(y_field, {}, u_ref, ens, driver).ensemble_mean;
    const double bad = residual_check_fields(y_field, {}, u_bad, ens, driver).ensemble_mean;
    CHECK(good < 0.06);
    CHECK(bad > 2.0 * good + 0.05);
}

TEST_CASE("forced atoms follow the damped implicit recursion") {
    const GridPtr g = make_grid({0.0, 0.5, 1.0});
    std::vector<ForwardRealization> paths;
    for (int i = 0; i < 100; ++i) {
        if (i % 2 == 0)
            paths.push_back(hand_path(g, {0.4, 0.7, 0.7}, {{0.5, 0.3}}, {{0.5, 0.7}},
                                      {{0.5, MarkKernel::point(0.7, 1.0)}}));
        else
            paths.push_back(hand_path(g, {0.2, 0.9, 0.9}, {{0.5, 0.7}}, {{0.5, 0.9}},
                                      {{0.5, MarkKernel::point(0.9, 1.0)}}));
    }
    ForwardEnsemble ens;
    ens.base_grid = g;
    ens.paths = std::move(paths);

    DriverSpec driver;
    driver.f = [](double, double, double y, double, double) { return -0.5 * y; };
    driver.terminal = [](double x) { return x; };
    driver.clock = DriverClock::compensator;
    driver.lipschitz_y = 0.5;
    SolverOptions options;
    options.state_degree = 1;

    // two path shapes, degree-1 fits are exact interpolation and every
    // backward quantity is computable by hand: the atom solves
    // y = base - 0.5 y, so y = base / 1.5
    const BsdeSolution sol = solve_regression(ens, driver, options);
    CHECK(sol.y0 == doctest::Approx(0.34375).epsilon(1e-8));
    CHECK(sol.slice_values[1](0.8) == doctest::Approx(0.6).epsilon(1e-8));
    CHECK(sol.y_paths[0].left_limit_at(0.5) == doctest::Approx(0.35).epsilon(1e-8));
    CHECK(sol.y_paths[1].left_limit_at(0.5) == doctest::Approx(0.45).epsilon(1e-8));
    CHECK(sol.u_at_atoms[0][0] == 0.0);

    const ResidualReport rep = residual_check(sol, ens, driver);
    CHECK(rep.ensemble_max < 0.1);

    DriverSpec stiff = driver;
    stiff.lipschitz_y = 30.0;
    CHECK_THROWS_AS(solve_regression(ens, stiff, options), std::runtime_error);
}

TEST_CASE("regression is invariant under same-state tail exchange") {
    const GridPtr g = make_grid({0.0, 0.5, 1.0});
    auto build = [&](bool swapped) {
        std::vector<ForwardRealization> paths;
        for (int i = 0; i < 100; ++i) {
            const bool low = i < 50;
            const double mid = low ? 0.3 : 0.9;
            double term = mid + 0.01 * static_cast<double>(i % 7 - 3);
            // exchange the futures of two paths sharing the time-0.5 state
            if (swapped && i == 3) term = 0.3 + 0.01 * static_cast<double>(17 % 7 - 3);
            if (swapped && i == 17) term = 0.3 + 0.01 * static_cast<double>(3 % 7 - 3);
            std::vector<Jump> jumps{{0.5, mid - 0.5}};
            if (term != mid) jumps.push_back({1.0, term - mid});
            paths.push_back(hand_path(g, {0.5, mid, term}, std::move(jumps), {}, {}));
        }
        ForwardEnsemble ens;
        ens.base_grid = g;
        ens.paths = std::move(paths);
        return ens;
    };

    DriverSpec driver;
    driver.f = [](double, double, double, double, double) { return 0.0; };
    driver.terminal = [](double x) { return x; };
    SolverOptions options;
    options.state_values = {0.3, 0.9};

    const BsdeSolution a = solve_regression(build(false), driver, options);
    const BsdeSolution b = solve_regression(build(true), driver, options);
    CHECK(a.y0 == doctest::Approx(b.y0).epsilon(1e-12));
    CHECK(a.slice_values[1](0.3) == doctest::Approx(b.slice_values[1](0.3)).epsilon(1e-12));
    CHECK(a.slice_values[1](0.9) == doctest::Approx(b.slice_values[1](0.9)).epsilon(1e-12));
}

TEST_CASE("regression solver validates its inputs") {
    const GridPtr g = make_grid({0.0, 0.5, 1.0});
    DriverSpec driver;
    driver.f = [](double, double, double, double, double) { return 0.0; };
    driver.terminal = [](double x) { return x; };

    ForwardEnsemble small;
    small.base_grid = g;
    for (int i = 0; i < 99; ++i) small.paths.push_back(hand_path(g, {0.5, 0.5, 0.5}, {}, {}, {}));
    CHECK_THROWS_AS(solve_regression(small, driver, SolverOptions{}), std::invalid_argument);

    ForwardEnsemble ens;
    ens.base_grid = g;
    for (int i = 0; i < 100; ++i) ens.paths.push_back(hand_path(g, {0.5, 0.5, 0.5}, {}, {}, {}));
    DriverSpec no_terminal;
    no_terminal.f = driver.f;
    CHECK_THROWS_AS(solve_regression(ens, no_terminal, SolverOptions{}), std::invalid_argument);

    ForwardEnsemble coarse = ens;
    coarse.base_grid = make_uniform_grid(1.0, 3);
    CHECK_THROWS_AS(solve_regression(coarse, driver, SolverOptions{}), std::invalid_argument);
}
