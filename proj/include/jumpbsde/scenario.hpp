#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "jumpbsde/bsde.hpp"
#include "jumpbsde/forward.hpp"

namespace jumpbsde {

enum class ModelType { jump_diffusion, pure_jump, pdmp };

// Oracle selection for the identify subcommand.
enum class OracleKind {
    none,
    matexp,             // finite-state chain: matrix exponential
    pde,                // diffusion: Crank-Nicolson reference
    closed_v,           // time-independent v(x) supplied in the config
    deterministic_flow  // zero-rate boundary model: transport along the flow
};

// A fully parsed run configuration. Exactly one of jd / pj / pdmp is active
// according to `type`; the others are default-constructed.
struct Scenario {
    std::string name;
    ModelType type = ModelType::jump_diffusion;
    JumpDiffusionSpec jd;
    PureJumpSpec pj;
    PdmpSpec pdmp;

    // finite-state metadata (pure_jump models declared by states + rates)
    std::vector<double> states;
    Eigen::MatrixXd rate_matrix;  // off-diagonal entries are jump rates

    DriverSpec driver;
    SolverOptions solver;

    OracleKind oracle = OracleKind::none;
    std::function<double(double)> oracle_closed_v;  // when oracle == closed_v

    int n_paths = 100;
    int n_steps = 50;
    uint64_t seed = 1;

    nlohmann::json raw;
};

Scenario parse_scenario(const nlohmann::json& j);
// Reads the file, applies dotted overrides, parses. Throws std::runtime_error
// with the offending field path on malformed input.
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

// Simulates n_paths realizations of the scenario's model on a uniform grid
// with scenario.n_steps steps.
ForwardEnsemble simulate_scenario(const Scenario& sc);
ForwardEnsemble simulate_scenario(const Scenario& sc, int n_paths, int n_steps, uint64_t seed);

}  // namespace jumpbsde
