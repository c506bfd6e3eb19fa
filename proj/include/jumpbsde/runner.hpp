#pragma once

#include <string>
#include <vector>

#include "jumpbsde/identify.hpp"
#include "jumpbsde/report.hpp"
#include "jumpbsde/scenario.hpp"

namespace jumpbsde {

struct RunOptions {
    std::string config_path;
    std::vector<std::string> overrides;  // dotted key=value
    std::string output_dir;              // empty: print to stdout only
    bool write_svg = false;
};

// Each subcommand runs its checks, renders the report, and returns 0 iff
// every check passed. Reports land in output_dir as <subcommand>.csv /
// <subcommand>.json (and .svg when requested).
int run_simulate(const RunOptions& options);
int run_solve(const RunOptions& options);
int run_identify(const RunOptions& options);
int run_converge(const RunOptions& options);
int run_oracle(const RunOptions& options);

int run(const std::string& subcommand, const RunOptions& options);

// Reference value function for a scenario, per its oracle kind. Finite-state
// tables get dense time grids; closed forms evaluate directly.
ValueFunction oracle_value_function(const Scenario& sc);

// Shared by run_solve / run_identify and the acceptance suite.
RunReport solve_report(const Scenario& sc, const ForwardEnsemble& ensemble,
                       const BsdeSolution& solution);

}  // namespace jumpbsde
