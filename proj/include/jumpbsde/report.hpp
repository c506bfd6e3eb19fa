#pragma once

#include <string>
#include <utility>
#include <vector>

namespace jumpbsde {

struct CheckResult {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct RunReport {
    std::string scenario;
    std::string subcommand;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<CheckResult> checks;

    void metric(const std::string& name, double value);
    void check(const std::string& name, double value, double tolerance, bool pass,
               const std::string& detail = "");
    // pass ⇔ value <= tolerance
    void check_leq(const std::string& name, double value, double tolerance,
                   const std::string& detail = "");
    bool all_pass() const;
};

// Shortest round-trip decimal form; used everywhere output must be
// byte-identical across runs.
std::string format_double(double x);

std::string render_csv(const RunReport& report);
std::string render_json(const RunReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace jumpbsde
