#include "jumpbsde/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jumpbsde {

void RunReport::metric(const std::string& name, double value) { metrics.emplace_back(name, value); }

void RunReport::check(const std::string& name, double value, double tolerance, bool pass,
                      const std::string& detail) {
    checks.push_back({name, value, tolerance, pass, detail});
}

void RunReport::check_leq(const std::string& name, double value, double tolerance,
                          const std::string& detail) {
    check(name, value, tolerance, value <= tolerance, detail);
}

bool RunReport::all_pass() const {
    for (const CheckResult& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += "\"";
    return out;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_csv(const RunReport& report) {
    std::ostringstream out;
    out << "scenario,subcommand,kind,name,value,tolerance,pass,detail\n";
    const std::string prefix = csv_escape(report.scenario) + "," + csv_escape(report.subcommand);
    for (const auto& [name, value] : report.metrics)
        out << prefix << ",metric," << csv_escape(name) << "," << format_double(value) << ",,,\n";
    for (const CheckResult& c : report.checks)
        out << prefix << ",check," << csv_escape(c.name) << "," << format_double(c.value) << ","
            << format_double(c.tolerance) << "," << (c.pass ? "true" : "false") << ","
            << csv_escape(c.detail) << "\n";
    return out.str();
}

std::string render_json(const RunReport& report) {
    std::ostringstream out;
    out << "{\n  \"scenario\": \"" << json_escape(report.scenario) << "\",\n";
    out << "  \"subcommand\": \"" << json_escape(report.subcommand) << "\",\n";
    out << "  \"metrics\": {";
    for (std::size_t i = 0; i < report.metrics.size(); ++i) {
        if (i) out << ",";
        out << "\n    \"" << json_escape(report.metrics[i].first)
            << "\": " << format_double(report.metrics[i].second);
    }
    out << (report.metrics.empty() ? "" : "\n  ") << "},\n";
    out << "  \"checks\": [";
    for (std::size_t i = 0; i < report.checks.size(); ++i) {
        const CheckResult& c = report.checks[i];
        if (i) out << ",";
        out << "\n    {\"name\": \"" << json_escape(c.name) << "\", \"value\": " << format_double(c.value)
            << ", \"tolerance\": " << format_double(c.tolerance) << ", \"pass\": "
            << (c.pass ? "true" : "false") << ", \"detail\": \"" << json_escape(c.detail) << "\"}";
    }
    out << (report.checks.empty() ? "" : "\n  ") << "],\n";
    out << "  \"all_pass\": " << (report.all_pass() ? "true" : "false") << "\n}\n";
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace jumpbsde
