#include "jumpbsde/ensemble_io.hpp"

#include <charconv>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "jumpbsde/report.hpp"

namespace jumpbsde {

namespace {

double parse_double(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error("ensemble read: bad number '" + s + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

}  // namespace

void write_ensemble(const PathEnsemble& ensemble, const std::string& dir) {
    validate_ensemble(ensemble);
    std::filesystem::create_directories(dir);
    const TimeGrid& base = *ensemble.base_grid;

    nlohmann::json meta;
    meta["horizon"] = base.horizon();
    meta["n_paths"] = ensemble.paths.size();
    meta["base_points"] = base.points();
    meta["seeds"] = ensemble.seeds;
    write_text_file(dir + "/meta.json", meta.dump(2) + "\n");

    std::ostringstream paths;
    paths << "path";
    for (double t : base.points()) paths << "," << format_double(t);
    paths << "\n";
    std::ostringstream jumps;
    jumps << "path,time,size\n";
    std::ostringstream extras;
    extras << "path,time,value\n";

    for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
        const CadlagPath& p = ensemble.paths[i];
        paths << i;
        for (double v : p.values_on(base)) paths << "," << format_double(v);
        paths << "\n";
        for (const Jump& j : p.jumps())
            jumps << i << "," << format_double(j.time) << "," << format_double(j.size) << "\n";
        for (std::size_t k = 0; k < p.grid().size(); ++k) {
            const double t = p.grid()[k];
            if (base.contains_time(t)) continue;
            extras << i << "," << format_double(t) << "," << format_double(p.value(k)) << "\n";
        }
    }
    write_text_file(dir + "/paths.csv", paths.str());
    write_text_file(dir + "/jumps.csv", jumps.str());
    write_text_file(dir + "/extras.csv", extras.str());
}

PathEnsemble read_ensemble(const std::string& dir) {
    const nlohmann::json meta = nlohmann::json::parse(read_text_file(dir + "/meta.json"));
    PathEnsemble out;
    out.base_grid = make_grid(meta.at("base_points").get<std::vector<double>>());
    out.seeds = meta.value("seeds", std::vector<std::uint64_t>{});
    const std::size_t n_paths = meta.at("n_paths").get<std::size_t>();

    const auto path_lines = read_lines(dir + "/paths.csv");
    if (path_lines.size() != n_paths + 1)
        throw std::runtime_error("ensemble read: paths.csv row count mismatch");

    std::map<std::size_t, std::vector<std::pair<double, double>>> extras;
    for (const auto& line : read_lines(dir + "/extras.csv")) {
        if (line.rfind("path,", 0) == 0) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 3) throw std::runtime_error("ensemble read: bad extras row");
        extras[static_cast<std::size_t>(parse_double(cells[0]))].emplace_back(
            parse_double(cells[1]), parse_double(cells[2]));
    }
    std::map<std::size_t, std::vector<Jump>> jumps;
    for (const auto& line : read_lines(dir + "/jumps.csv")) {
        if (line.rfind("path,", 0) == 0) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 3) throw std::runtime_error("ensemble read: bad jumps row");
        jumps[static_cast<std::size_t>(parse_double(cells[0]))].push_back(
            {parse_double(cells[1]), parse_double(cells[2])});
    }

    for (std::size_t i = 0; i < n_paths; ++i) {
        const auto cells = split_csv_line(path_lines[i + 1]);
        if (cells.size() != out.base_grid->size() + 1)
            throw std::runtime_error("ensemble read: bad paths row width");
        std::vector<double> extra_times;
        for (const auto& [t, v] : extras[i]) extra_times.push_back(t);
        GridPtr grid =
            std::make_shared<const TimeGrid>(out.base_grid->refined_with(extra_times));
        std::vector<double> values(grid->size());
        for (std::size_t k = 0; k < out.base_grid->size(); ++k) {
            const auto idx = grid->index_of((*out.base_grid)[k]);
            values[*idx] = parse_double(cells[k + 1]);
        }
        for (const auto& [t, v] : extras[i]) values[*grid->index_of(t)] = v;
        out.paths.emplace_back(std::move(grid), std::move(values), jumps[i]);
    }
    validate_ensemble(out);
    return out;
}

}  // namespace jumpbsde
