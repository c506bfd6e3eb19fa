#include <array>
#include <cmath>
#include <sstream>

#include "jumpbsde/measure.hpp"
#include "jumpbsde/oracle.hpp"
#include "jumpbsde/path.hpp"

namespace jumpbsde {

namespace {

// per-time event: nothing, an interior atom with one of two marks, or a
// forced event whose jump is carried by the predictable component
enum class Choice { none, mark_a, mark_b, forced };

constexpr std::array<double, 3> kEventTimes = {0.25, 0.5, 0.75};
constexpr double kMarkA = -1.0;
constexpr double kMarkB = 0.5;
constexpr double kForcedMark = 0.123;  // post-event mark at forced times
constexpr double kForcedJump = -0.5;

double test_fn(int which, double s, double x) {
    switch (which) {
        case 0: return x * x;
        case 1: return x * x * x;
        default: return (1.0 + s) * x;
    }
}

bool is_forced_time(const std::array<Choice, 3>& config, double s) {
    for (std::size_t t = 0; t < kEventTimes.size(); ++t)
        if (kEventTimes[t] == s) return config[t] == Choice::forced;
    return false;
}

}  // namespace

SmallPathReport exhaustive_small_path_check(int max_events) {
    SmallPathReport rep;
    rep.exact = true;
    const GridPtr grid = make_grid({0.0, 0.25, 0.5, 0.75, 1.0});
    constexpr std::array<Choice, 4> kChoices = {Choice::none, Choice::mark_a, Choice::mark_b,
                                                Choice::forced};

    auto push_case = [&](std::string name, double lhs, double rhs) {
        SmallPathCase sp;
        sp.name = std::move(name);
        sp.lhs = lhs;
        sp.rhs = rhs;
        sp.abs_diff = std::abs(lhs - rhs);
        rep.max_abs_diff = std::max(rep.max_abs_diff, sp.abs_diff);
        if (sp.abs_diff != 0.0) rep.exact = false;
        rep.cases.push_back(std::move(sp));
    };

    for (const Choice c0 : kChoices) {
        for (const Choice c1 : kChoices) {
            for (const Choice c2 : kChoices) {
                const std::array<Choice, 3> config = {c0, c1, c2};
                int events = 0;
                for (const Choice c : config)
                    if (c != Choice::none) ++events;
                if (events > max_events) continue;

                std::ostringstream tag;
                std::vector<Jump> jumps, xp_jumps;
                MeasureRealization mu;
                CompensatorSpec nu;
                std::vector<double> values(grid->size(), 1.0);
                double x = 1.0;
                for (std::size_t t = 0; t < kEventTimes.size(); ++t) {
                    const double s = kEventTimes[t];
                    switch (config[t]) {
                        case Choice::none: tag << "-"; break;
                        case Choice::mark_a:
                        case Choice::mark_b: {
                            const double e = config[t] == Choice::mark_a ? kMarkA : kMarkB;
                            tag << (config[t] == Choice::mark_a ? "a" : "b");
                            mu.atoms.push_back({s, e});
                            nu.atoms.push_back({s, MarkKernel::point(0.5 * e, 0.5)});
                            jumps.push_back({s, e});
                            x += e;
                            break;
                        }
                        case Choice::forced:
                            tag << "f";
                            mu.atoms.push_back({s, kForcedMark});
                            nu.atoms.push_back({s, MarkKernel::point(kForcedMark, 1.0)});
                            jumps.push_back({s, kForcedJump});
                            xp_jumps.push_back({s, kForcedJump});
                            x += kForcedJump;
                            break;
                    }
                    values[t + 1] = x;
                }
                values[4] = x;
                const CadlagPath path(grid, values, jumps);

                // transfer identity: direct time-ordered sums on both sides
                // against the op under test
                auto gamma_tilde = [config](double s, double e) {
                    return is_forced_time(config, s) ? 0.0 : e;
                };
                for (int which = 0; which < 3; ++which) {
                    auto phi = [which](double s, double v) { return test_fn(which, s, v); };
                    double direct_lhs = 0.0, direct_rhs = 0.0;
                    for (const auto& j : jumps) direct_lhs += phi(j.time, j.size);
                    for (std::size_t t = 0; t < kEventTimes.size(); ++t) {
                        const double s = kEventTimes[t];
                        if (config[t] == Choice::mark_a || config[t] == Choice::mark_b)
                            direct_rhs += phi(s, gamma_tilde(s, config[t] == Choice::mark_a
                                                                    ? kMarkA
                                                                    : kMarkB));
                        else if (config[t] == Choice::forced)
                            direct_rhs += phi(s, kForcedJump);
                    }
                    const TransferIdentityReport tr =
                        transfer_identity_check(phi, path, mu, gamma_tilde, xp_jumps);
                    std::ostringstream name;
                    name << "transfer-" << tag.str() << "-fn" << which;
                    push_case(name.str() + "-lhs", tr.lhs, direct_lhs);
                    push_case(name.str() + "-rhs", tr.rhs, direct_rhs);
                    push_case(name.str() + "-gap", tr.max_abs_diff, 0.0);
                }

                // compensated integral of W(s, e) = e must telescope to the
                // time-ordered sum of atom contributions
                PredictableField w;
                w.eval = [](double, double e, Side) { return e; };
                const CadlagPath ci = compensated_integral(w, mu, nu, grid);
                double direct = 0.0;
                for (std::size_t t = 0; t < kEventTimes.size(); ++t) {
                    switch (config[t]) {
                        case Choice::none: break;
                        case Choice::mark_a:
                        case Choice::mark_b: {
                            const double e = config[t] == Choice::mark_a ? kMarkA : kMarkB;
                            direct += e - 0.5 * (0.5 * e);  // atom minus its compensation
                            break;
                        }
                        case Choice::forced:
                            direct += kForcedMark - 1.0 * kForcedMark;
                            break;
                    }
                }
                push_case("telescope-" + tag.str(), ci.terminal(), direct);
            }
        }
    }
    return rep;
}

}  // namespace jumpbsde
