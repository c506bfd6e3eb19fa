#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "jumpbsde/bsde.hpp"
#include "jumpbsde/kernel.hpp"

namespace jumpbsde {

// Builders from config fragments to callables. Every builder takes `where`,
// the dotted path of the fragment inside the config file, so a malformed
// field reports its own location.

// kinds: zero | identity | square | constant{value} | scaled{value} |
//        poly{coeffs} | neg_identity
std::function<double(double)> make_scalar_fn(const nlohmann::json& j, const std::string& where);

// functions of (x, e); kinds: mark | scaled_mark{value} | state_change |
//                             product | zero
std::function<double(double, double)> make_gamma_fn(const nlohmann::json& j,
                                                    const std::string& where);

// kinds: point{mark, mass} | discrete{marks, masses} | uniform{lo, hi, mass}
MarkKernel make_kernel(const nlohmann::json& j, const std::string& where);

// state-dependent kernel x -> p(x, .); kinds: constant{kernel} |
// point_map{map} (delta at map(x))
std::function<MarkKernel(double)> make_kernel_fn(const nlohmann::json& j,
                                                 const std::string& where);

// driver f(s, x, y, z, u_eval); kinds: zero | affine{state_coeffs, y, z, u}
std::function<double(double, double, double, double, double)> make_driver_fn(
    const nlohmann::json& j, const std::string& where);

// Applies "a.b.c=value" overrides to a config document. Values parse as
// JSON when possible and fall back to strings.
nlohmann::json apply_overrides(nlohmann::json base, const std::vector<std::string>& overrides);

}  // namespace jumpbsde
