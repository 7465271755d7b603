#pragma once

#include <string>
#include <string_view>

#include "hypclass/builtins.hpp"

namespace hypclass {

// Sectioned plain text, one entry per line, '#' starts a comment:
//
//   [header]    name = ..., n = <int>, r = <int> (optional),
//               base_x = v0 .. vn, base_xi = v0 .. vn (default x = 0, xi = e_n)
//   [params]    name = <constant expression>
//   [phi]       one expression per line, phi_1 first
//   [theta] [nu] [R] [theta_ext]   a single expression each
//   [k]         tangency functions, one per line
//   [region]    box, samples, seed, shells = e1 e2 ..., sweep = <var> lo hi steps
//
// nu is added to theta.
Problem parse_symbol_text(std::string_view text, const std::string& label = "<text>");
Problem load_symbol_file(const std::string& path);

}  // namespace hypclass
