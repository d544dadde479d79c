#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "jumplq/problem.hpp"

namespace jumplq {

/// Decodes a problem document:
///
///   {n, m, d, T, x0, delta?, r0?, marks: [{label, weight}], M,
///    env: {type: "deterministic" | "regime", grid: [t...],
///          slices: [slice...]            (deterministic)
///          regimes: [[slice...]...], jump_map: [[r'...]...]   (regime)}}
///   slice = {A, B, C?: [..], D?: [..], E?: [..], F?: [..], Q, N}
///
/// Matrices are row-major nested arrays (a bare number is accepted for 1x1);
/// omitted C, D, E, F are zero. Throws ParseError whose message starts with
/// the offending field path. Admissibility is checked by validate(), not here.
LqProblem parse_problem(std::string_view json_text);

LqProblem load_problem(const std::filesystem::path& path);

/// Pretty-printed document that parse_problem reads back to an equal problem.
std::string problem_to_json(const LqProblem& p);

void save_problem(const std::filesystem::path& path, const LqProblem& p);

}  // namespace jumplq
