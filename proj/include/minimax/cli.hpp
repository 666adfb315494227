#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "minimax/certifier.hpp"

namespace mmx {

struct RunRequest {
  std::string command;  // validate, certify, value-derivs, solve-lower, oracle, subdiff
  std::string problem_path;
  std::vector<std::string> x, y;  // one entry per candidate, comma-separated reals
  std::optional<std::string> mu, lambda, u, v;
  std::optional<std::string> config_path;
  std::optional<std::string> json_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

/// Comma-separated reals; the empty string is the empty vector.
Vector parse_vector(const std::string& text);

/// Runs one command, writing the summary to `out` and errors to `err`.
/// Returns the process exit code: 0 certified / pass, 2 refuted / fail,
/// 3 inconclusive, 1 usage or parse error.
int run(const RunRequest& request, std::ostream& out, std::ostream& err);

/// Builds the report of a single-candidate command without touching files.
CertificateReport run_command(const std::string& command, const ProblemSpec& spec, const CandidatePoint& candidate,
                              const CheckConfig& config);

}  // namespace mmx
