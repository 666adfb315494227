#pragma once

#include <string>
#include <utility>
#include <vector>

#include "minimax/config.hpp"
#include "minimax/lower_level.hpp"
#include "minimax/problem.hpp"

namespace mmx {

inline constexpr const char* kToolVersion = "0.3.1";
inline constexpr const char* kReportVersion = "1";
inline constexpr const char* kLambdaConvention =
    "L = f + mu^T h - lambda^T g, lambda >= 0; A(x,W) and Newton matrices use the exact KKT derivative "
    "(lambda column negated relative to the displayed A); K(x) is the displayed symmetric form";

// Pass and Fail are used by the single-check commands (oracle, value-derivs).
enum class OverallVerdict { Certified, NecessaryPass, Refuted, Inconclusive, Pass, Fail };
const char* to_string(OverallVerdict v);
OverallVerdict overall_from_string(const std::string& s);

/// 0 certified / necessary pass / pass, 2 refuted / fail, 3 inconclusive.
int exit_code(OverallVerdict v);

enum class CertPath { Smooth, Nonsmooth, Invalid };
const char* to_string(CertPath p);
CertPath path_from_string(const std::string& s);

struct CertificateReport {
  std::string version = kReportVersion;
  std::string tool_version = kToolVersion;
  std::string command = "certify";
  std::string problem_digest;
  CheckConfig config;
  CandidatePoint candidate;
  CertPath path = CertPath::Invalid;
  std::string path_reason;
  std::string sign_convention = kLambdaConvention;
  std::vector<ConditionResult> results;
  std::vector<std::pair<std::string, Vector>> quantities;  // named numeric outputs
  OverallVerdict verdict = OverallVerdict::Inconclusive;

  const ConditionResult* find(const std::string& name) const;
  const Vector* quantity(const std::string& name) const;
};

/// refuted if a necessary check is violated; certified if a sufficient one is
/// satisfied; necessary pass if every necessary check is satisfied;
/// inconclusive otherwise.
OverallVerdict compute_verdict(const std::vector<ConditionResult>& results);

struct PathClassification {
  CertPath path = CertPath::Invalid;
  std::string reason;
  LowerConditionsReport jacobian_uniqueness;
  LowerConditionsReport assumption_a;
};

/// Throws std::invalid_argument when the candidate is infeasible.
PathClassification classify_path(const ProblemSpec& spec, const CandidatePoint& candidate, const CheckConfig& config);

CertificateReport certify(const ProblemSpec& spec, const CandidatePoint& candidate, const CheckConfig& config);

}  // namespace mmx
