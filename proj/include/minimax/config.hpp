#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minimax/linalg.hpp"

namespace mmx {

/// Every tolerance, sample count and cap used by the checks.
struct CheckConfig {
  double tol_act = 1e-8;     // activity / multiplier-zero threshold
  double tol_kkt = 1e-8;     // KKT residual (infinity norm)
  double tol_licq = 1e-8;    // smallest singular value of active gradients
  double tol_sc = 1e-8;      // strict complementarity margin
  double tol_pd = 1e-8;      // definiteness margin
  double tol_mfcq = 1e-8;    // optimal t of the MFCQ LP
  double tol_newton = 1e-10; // Newton termination residual
  double tol_lp = 1e-9;      // feasibility of LP-derived multipliers

  int max_iter = 30;
  double slack_floor = 1e-12;    // w0 = sqrt(max(slack_floor, -g)) on active seeds
  double cond_warning = 1e12;    // condition estimate flagged on K(x)

  int lower_cone_samples = 256;  // SOSC sampling on a genuine lower cone
  int cone_samples = 128;        // upper critical cone directions
  int beta_resolution = 5;       // Clarke grid points per beta index
  int beta_cap = 16;             // max |beta| for selector enumeration
  int vertex_cap = 12;           // max n1 + |I| for vertex enumeration
  int face_cap = 12;             // max inequality rows for face enumeration
  int refine_steps = 60;         // local refinement of sampled minima

  double fd_step = 1e-5;         // value-function gradient finite differences
  double fd_hess_step = 1e-4;    // value-function Hessian finite differences

  std::uint64_t seed = 20240531;

  // Definition-1.1 grid oracle (only run when requested).
  bool run_oracle = false;
  double oracle_radius = 0.1;
  double oracle_step = 1e-3;
  double oracle_eta = 2.0;
  double oracle_tol = 1e-9;

  /// Throws std::invalid_argument when a tolerance is nonpositive or a cap < 1.
  void validate() const;
  /// Apply "key=value" lines ('#' comments allowed). Unknown keys throw.
  void apply_overrides(const std::string& text);
  /// Stable key/value listing used in reports.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

enum class Verdict { Satisfied, Violated, Inconclusive };

const char* to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

/// What a check means for the overall certificate.
enum class CheckRole {
  Necessary,   // violation refutes local minimaxity
  Sufficient,  // satisfaction certifies it
  Hypothesis,  // regularity assumption of a theorem
  Diagnostic,  // informational
};

const char* to_string(CheckRole r);
CheckRole role_from_string(const std::string& s);

/// One verdict with its numeric evidence.
struct ConditionResult {
  std::string name;
  Verdict status = Verdict::Inconclusive;
  CheckRole role = CheckRole::Diagnostic;
  double margin = 0.0;
  double tolerance = 0.0;
  std::optional<Vector> witness;
  std::string detail;

  bool satisfied() const { return status == Verdict::Satisfied; }
  bool violated() const { return status == Verdict::Violated; }
};

}  // namespace mmx
