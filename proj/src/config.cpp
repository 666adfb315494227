#include "minimax/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "minimax/expression.hpp"

namespace mmx {

namespace {

using Setter = std::function<void(CheckConfig&, const std::string&)>;

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument("bad value for " + key + ": " + s);
  return v;
}

long long to_int(const std::string& key, const std::string& s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument("bad value for " + key + ": " + s);
  return v;
}

template <class T>
Setter real(T CheckConfig::*field, const std::string& key) {
  return [field, key](CheckConfig& c, const std::string& s) { c.*field = to_double(key, s); };
}

Setter integer(int CheckConfig::*field, const std::string& key) {
  return [field, key](CheckConfig& c, const std::string& s) { c.*field = static_cast<int>(to_int(key, s)); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"tol_act", real(&CheckConfig::tol_act, "tol_act")},
      {"tol_kkt", real(&CheckConfig::tol_kkt, "tol_kkt")},
      {"tol_licq", real(&CheckConfig::tol_licq, "tol_licq")},
      {"tol_sc", real(&CheckConfig::tol_sc, "tol_sc")},
      {"tol_pd", real(&CheckConfig::tol_pd, "tol_pd")},
      {"tol_mfcq", real(&CheckConfig::tol_mfcq, "tol_mfcq")},
      {"tol_newton", real(&CheckConfig::tol_newton, "tol_newton")},
      {"tol_lp", real(&CheckConfig::tol_lp, "tol_lp")},
      {"max_iter", integer(&CheckConfig::max_iter, "max_iter")},
      {"slack_floor", real(&CheckConfig::slack_floor, "slack_floor")},
      {"cond_warning", real(&CheckConfig::cond_warning, "cond_warning")},
      {"lower_cone_samples", integer(&CheckConfig::lower_cone_samples, "lower_cone_samples")},
      {"cone_samples", integer(&CheckConfig::cone_samples, "cone_samples")},
      {"beta_resolution", integer(&CheckConfig::beta_resolution, "beta_resolution")},
      {"beta_cap", integer(&CheckConfig::beta_cap, "beta_cap")},
      {"vertex_cap", integer(&CheckConfig::vertex_cap, "vertex_cap")},
      {"face_cap", integer(&CheckConfig::face_cap, "face_cap")},
      {"refine_steps", integer(&CheckConfig::refine_steps, "refine_steps")},
      {"fd_step", real(&CheckConfig::fd_step, "fd_step")},
      {"fd_hess_step", real(&CheckConfig::fd_hess_step, "fd_hess_step")},
      {"seed", [](CheckConfig& c, const std::string& s) { c.seed = static_cast<std::uint64_t>(to_int("seed", s)); }},
      {"run_oracle",
       [](CheckConfig& c, const std::string& s) {
         if (s == "true" || s == "1") {
           c.run_oracle = true;
         } else if (s == "false" || s == "0") {
           c.run_oracle = false;
         } else {
           throw std::invalid_argument("bad value for run_oracle: " + s);
         }
       }},
      {"oracle_radius", real(&CheckConfig::oracle_radius, "oracle_radius")},
      {"oracle_step", real(&CheckConfig::oracle_step, "oracle_step")},
      {"oracle_eta", real(&CheckConfig::oracle_eta, "oracle_eta")},
      {"oracle_tol", real(&CheckConfig::oracle_tol, "oracle_tol")},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void CheckConfig::validate() const {
  for (double t : {tol_act, tol_kkt, tol_licq, tol_sc, tol_pd, tol_mfcq, tol_newton, tol_lp, slack_floor,
                   cond_warning, fd_step, fd_hess_step, oracle_radius, oracle_step, oracle_eta, oracle_tol}) {
    if (!(t > 0.0)) throw std::invalid_argument("config tolerances and steps must be positive");
  }
  for (int c : {max_iter, lower_cone_samples, cone_samples, beta_cap, vertex_cap, face_cap}) {
    if (c < 1) throw std::invalid_argument("config caps and counts must be >= 1");
  }
  if (beta_resolution < 2) throw std::invalid_argument("beta_resolution must be >= 2");
  if (refine_steps < 0) throw std::invalid_argument("refine_steps must be >= 0");
}

void CheckConfig::apply_overrides(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key " + key);
    it->second(*this, value);
  }
  validate();
}

std::vector<std::pair<std::string, std::string>> CheckConfig::entries() const {
  auto num = [](double v) { return format_number(v); };
  return {
      {"tol_act", num(tol_act)},
      {"tol_kkt", num(tol_kkt)},
      {"tol_licq", num(tol_licq)},
      {"tol_sc", num(tol_sc)},
      {"tol_pd", num(tol_pd)},
      {"tol_mfcq", num(tol_mfcq)},
      {"tol_newton", num(tol_newton)},
      {"tol_lp", num(tol_lp)},
      {"max_iter", std::to_string(max_iter)},
      {"slack_floor", num(slack_floor)},
      {"cond_warning", num(cond_warning)},
      {"lower_cone_samples", std::to_string(lower_cone_samples)},
      {"cone_samples", std::to_string(cone_samples)},
      {"beta_resolution", std::to_string(beta_resolution)},
      {"beta_cap", std::to_string(beta_cap)},
      {"vertex_cap", std::to_string(vertex_cap)},
      {"face_cap", std::to_string(face_cap)},
      {"refine_steps", std::to_string(refine_steps)},
      {"fd_step", num(fd_step)},
      {"fd_hess_step", num(fd_hess_step)},
      {"seed", std::to_string(seed)},
      {"run_oracle", run_oracle ? "true" : "false"},
      {"oracle_radius", num(oracle_radius)},
      {"oracle_step", num(oracle_step)},
      {"oracle_eta", num(oracle_eta)},
      {"oracle_tol", num(oracle_tol)},
  };
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied:
      return "satisfied";
    case Verdict::Violated:
      return "violated";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "satisfied") return Verdict::Satisfied;
  if (s == "violated") return Verdict::Violated;
  if (s == "inconclusive") return Verdict::Inconclusive;
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

const char* to_string(CheckRole r) {
  switch (r) {
    case CheckRole::Necessary:
      return "necessary";
    case CheckRole::Sufficient:
      return "sufficient";
    case CheckRole::Hypothesis:
      return "hypothesis";
    case CheckRole::Diagnostic:
      return "diagnostic";
  }
  return "?";
}

CheckRole role_from_string(const std::string& s) {
  if (s == "necessary") return CheckRole::Necessary;
  if (s == "sufficient") return CheckRole::Sufficient;
  if (s == "hypothesis") return CheckRole::Hypothesis;
  if (s == "diagnostic") return CheckRole::Diagnostic;
  throw std::invalid_argument("unknown role '" + s + "'");
}

}  // namespace mmx
