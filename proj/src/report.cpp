#include "minimax/report.hpp"

#include <cmath>
#include <sstream>

namespace mmx {

Json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v == 0.0 ? 0.0 : v;
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  throw ReportSchemaError("expected a number, got " + j.dump());
}

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(number_to_json(v(i)));
  return arr;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ReportSchemaError("expected an array, got " + j.dump());
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = number_from_json(j[i]);
  return v;
}

namespace {

const Json& field(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw ReportSchemaError(std::string("missing field '") + key + "'");
  return obj.at(key);
}

std::string string_field(const Json& obj, const char* key) {
  const Json& j = field(obj, key);
  if (!j.is_string()) throw ReportSchemaError(std::string("field '") + key + "' must be a string");
  return j.get<std::string>();
}

Json config_to_json(const CheckConfig& c) {
  Json out = Json::object();
  for (const auto& [key, value] : c.entries()) out[key] = Json::parse(value);
  return out;
}

CheckConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ReportSchemaError("config must be an object");
  std::string text;
  for (const auto& [key, value] : j.items()) text += key + "=" + value.dump() + "\n";
  CheckConfig c;
  try {
    c.apply_overrides(text);
  } catch (const std::exception& e) {
    throw ReportSchemaError(std::string("config: ") + e.what());
  }
  return c;
}

std::string fmt(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return format_number(j.get<double>());
  return j.dump();
}

std::string fmt_vector(const Json& arr) {
  std::string s = "(";
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (i) s += ", ";
    s += fmt(arr[i]);
  }
  return s + ")";
}

}  // namespace

Json to_json(const CertificateReport& r) {
  Json doc = Json::object();
  doc["version"] = r.version;
  doc["tool_version"] = r.tool_version;
  doc["command"] = r.command;
  doc["problem_digest"] = r.problem_digest;
  doc["config"] = config_to_json(r.config);
  Json cand = Json::object();
  cand["x"] = vector_to_json(r.candidate.x);
  cand["y"] = vector_to_json(r.candidate.y);
  if (r.candidate.mu) cand["mu"] = vector_to_json(*r.candidate.mu);
  if (r.candidate.lambda) cand["lambda"] = vector_to_json(*r.candidate.lambda);
  if (r.candidate.u) cand["u"] = vector_to_json(*r.candidate.u);
  if (r.candidate.v) cand["v"] = vector_to_json(*r.candidate.v);
  doc["candidate"] = cand;
  doc["path"] = to_string(r.path);
  doc["path_reason"] = r.path_reason;
  doc["sign_convention"] = r.sign_convention;
  Json results = Json::array();
  for (const auto& c : r.results) {
    Json e = Json::object();
    e["name"] = c.name;
    e["role"] = to_string(c.role);
    e["status"] = to_string(c.status);
    e["margin"] = number_to_json(c.margin);
    e["tolerance"] = number_to_json(c.tolerance);
    if (c.witness) e["witness"] = vector_to_json(*c.witness);
    e["detail"] = c.detail;
    results.push_back(e);
  }
  doc["results"] = results;
  Json q = Json::object();
  for (const auto& [name, value] : r.quantities) q[name] = vector_to_json(value);
  doc["quantities"] = q;
  doc["verdict"] = to_string(r.verdict);
  return doc;
}

CertificateReport report_from_json(const Json& doc) {
  if (!doc.is_object()) throw ReportSchemaError("report must be a JSON object");
  CertificateReport r;
  r.version = string_field(doc, "version");
  if (r.version != kReportVersion) {
    throw ReportSchemaError("unsupported report version '" + r.version + "' (expected " + kReportVersion + ")");
  }
  try {
    r.tool_version = string_field(doc, "tool_version");
    r.command = string_field(doc, "command");
    r.problem_digest = string_field(doc, "problem_digest");
    r.config = config_from_json(field(doc, "config"));
    const Json& cand = field(doc, "candidate");
    r.candidate.x = vector_from_json(field(cand, "x"));
    r.candidate.y = vector_from_json(field(cand, "y"));
    if (cand.contains("mu")) r.candidate.mu = vector_from_json(cand["mu"]);
    if (cand.contains("lambda")) r.candidate.lambda = vector_from_json(cand["lambda"]);
    if (cand.contains("u")) r.candidate.u = vector_from_json(cand["u"]);
    if (cand.contains("v")) r.candidate.v = vector_from_json(cand["v"]);
    r.path = path_from_string(string_field(doc, "path"));
    r.path_reason = string_field(doc, "path_reason");
    r.sign_convention = string_field(doc, "sign_convention");
    const Json& results = field(doc, "results");
    if (!results.is_array()) throw ReportSchemaError("results must be an array");
    for (const Json& e : results) {
      ConditionResult c;
      c.name = string_field(e, "name");
      c.role = role_from_string(string_field(e, "role"));
      c.status = verdict_from_string(string_field(e, "status"));
      c.margin = number_from_json(field(e, "margin"));
      c.tolerance = number_from_json(field(e, "tolerance"));
      if (e.contains("witness")) c.witness = vector_from_json(e["witness"]);
      c.detail = string_field(e, "detail");
      r.results.push_back(std::move(c));
    }
    const Json& q = field(doc, "quantities");
    if (!q.is_object()) throw ReportSchemaError("quantities must be an object");
    for (const auto& [name, value] : q.items()) r.quantities.emplace_back(name, vector_from_json(value));
    r.verdict = overall_from_string(string_field(doc, "verdict"));
  } catch (const ReportSchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw ReportSchemaError(e.what());
  }
  return r;
}

std::string dump_report(const CertificateReport& report) { return to_json(report).dump(2) + "\n"; }

CertificateReport parse_report(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ReportSchemaError(std::string("invalid JSON: ") + e.what());
  }
  return report_from_json(doc);
}

std::string render_summary(const Json& doc) {
  std::ostringstream out;
  out << string_field(doc, "command") << " report (tool " << string_field(doc, "tool_version") << ", schema "
      << string_field(doc, "version") << ")\n";
  out << "problem " << string_field(doc, "problem_digest") << "\n";
  const Json& cand = field(doc, "candidate");
  out << "candidate x = " << fmt_vector(field(cand, "x")) << ", y = " << fmt_vector(field(cand, "y")) << "\n";
  out << "path: " << string_field(doc, "path");
  const std::string reason = string_field(doc, "path_reason");
  if (!reason.empty()) out << " (" << reason << ")";
  out << "\n";
  for (const Json& e : field(doc, "results")) {
    out << "  [" << string_field(e, "status") << "] " << string_field(e, "name") << " <" << string_field(e, "role")
        << "> margin " << fmt(field(e, "margin")) << " tol " << fmt(field(e, "tolerance"));
    if (e.contains("witness")) out << " witness " << fmt_vector(e["witness"]);
    const std::string detail = string_field(e, "detail");
    if (!detail.empty()) out << "\n      " << detail;
    out << "\n";
  }
  const Json& q = field(doc, "quantities");
  for (const auto& [name, value] : q.items()) out << "  " << name << " = " << fmt_vector(value) << "\n";
  out << "verdict: " << string_field(doc, "verdict") << "\n";
  return out.str();
}

std::string render_summary(const CertificateReport& report) { return render_summary(to_json(report)); }

}  // namespace mmx
