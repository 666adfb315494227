#pragma once

#include <string>

#include "json.hpp"
#include "minimax/certifier.hpp"

namespace mmx {

using Json = nlohmann::ordered_json;

/// Thrown when a JSON document is not a report of the pinned schema version.
class ReportSchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Doubles are written as shortest round-trip numbers; non-finite values as
/// the strings "inf", "-inf", "nan".
Json to_json(const CertificateReport& report);
CertificateReport report_from_json(const Json& doc);

/// Two-space indented JSON with a trailing newline.
std::string dump_report(const CertificateReport& report);
CertificateReport parse_report(const std::string& text);

/// Human-readable summary, computed from the JSON form only.
std::string render_summary(const Json& doc);
std::string render_summary(const CertificateReport& report);

Json number_to_json(double v);
double number_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

}  // namespace mmx
