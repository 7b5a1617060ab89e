#pragma once

#include "confalyzer/catalog.hpp"
#include "confalyzer/error.hpp"
#include "confalyzer/gateway.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace confalyzer {

enum class Severity { NoIssue = 0, Minor = 1, Major = 2 };

// "no issue", "minor issue", "major issue".
std::string_view to_label(Severity s);
// Case-insensitive; also accepts "none", "minor", "major".
std::optional<Severity> parse_severity_label(std::string_view label);

/// Result of analyzing one criterion on one configurator.
struct Finding {
  int sample_id = 0;
  CriterionId criterion_id;
  Severity severity = Severity::NoIssue;
  std::optional<std::string> issue_description;
  std::optional<std::string> improvement_suggestion;
  std::string raw_text;
  double latency_s = 0.0;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  std::string created_at;

  bool operator==(const Finding&) const = default;
};

// Throws ParseError(ContractViolation) if texts disagree with the severity.
void validate_finding(const Finding& f);

class ParseError : public Error {
 public:
  enum class Kind { Unparseable, UnknownSeverity, ContractViolation };

  ParseError(Kind kind, const std::string& message, std::string raw)
      : Error(message), kind_(kind), raw_(std::move(raw)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& raw() const noexcept { return raw_; }

 private:
  Kind kind_;
  std::string raw_;
};

std::string_view to_string(ParseError::Kind kind);

/// Extracts the {severity, issue, improvement} record from model text.
///
/// Surrounding prose and ``` fences are tolerated. `created_at` defaults to now.
Finding parse_finding(const RawResponse& raw, int sample_id, const CriterionId& criterion_id,
                      std::optional<std::string> created_at = std::nullopt);

// The record a well-behaved model would emit for `f`.
std::string serialize_record(const Finding& f);

/// Combines per-segment findings of one cell: maximum severity, texts
/// concatenated in order with segment labels, telemetry summed.
Finding merge_segment_findings(std::span<const Finding> parts);

// Store representation (the findings.log record minus run_id/schema).
nlohmann::json finding_to_json(const Finding& f);
Finding finding_from_json(const nlohmann::json& j);

}  // namespace confalyzer
