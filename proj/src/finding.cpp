#include "confalyzer/finding.hpp"

#include "confalyzer/util.hpp"

#include <algorithm>
#include <vector>

namespace confalyzer {

using nlohmann::json;

std::string_view to_label(Severity s) {
  switch (s) {
    case Severity::NoIssue:
      return "no issue";
    case Severity::Minor:
      return "minor issue";
    case Severity::Major:
      return "major issue";
  }
  return "no issue";
}

std::optional<Severity> parse_severity_label(std::string_view label) {
  auto norm = to_lower(trim(label));
  std::replace(norm.begin(), norm.end(), '_', ' ');
  std::replace(norm.begin(), norm.end(), '-', ' ');
  if (norm == "no issue" || norm == "none") return Severity::NoIssue;
  if (norm == "minor issue" || norm == "minor") return Severity::Minor;
  if (norm == "major issue" || norm == "major") return Severity::Major;
  return std::nullopt;
}

std::string_view to_string(ParseError::Kind kind) {
  switch (kind) {
    case ParseError::Kind::Unparseable:
      return "unparseable";
    case ParseError::Kind::UnknownSeverity:
      return "unknown_severity";
    case ParseError::Kind::ContractViolation:
      return "contract_violation";
  }
  return "unknown";
}

void validate_finding(const Finding& f) {
  const auto present = [](const std::optional<std::string>& s) {
    return s.has_value() && !trim(*s).empty();
  };
  const auto where = std::to_string(f.sample_id) + "/" + f.criterion_id.str();
  if (f.severity == Severity::NoIssue) {
    if (f.issue_description || f.improvement_suggestion) {
      throw ParseError(ParseError::Kind::ContractViolation,
                       where + ": \"no issue\" must not carry issue or improvement text",
                       f.raw_text);
    }
    return;
  }
  if (!present(f.issue_description)) {
    throw ParseError(ParseError::Kind::ContractViolation,
                     where + ": " + std::string(to_label(f.severity)) + " without issue description",
                     f.raw_text);
  }
  if (!present(f.improvement_suggestion)) {
    throw ParseError(ParseError::Kind::ContractViolation,
                     where + ": " + std::string(to_label(f.severity)) +
                         " without improvement suggestion",
                     f.raw_text);
  }
}

namespace {

std::optional<json> try_object(std::string_view text) {
  auto j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

// Balanced {...} spans, skipping braces inside string literals.
std::vector<std::string_view> object_spans(std::string_view text) {
  std::vector<std::string_view> spans;
  for (std::size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        spans.push_back(text.substr(start, i - start + 1));
        break;
      }
    }
  }
  return spans;
}

std::optional<json> extract_record(std::string_view text) {
  const auto has_severity = [](const json& j) { return j.contains("severity"); };
  if (auto j = try_object(trim(text)); j && has_severity(*j)) return j;
  for (auto span : object_spans(text)) {
    if (auto j = try_object(span); j && has_severity(*j)) return j;
  }
  return std::nullopt;
}

std::optional<std::string> text_field(const json& record, std::initializer_list<const char*> keys,
                                      const std::string& raw) {
  for (const char* k : keys) {
    if (!record.contains(k) || record[k].is_null()) continue;
    if (!record[k].is_string()) {
      throw ParseError(ParseError::Kind::Unparseable,
                       std::string("field \"") + k + "\" is not a string", raw);
    }
    auto value = trim(record[k].get<std::string>());
    if (value.empty()) return std::nullopt;
    return value;
  }
  return std::nullopt;
}

}  // namespace

Finding parse_finding(const RawResponse& raw, int sample_id, const CriterionId& criterion_id,
                      std::optional<std::string> created_at) {
  const auto record = extract_record(raw.text);
  if (!record) {
    throw ParseError(ParseError::Kind::Unparseable, "no structured record with a severity field",
                     raw.text);
  }
  const auto& sev = (*record)["severity"];
  if (!sev.is_string()) {
    throw ParseError(ParseError::Kind::UnknownSeverity, "severity is not a string", raw.text);
  }
  const auto severity = parse_severity_label(sev.get<std::string>());
  if (!severity) {
    throw ParseError(ParseError::Kind::UnknownSeverity,
                     "unknown severity label \"" + sev.get<std::string>() + "\"", raw.text);
  }

  Finding f;
  f.sample_id = sample_id;
  f.criterion_id = criterion_id;
  f.severity = *severity;
  f.issue_description = text_field(*record, {"issue", "issue_description"}, raw.text);
  f.improvement_suggestion =
      text_field(*record, {"improvement", "improvement_suggestion"}, raw.text);
  f.raw_text = raw.text;
  f.latency_s = raw.latency_s;
  f.input_tokens = raw.input_tokens;
  f.output_tokens = raw.output_tokens;
  f.created_at = created_at ? std::move(*created_at) : utc_now_iso8601();
  validate_finding(f);
  return f;
}

std::string serialize_record(const Finding& f) {
  json j = {{"severity", std::string(to_label(f.severity))}};
  if (f.issue_description) j["issue"] = *f.issue_description;
  if (f.improvement_suggestion) j["improvement"] = *f.improvement_suggestion;
  return j.dump();
}

Finding merge_segment_findings(std::span<const Finding> parts) {
  if (parts.empty()) throw InvalidArgument("cannot merge an empty list of findings");
  const auto& first = parts.front();
  for (const auto& p : parts) {
    if (p.sample_id != first.sample_id || p.criterion_id != first.criterion_id) {
      throw InvalidArgument("cannot merge findings of different cells: " +
                            std::to_string(first.sample_id) + "/" + first.criterion_id.str() +
                            " vs " + std::to_string(p.sample_id) + "/" + p.criterion_id.str());
    }
  }
  if (parts.size() == 1) return first;

  Finding out;
  out.sample_id = first.sample_id;
  out.criterion_id = first.criterion_id;
  std::size_t with_text = 0;
  for (const auto& p : parts) {
    out.severity = std::max(out.severity, p.severity);
    out.latency_s += p.latency_s;
    out.input_tokens += p.input_tokens;
    out.output_tokens += p.output_tokens;
    out.created_at = std::max(out.created_at, p.created_at);
    if (p.issue_description || p.improvement_suggestion) ++with_text;
  }

  const auto n = std::to_string(parts.size());
  const auto concat = [&](auto member) -> std::optional<std::string> {
    std::string joined;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const auto& text = parts[i].*member;
      if (!text) continue;
      if (!joined.empty()) joined += "\n\n";
      if (with_text > 1) joined += "[segment " + std::to_string(i + 1) + "/" + n + "] ";
      joined += *text;
    }
    if (joined.empty()) return std::nullopt;
    return joined;
  };
  out.issue_description = concat(&Finding::issue_description);
  out.improvement_suggestion = concat(&Finding::improvement_suggestion);

  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.raw_text += "\n";
    out.raw_text += "--- segment " + std::to_string(i + 1) + "/" + n + " ---\n" + parts[i].raw_text;
  }
  return out;
}

json finding_to_json(const Finding& f) {
  return json{{"sample_id", f.sample_id},
              {"criterion_id", f.criterion_id.str()},
              {"severity", std::string(to_label(f.severity))},
              {"issue", f.issue_description ? json(*f.issue_description) : json(nullptr)},
              {"improvement",
               f.improvement_suggestion ? json(*f.improvement_suggestion) : json(nullptr)},
              {"raw", f.raw_text},
              {"latency_s", f.latency_s},
              {"input_tokens", f.input_tokens},
              {"output_tokens", f.output_tokens},
              {"created_at", f.created_at}};
}

Finding finding_from_json(const json& j) {
  Finding f;
  f.sample_id = j.at("sample_id").get<int>();
  f.criterion_id = CriterionId::parse(j.at("criterion_id").get<std::string>());
  const auto sev = parse_severity_label(j.at("severity").get<std::string>());
  if (!sev) throw InvalidArgument("bad severity in finding record");
  f.severity = *sev;
  if (j.contains("issue") && !j["issue"].is_null()) f.issue_description = j["issue"].get<std::string>();
  if (j.contains("improvement") && !j["improvement"].is_null()) {
    f.improvement_suggestion = j["improvement"].get<std::string>();
  }
  f.raw_text = j.value("raw", std::string{});
  f.latency_s = j.value("latency_s", 0.0);
  f.input_tokens = j.value("input_tokens", std::uint64_t{0});
  f.output_tokens = j.value("output_tokens", std::uint64_t{0});
  f.created_at = j.value("created_at", std::string{});
  return f;
}

}  // namespace confalyzer
