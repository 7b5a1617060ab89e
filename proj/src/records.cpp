#include "confalyzer/records.hpp"

namespace confalyzer {

using nlohmann::json;

std::string FindingKey::str() const {
  return run_id + "/" + std::to_string(sample_id) + "/" + criterion_id.str();
}

std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::Pending:
      return "pending";
    case CellStatus::Done:
      return "done";
    case CellStatus::Failed:
      return "failed";
  }
  return "pending";
}

namespace {

CellStatus cell_status_from(const std::string& s) {
  if (s == "pending") return CellStatus::Pending;
  if (s == "done") return CellStatus::Done;
  if (s == "failed") return CellStatus::Failed;
  throw InvalidArgument("bad cell status \"" + s + "\"");
}

}  // namespace

std::string_view to_string(Question q) { return q == Question::Issue ? "issue" : "improvement"; }

json to_json(const ModelParams& p) {
  return json{{"model_name", p.model_name},
              {"temperature", p.temperature},
              {"frames_per_second", p.frames_per_second},
              {"max_context_tokens", p.max_context_tokens},
              {"max_output_tokens", p.max_output_tokens}};
}

ModelParams params_from_json(const json& j) {
  ModelParams p;
  p.model_name = j.value("model_name", p.model_name);
  p.temperature = j.value("temperature", p.temperature);
  p.frames_per_second = j.value("frames_per_second", p.frames_per_second);
  p.max_context_tokens = j.value("max_context_tokens", p.max_context_tokens);
  p.max_output_tokens = j.value("max_output_tokens", p.max_output_tokens);
  p.validate();
  return p;
}

json to_json(const RunManifest& m) {
  json criteria = json::array();
  for (const auto& c : m.criterion_ids) criteria.push_back(c.str());
  json cells = json::array();
  for (const auto& c : m.cells) {
    cells.push_back({{"sample_id", c.sample_id},
                     {"criterion_id", c.criterion_id.str()},
                     {"status", std::string(to_string(c.status))}});
  }
  return json{{"schema", kSchemaVersion},
              {"run_id", m.run_id},
              {"catalog_version", m.catalog_version},
              {"sample_ids", m.sample_ids},
              {"criterion_ids", std::move(criteria)},
              {"params", to_json(m.params)},
              {"backend_id", m.backend_id},
              {"started_at", m.started_at},
              {"finished_at", m.finished_at},
              {"cells", std::move(cells)}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.catalog_version = j.value("catalog_version", std::string{});
  m.sample_ids = j.at("sample_ids").get<std::vector<int>>();
  for (const auto& c : j.at("criterion_ids")) m.criterion_ids.push_back(CriterionId::parse(c.get<std::string>()));
  m.params = params_from_json(j.value("params", json::object()));
  m.backend_id = j.value("backend_id", std::string{});
  m.started_at = j.value("started_at", std::string{});
  m.finished_at = j.value("finished_at", std::string{});
  for (const auto& c : j.at("cells")) {
    m.cells.push_back(Cell{c.at("sample_id").get<int>(),
                           CriterionId::parse(c.at("criterion_id").get<std::string>()),
                           cell_status_from(c.at("status").get<std::string>())});
  }
  return m;
}

json to_json(const FailureRecord& f, const std::string& run_id) {
  return json{{"schema", kSchemaVersion},     {"run_id", run_id},
              {"sample_id", f.sample_id},     {"criterion_id", f.criterion_id.str()},
              {"error_kind", f.error_kind},   {"message", f.message},
              {"raw", f.raw},                 {"attempts", f.attempts},
              {"created_at", f.created_at}};
}

FailureRecord failure_from_json(const json& j) {
  FailureRecord f;
  f.sample_id = j.at("sample_id").get<int>();
  f.criterion_id = CriterionId::parse(j.at("criterion_id").get<std::string>());
  f.error_kind = j.at("error_kind").get<std::string>();
  f.message = j.value("message", std::string{});
  f.raw = j.value("raw", std::string{});
  f.attempts = j.value("attempts", 0);
  f.created_at = j.value("created_at", std::string{});
  return f;
}

json to_json(const Reviewer& r) { return json{{"id", r.id}, {"display_name", r.display_name}}; }

Reviewer reviewer_from_json(const json& j) {
  Reviewer r;
  r.id = j.at("id").get<std::string>();
  r.display_name = j.value("display_name", r.id);
  return r;
}

json key_to_json(const FindingKey& k) {
  return json{{"run_id", k.run_id}, {"sample_id", k.sample_id}, {"criterion_id", k.criterion_id.str()}};
}

FindingKey key_from_json(const json& j) {
  return FindingKey{j.at("run_id").get<std::string>(), j.at("sample_id").get<int>(),
                    CriterionId::parse(j.at("criterion_id").get<std::string>())};
}

json to_json(const Assignment& a) {
  auto j = key_to_json(a.key);
  j["schema"] = kSchemaVersion;
  j["severity"] = std::string(to_label(a.severity));
  j["reviewer_ids"] = a.reviewer_ids;
  j["created_at"] = a.created_at;
  return j;
}

Assignment assignment_from_json(const json& j) {
  Assignment a;
  a.key = key_from_json(j);
  const auto sev = parse_severity_label(j.at("severity").get<std::string>());
  if (!sev) throw InvalidArgument("bad severity in assignment record");
  a.severity = *sev;
  a.reviewer_ids = j.at("reviewer_ids").get<std::vector<std::string>>();
  a.created_at = j.value("created_at", std::string{});
  return a;
}

json to_json(const Judgment& jd) {
  auto j = key_to_json(jd.key);
  j["schema"] = kSchemaVersion;
  j["reviewer_id"] = jd.reviewer_id;
  j["issue_plausible"] = jd.issue_plausible;
  j["improvement_plausible"] = jd.improvement_plausible;
  j["submitted_at"] = jd.submitted_at;
  return j;
}

Judgment judgment_from_json(const json& j) {
  Judgment jd;
  jd.key = key_from_json(j);
  jd.reviewer_id = j.at("reviewer_id").get<std::string>();
  jd.issue_plausible = j.at("issue_plausible").get<bool>();
  jd.improvement_plausible = j.at("improvement_plausible").get<bool>();
  jd.submitted_at = j.value("submitted_at", std::string{});
  return jd;
}

}  // namespace confalyzer
