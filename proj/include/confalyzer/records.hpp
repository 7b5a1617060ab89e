#pragma once

// Record types shared by the store, the runner and the review workflow.

#include "confalyzer/catalog.hpp"
#include "confalyzer/finding.hpp"
#include "confalyzer/gateway.hpp"

#include <json.hpp>

#include <compare>
#include <string>
#include <vector>

namespace confalyzer {

inline constexpr int kSchemaVersion = 1;

struct FindingKey {
  std::string run_id;
  int sample_id = 0;
  CriterionId criterion_id;

  // "run/sample/criterion"
  std::string str() const;
  auto operator<=>(const FindingKey&) const = default;
  bool operator==(const FindingKey&) const = default;
};

enum class CellStatus { Pending, Done, Failed };
std::string_view to_string(CellStatus s);

struct Cell {
  int sample_id = 0;
  CriterionId criterion_id;
  CellStatus status = CellStatus::Pending;

  bool operator==(const Cell&) const = default;
};

/// One sample x criterion analysis run.
struct RunManifest {
  std::string run_id;
  std::string catalog_version;
  std::vector<int> sample_ids;
  std::vector<CriterionId> criterion_ids;
  ModelParams params;
  std::string backend_id;
  std::string started_at;
  std::string finished_at;  // empty while the run is incomplete
  std::vector<Cell> cells;  // samples outer, criteria inner

  bool operator==(const RunManifest&) const = default;
};

struct FailureRecord {
  int sample_id = 0;
  CriterionId criterion_id;
  std::string error_kind;
  std::string message;
  std::string raw;
  int attempts = 0;
  std::string created_at;

  bool operator==(const FailureRecord&) const = default;
};

struct Reviewer {
  std::string id;
  std::string display_name;

  bool operator==(const Reviewer&) const = default;
};

struct Assignment {
  FindingKey key;
  Severity severity = Severity::Minor;
  std::vector<std::string> reviewer_ids;
  std::string created_at;

  bool operator==(const Assignment&) const = default;
};

enum class Question { Issue, Improvement };
std::string_view to_string(Question q);

struct Judgment {
  FindingKey key;
  std::string reviewer_id;
  bool issue_plausible = false;
  bool improvement_plausible = false;
  std::string submitted_at;

  bool answer(Question q) const { return q == Question::Issue ? issue_plausible : improvement_plausible; }
  bool operator==(const Judgment&) const = default;
};

// JSON forms as written to the store. Every record carries "schema".
nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FailureRecord& f, const std::string& run_id);
FailureRecord failure_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Reviewer& r);
Reviewer reviewer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Assignment& a);
Assignment assignment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Judgment& j);
Judgment judgment_from_json(const nlohmann::json& j);
nlohmann::json key_to_json(const FindingKey& k);
FindingKey key_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

}  // namespace confalyzer
