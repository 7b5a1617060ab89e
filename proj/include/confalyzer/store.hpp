#pragma once

#include "confalyzer/catalog.hpp"
#include "confalyzer/dataset.hpp"
#include "confalyzer/finding.hpp"
#include "confalyzer/records.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace confalyzer {

struct CorruptLine {
  std::size_t line = 0;  // 1-based
  std::string error;
};

template <class T>
struct LoadResult {
  std::vector<T> records;
  std::vector<CorruptLine> corrupt;
};

/// Append-only JSON-lines file.
///
/// Each append is one write(2) of a full line followed by fdatasync, taken
/// under an exclusive flock on "<path>.lock". A crash can therefore leave at
/// most one partial trailing line, which readers report as corrupt.
class AppendLog {
 public:
  explicit AppendLog(std::filesystem::path path);
  ~AppendLog();
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  // Throws StoreLockConflict if another writer holds the lock for too long.
  void append(const nlohmann::json& record);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  int lock_fd_ = -1;
  std::mutex mutex_;
};

struct LogLine {
  std::size_t line = 0;  // 1-based
  nlohmann::json record;
};

// Parsed lines of a log; missing file reads as empty.
LoadResult<LogLine> read_log(const std::filesystem::path& path);

struct FindingFilter {
  std::optional<int> sample_id;
  std::optional<CriterionId> criterion_id;
  std::optional<Severity> severity;
};

/// File-backed store rooted at one directory:
///
///   dataset.json  catalog.json
///   runs/<run_id>/{manifest.json, findings.log, failures.log}
///   review/{reviewers.json, assignments.log, judgments.log}
class Store {
 public:
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path run_dir(const std::string& run_id) const;

  struct IngestResult {
    std::vector<ConfiguratorSample> samples;
    bool changed = false;
  };
  // Validates the manifest and persists the samples. Identical re-ingest is a no-op.
  IngestResult ingest_dataset(const std::filesystem::path& manifest);
  std::vector<ConfiguratorSample> samples() const;
  // Ids of samples whose recording no longer matches the ingest-time hash.
  std::vector<int> changed_recordings() const;

  void save_catalog_snapshot(const Catalog& catalog);
  std::optional<Catalog> load_catalog_snapshot() const;

  // Sorted by start time, oldest first.
  std::vector<std::string> run_ids() const;
  bool has_run(const std::string& run_id) const;
  void save_manifest(const RunManifest& manifest);
  RunManifest load_manifest(const std::string& run_id) const;

  void append_finding(const std::string& run_id, const Finding& finding);
  // Latest record per (sample, criterion), in append order of those records.
  LoadResult<Finding> load_findings(const std::string& run_id, const FindingFilter& filter = {}) const;
  void append_failure(const std::string& run_id, const FailureRecord& failure);
  LoadResult<FailureRecord> load_failures(const std::string& run_id) const;

  void save_reviewers(std::span<const Reviewer> reviewers);
  std::vector<Reviewer> load_reviewers() const;
  void append_assignments(std::span<const Assignment> assignments);
  // Latest assignment per finding key.
  LoadResult<Assignment> load_assignments(const std::optional<std::string>& run_id = std::nullopt) const;
  void append_judgment(const Judgment& judgment);
  // Full history in append order.
  LoadResult<Judgment> load_judgments(const std::optional<std::string>& run_id = std::nullopt) const;

 private:
  AppendLog& log(const std::filesystem::path& path);
  void require_run(const std::string& run_id) const;

  std::filesystem::path root_;
  std::mutex logs_mutex_;
  std::map<std::string, std::unique_ptr<AppendLog>> logs_;
};

}  // namespace confalyzer
