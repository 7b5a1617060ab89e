#include "confalyzer/store.hpp"

#include "confalyzer/error.hpp"
#include "confalyzer/util.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

namespace confalyzer {

using nlohmann::json;
namespace fs = std::filesystem;

AppendLog::AppendLog(fs::path path) : path_(std::move(path)) {
  fs::create_directories(path_.parent_path());
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw StoreError("cannot open " + path_.string() + ": " + std::strerror(errno));
  auto lock_path = path_;
  lock_path += ".lock";
  lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) {
    ::close(fd_);
    throw StoreError("cannot open " + lock_path.string() + ": " + std::strerror(errno));
  }
}

AppendLog::~AppendLog() {
  if (fd_ >= 0) ::close(fd_);
  if (lock_fd_ >= 0) ::close(lock_fd_);
}

void AppendLog::append(const json& record) {
  std::lock_guard guard(mutex_);

  constexpr int kLockAttempts = 200;
  int attempt = 0;
  while (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    if (errno != EWOULDBLOCK && errno != EINTR) {
      throw StoreError("flock " + path_.string() + ": " + std::strerror(errno));
    }
    if (++attempt >= kLockAttempts) {
      throw StoreLockConflict("another writer holds the lock on " + path_.string());
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  struct Unlock {
    int fd;
    ~Unlock() { ::flock(fd, LOCK_UN); }
  } unlock{lock_fd_};

  std::string line = record.dump();
  line.push_back('\n');

  // Terminate a partial line left by a crashed writer so it stays isolated.
  struct stat st {};
  if (::fstat(fd_, &st) == 0 && st.st_size > 0) {
    char last = '\n';
    if (::pread(fd_, &last, 1, st.st_size - 1) == 1 && last != '\n') line.insert(line.begin(), '\n');
  }

  const char* p = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    const auto n = ::write(fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StoreError("write " + path_.string() + ": " + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  ::fdatasync(fd_);
}

LoadResult<LogLine> read_log(const fs::path& path) {
  LoadResult<LogLine> out;
  if (!fs::exists(path)) return out;
  const auto content = read_file(path);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    const auto end = nl == std::string::npos ? content.size() : nl;
    ++line_no;
    const std::string_view line(content.data() + pos, end - pos);
    if (!trim(line).empty()) {
      auto j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        out.corrupt.push_back({line_no, nl == std::string::npos ? "truncated record" : "malformed record"});
      } else {
        out.records.push_back({line_no, std::move(j)});
      }
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return out;
}

namespace {

template <class T, class Convert>
LoadResult<T> load_records(const fs::path& path, Convert convert) {
  LoadResult<T> out;
  auto raw = read_log(path);
  out.corrupt = std::move(raw.corrupt);
  for (const auto& l : raw.records) {
    try {
      out.records.push_back(convert(l.record));
    } catch (const std::exception& e) {
      out.corrupt.push_back({l.line, std::string("invalid record: ") + e.what()});
    }
  }
  std::sort(out.corrupt.begin(), out.corrupt.end(),
            [](const CorruptLine& a, const CorruptLine& b) { return a.line < b.line; });
  return out;
}

// Keeps the last record per key, preserving the append order of survivors.
template <class T, class KeyOf>
void keep_latest(std::vector<T>& records, KeyOf key_of) {
  std::map<decltype(key_of(records.front())), std::size_t> last;
  for (std::size_t i = 0; i < records.size(); ++i) last[key_of(records[i])] = i;
  std::vector<T> kept;
  kept.reserve(last.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (last[key_of(records[i])] == i) kept.push_back(std::move(records[i]));
  }
  records = std::move(kept);
}

json sample_to_json(const ConfiguratorSample& s) {
  return json{{"id", s.id},
              {"industry", s.industry},
              {"name", s.name},
              {"duration", format_duration(s.duration_s)},
              {"url", s.url},
              {"recording_path", s.recording_path.string()},
              {"recording_sha256", s.recording_sha256}};
}

ConfiguratorSample sample_from_json(const json& j) {
  ConfiguratorSample s;
  s.id = j.at("id").get<int>();
  s.industry = j.at("industry").get<std::string>();
  s.name = j.at("name").get<std::string>();
  s.duration_s = parse_duration(j.at("duration").get<std::string>());
  s.url = j.value("url", std::string{});
  s.recording_path = j.at("recording_path").get<std::string>();
  s.recording_sha256 = j.value("recording_sha256", std::string{});
  return s;
}

}  // namespace

Store::Store(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "runs", ec);
  fs::create_directories(root_ / "review", ec);
  if (!fs::is_directory(root_)) throw StoreError("cannot create store at " + root_.string());
  root_ = fs::canonical(root_);
}

fs::path Store::run_dir(const std::string& run_id) const { return root_ / "runs" / run_id; }

AppendLog& Store::log(const fs::path& path) {
  std::lock_guard lock(logs_mutex_);
  auto& slot = logs_[path.string()];
  if (!slot) slot = std::make_unique<AppendLog>(path);
  return *slot;
}

Store::IngestResult Store::ingest_dataset(const fs::path& manifest) {
  auto samples = parse_dataset_manifest(read_file(manifest), manifest.parent_path());
  IngestResult result;
  result.changed = this->samples() != samples;
  if (result.changed) {
    json arr = json::array();
    for (const auto& s : samples) arr.push_back(sample_to_json(s));
    write_file_atomic(root_ / "dataset.json",
                      json{{"schema", kSchemaVersion}, {"samples", std::move(arr)}}.dump(2) + "\n");
  }
  result.samples = std::move(samples);
  return result;
}

std::vector<ConfiguratorSample> Store::samples() const {
  const auto path = root_ / "dataset.json";
  if (!fs::exists(path)) return {};
  std::vector<ConfiguratorSample> out;
  try {
    const json doc = json::parse(read_file(path));
    for (const auto& s : doc.at("samples")) out.push_back(sample_from_json(s));
  } catch (const json::exception& e) {
    throw StoreError("corrupt dataset.json: " + std::string(e.what()));
  }
  return out;
}

std::vector<int> Store::changed_recordings() const {
  std::vector<int> changed;
  for (const auto& s : samples()) {
    if (!fs::exists(s.recording_path) || sha256_file(s.recording_path) != s.recording_sha256) {
      changed.push_back(s.id);
    }
  }
  return changed;
}

void Store::save_catalog_snapshot(const Catalog& catalog) {
  write_file_atomic(root_ / "catalog.json", dump_catalog(catalog));
}

std::optional<Catalog> Store::load_catalog_snapshot() const {
  const auto path = root_ / "catalog.json";
  if (!fs::exists(path)) return std::nullopt;
  return load_catalog_file(path);
}

std::vector<std::string> Store::run_ids() const {
  std::vector<std::pair<std::string, std::string>> runs;  // (started_at, id)
  const auto dir = root_ / "runs";
  if (!fs::exists(dir)) return {};
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!fs::exists(entry.path() / "manifest.json")) continue;
    const auto id = entry.path().filename().string();
    std::string started;
    try {
      started = json::parse(read_file(entry.path() / "manifest.json")).value("started_at", "");
    } catch (const std::exception&) {
      continue;
    }
    runs.emplace_back(started, id);
  }
  std::sort(runs.begin(), runs.end());
  std::vector<std::string> ids;
  for (auto& [_, id] : runs) ids.push_back(std::move(id));
  return ids;
}

bool Store::has_run(const std::string& run_id) const {
  return !run_id.empty() && run_id.find('/') == std::string::npos &&
         fs::exists(run_dir(run_id) / "manifest.json");
}

void Store::require_run(const std::string& run_id) const {
  if (!has_run(run_id)) throw StoreError("unknown run \"" + run_id + "\"");
}

void Store::save_manifest(const RunManifest& manifest) {
  if (manifest.run_id.empty() || manifest.run_id.find('/') != std::string::npos) {
    throw StoreError("invalid run id \"" + manifest.run_id + "\"");
  }
  fs::create_directories(run_dir(manifest.run_id));
  write_file_atomic(run_dir(manifest.run_id) / "manifest.json", to_json(manifest).dump(2) + "\n");
}

RunManifest Store::load_manifest(const std::string& run_id) const {
  require_run(run_id);
  try {
    return manifest_from_json(json::parse(read_file(run_dir(run_id) / "manifest.json")));
  } catch (const json::exception& e) {
    throw StoreError("corrupt manifest for run " + run_id + ": " + e.what());
  }
}

void Store::append_finding(const std::string& run_id, const Finding& finding) {
  require_run(run_id);
  auto j = finding_to_json(finding);
  j["schema"] = kSchemaVersion;
  j["run_id"] = run_id;
  log(run_dir(run_id) / "findings.log").append(j);
}

LoadResult<Finding> Store::load_findings(const std::string& run_id, const FindingFilter& filter) const {
  require_run(run_id);
  auto out = load_records<Finding>(run_dir(run_id) / "findings.log",
                                   [](const json& j) { return finding_from_json(j); });
  if (!out.records.empty()) {
    keep_latest(out.records, [](const Finding& f) { return std::make_pair(f.sample_id, f.criterion_id.str()); });
  }
  std::erase_if(out.records, [&](const Finding& f) {
    return (filter.sample_id && f.sample_id != *filter.sample_id) ||
           (filter.criterion_id && f.criterion_id != *filter.criterion_id) ||
           (filter.severity && f.severity != *filter.severity);
  });
  return out;
}

void Store::append_failure(const std::string& run_id, const FailureRecord& failure) {
  require_run(run_id);
  log(run_dir(run_id) / "failures.log").append(to_json(failure, run_id));
}

LoadResult<FailureRecord> Store::load_failures(const std::string& run_id) const {
  require_run(run_id);
  return load_records<FailureRecord>(run_dir(run_id) / "failures.log",
                                     [](const json& j) { return failure_from_json(j); });
}

void Store::save_reviewers(std::span<const Reviewer> reviewers) {
  json arr = json::array();
  for (const auto& r : reviewers) arr.push_back(to_json(r));
  write_file_atomic(root_ / "review" / "reviewers.json", arr.dump(2) + "\n");
}

std::vector<Reviewer> Store::load_reviewers() const {
  const auto path = root_ / "review" / "reviewers.json";
  if (!fs::exists(path)) return {};
  std::vector<Reviewer> out;
  for (const auto& j : json::parse(read_file(path))) out.push_back(reviewer_from_json(j));
  return out;
}

void Store::append_assignments(std::span<const Assignment> assignments) {
  auto& l = log(root_ / "review" / "assignments.log");
  for (const auto& a : assignments) l.append(to_json(a));
}

LoadResult<Assignment> Store::load_assignments(const std::optional<std::string>& run_id) const {
  auto out = load_records<Assignment>(root_ / "review" / "assignments.log",
                                      [](const json& j) { return assignment_from_json(j); });
  if (run_id) std::erase_if(out.records, [&](const Assignment& a) { return a.key.run_id != *run_id; });
  if (!out.records.empty()) keep_latest(out.records, [](const Assignment& a) { return a.key; });
  return out;
}

void Store::append_judgment(const Judgment& judgment) {
  log(root_ / "review" / "judgments.log").append(to_json(judgment));
}

LoadResult<Judgment> Store::load_judgments(const std::optional<std::string>& run_id) const {
  auto out = load_records<Judgment>(root_ / "review" / "judgments.log",
                                    [](const json& j) { return judgment_from_json(j); });
  if (run_id) std::erase_if(out.records, [&](const Judgment& j) { return j.key.run_id != *run_id; });
  return out;
}

}  // namespace confalyzer
