#include "confalyzer/runner.hpp"

#include "confalyzer/util.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <map>
#include <random>
#include <set>
#include <thread>

namespace confalyzer {

namespace {

// Held for the lifetime of one run_matrix call so two processes cannot
// execute the same run concurrently.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw StoreError("cannot open " + path.string() + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw StoreLockConflict("run is already executing (" + path.string() + ")");
    }
  }
  ~RunLock() {
    if (fd_ >= 0) ::close(fd_);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  int fd_ = -1;
};

struct CellOutcome {
  std::optional<Finding> finding;
  std::optional<FailureRecord> failure;
};

Finding parse_with_repair(const AnalyzeRequest& request, Backend& backend, const RetryPolicy& retry) {
  const RawResponse first = analyze(request, backend, retry);
  try {
    return parse_finding(first, request.sample_id, request.criterion_id);
  } catch (const ParseError& e) {
    if (e.kind() != ParseError::Kind::Unparseable || !backend.supports_repair()) throw;
  }
  AnalyzeRequest again = request;
  again.user_text += kRepairInstruction;
  RawResponse second = analyze(again, backend, retry);
  second.latency_s += first.latency_s;
  second.input_tokens += first.input_tokens;
  second.output_tokens += first.output_tokens;
  return parse_finding(second, request.sample_id, request.criterion_id);
}

CellOutcome execute_cell(const ConfiguratorSample& sample, const Criterion& criterion,
                         const PromptTemplatePair& templates, Backend& backend,
                         const ModelParams& params, const RetryPolicy& retry) {
  CellOutcome out;
  FailureRecord failure;
  failure.sample_id = sample.id;
  failure.criterion_id = criterion.id;
  try {
    const RenderedPrompt prompt = render(templates, criterion, sample);
    const SegmentPlan plan =
        plan_segments(static_cast<double>(sample.duration_s), params, estimate_prompt_tokens(prompt));

    std::vector<Finding> parts;
    for (const auto& seg : plan.segments) {
      AnalyzeRequest req;
      req.sample_id = sample.id;
      req.criterion_id = criterion.id;
      req.video.path = sample.recording_path;
      req.video.duration_s = static_cast<double>(sample.duration_s);
      if (plan.segments.size() > 1) req.video.segment = seg;
      req.system_text = prompt.system_text;
      req.user_text = prompt.user_text;
      req.params = params;
      parts.push_back(parse_with_repair(req, backend, retry));
    }
    out.finding = merge_segment_findings(parts);
    return out;
  } catch (const GatewayError& e) {
    failure.error_kind = std::string(to_string(e.kind()));
    failure.message = e.what();
    failure.attempts = e.attempts();
  } catch (const ParseError& e) {
    failure.error_kind = std::string(to_string(e.kind()));
    failure.message = e.what();
    failure.raw = e.raw();
    failure.attempts = 1;
  } catch (const Error& e) {
    failure.error_kind = "error";
    failure.message = e.what();
  }
  failure.created_at = utc_now_iso8601();
  out.failure = std::move(failure);
  return out;
}

}  // namespace

std::string make_run_id() {
  std::random_device rd;
  std::uniform_int_distribution<unsigned> dist(0, 0xffff);
  std::string ts = utc_now_iso8601();  // 2026-10-15T09:12:44.123Z
  std::string compact;
  for (char ch : ts.substr(0, 19)) {
    if (ch != '-' && ch != ':') compact += ch;
  }
  char suffix[8];
  std::snprintf(suffix, sizeof suffix, "%04x", dist(rd));
  return "run-" + compact + "Z-" + suffix;
}

std::vector<Cell> plan_cells(std::span<const int> sample_ids, std::span<const CriterionId> criterion_ids) {
  std::vector<Cell> cells;
  cells.reserve(sample_ids.size() * criterion_ids.size());
  for (int sid : sample_ids) {
    for (const auto& cid : criterion_ids) cells.push_back(Cell{sid, cid, CellStatus::Pending});
  }
  return cells;
}

RunResult run_matrix(Store& store, std::span<const ConfiguratorSample> samples, const Catalog& catalog,
                     const PromptTemplatePair& templates, Backend& backend, const RunOptions& options) {
  if (samples.empty()) throw InvalidArgument("no samples");
  if (catalog.empty()) throw InvalidArgument("empty catalog");
  if (options.max_in_flight == 0) throw InvalidArgument("max_in_flight must be at least 1");
  validate_templates(templates);

  std::map<int, const ConfiguratorSample*> by_id;
  for (const auto& s : samples) {
    if (!by_id.emplace(s.id, &s).second) throw InvalidArgument("duplicate sample id " + std::to_string(s.id));
  }

  RunManifest manifest;
  std::set<std::pair<int, std::string>> done;
  if (options.resume_run_id) {
    manifest = store.load_manifest(*options.resume_run_id);
    for (int sid : manifest.sample_ids) {
      if (!by_id.count(sid)) throw InvalidArgument("resumed run references unknown sample " + std::to_string(sid));
    }
    for (const auto& cid : manifest.criterion_ids) catalog.at(cid);
    for (const auto& f : store.load_findings(manifest.run_id).records) {
      done.emplace(f.sample_id, f.criterion_id.str());
    }
  } else {
    options.params.validate();
    manifest.run_id = options.run_id.empty() ? make_run_id() : options.run_id;
    if (store.has_run(manifest.run_id)) throw InvalidArgument("run " + manifest.run_id + " already exists");
    manifest.catalog_version = catalog.version();
    for (const auto& s : samples) manifest.sample_ids.push_back(s.id);
    manifest.criterion_ids = catalog.ids();
    manifest.params = options.params;
    manifest.backend_id = backend.id();
    manifest.started_at = utc_now_iso8601();
    manifest.cells = plan_cells(manifest.sample_ids, manifest.criterion_ids);
    store.save_manifest(manifest);
  }

  RunLock lock(store.run_dir(manifest.run_id) / "run.lock");

  // Indices into manifest.cells that still need a backend call.
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < manifest.cells.size(); ++i) {
    auto& cell = manifest.cells[i];
    if (done.count({cell.sample_id, cell.criterion_id.str()})) {
      cell.status = CellStatus::Done;
    } else {
      cell.status = CellStatus::Pending;
      todo.push_back(i);
    }
  }
  manifest.finished_at.clear();
  store.save_manifest(manifest);

  const std::size_t limit = options.cell_limit ? std::min(*options.cell_limit, todo.size()) : todo.size();
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> executed{0};
  std::mutex status_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t n = next.fetch_add(1);
      if (n >= limit) return;
      Cell& cell = manifest.cells[todo[n]];
      const auto& sample = *by_id.at(cell.sample_id);
      const auto& criterion = catalog.at(cell.criterion_id);
      CellOutcome outcome = execute_cell(sample, criterion, templates, backend, manifest.params, options.retry);
      if (outcome.finding) {
        store.append_finding(manifest.run_id, *outcome.finding);
      } else {
        store.append_failure(manifest.run_id, *outcome.failure);
      }
      Cell snapshot;
      {
        std::lock_guard lk(status_mutex);
        cell.status = outcome.finding ? CellStatus::Done : CellStatus::Failed;
        snapshot = cell;
      }
      executed.fetch_add(1);
      if (options.on_cell_done) options.on_cell_done(snapshot);
    }
  };

  {
    std::vector<std::jthread> pool;
    const std::size_t threads = std::min(options.max_in_flight, std::max<std::size_t>(limit, 1));
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  const bool complete = std::none_of(manifest.cells.begin(), manifest.cells.end(),
                                     [](const Cell& c) { return c.status == CellStatus::Pending; });
  if (complete) manifest.finished_at = utc_now_iso8601();
  store.save_manifest(manifest);

  RunResult result;
  result.findings = store.load_findings(manifest.run_id).records;
  std::set<std::pair<int, std::string>> failed;
  for (const auto& c : manifest.cells) {
    if (c.status == CellStatus::Failed) failed.emplace(c.sample_id, c.criterion_id.str());
  }
  std::map<std::pair<int, std::string>, FailureRecord> latest_failure;
  for (auto& f : store.load_failures(manifest.run_id).records) {
    auto key = std::make_pair(f.sample_id, f.criterion_id.str());
    if (failed.count(key)) latest_failure[key] = std::move(f);
  }
  for (auto& [key, f] : latest_failure) result.failures.push_back(std::move(f));
  result.executed = executed.load();
  result.manifest = std::move(manifest);
  return result;
}

TimingSummary timing_summary(const RunManifest& manifest, std::span<const Finding> findings) {
  const bool pending = std::any_of(manifest.cells.begin(), manifest.cells.end(),
                                   [](const Cell& c) { return c.status == CellStatus::Pending; });
  if (findings.empty() || pending) throw InvalidArgument("run not finished");

  TimingSummary out;
  std::map<std::string, CriterionTiming> per_crit;
  std::map<int, SampleTiming> per_sample;
  double total = 0.0;
  out.min_s = findings.front().latency_s;
  out.max_s = findings.front().latency_s;
  for (const auto& f : findings) {
    auto [it, fresh] = per_crit.try_emplace(f.criterion_id.str());
    auto& ct = it->second;
    if (fresh) {
      ct.criterion_id = f.criterion_id;
      ct.min_s = ct.max_s = f.latency_s;
    }
    ct.min_s = std::min(ct.min_s, f.latency_s);
    ct.max_s = std::max(ct.max_s, f.latency_s);
    ct.mean_s += f.latency_s;  // sum until divided below
    ++ct.count;

    auto& st = per_sample[f.sample_id];
    st.sample_id = f.sample_id;
    st.total_s += f.latency_s;
    ++st.count;

    out.min_s = std::min(out.min_s, f.latency_s);
    out.max_s = std::max(out.max_s, f.latency_s);
    total += f.latency_s;
  }
  out.mean_s = total / static_cast<double>(findings.size());

  for (const auto& cid : manifest.criterion_ids) {
    auto it = per_crit.find(cid.str());
    if (it == per_crit.end()) continue;
    it->second.mean_s /= static_cast<double>(it->second.count);
    out.per_criterion.push_back(it->second);
  }
  for (int sid : manifest.sample_ids) {
    auto it = per_sample.find(sid);
    if (it != per_sample.end()) out.per_sample.push_back(it->second);
  }
  if (!out.per_sample.empty()) {
    double sum = 0.0;
    out.sample_total_min_s = out.sample_total_max_s = out.per_sample.front().total_s;
    for (const auto& s : out.per_sample) {
      out.sample_total_min_s = std::min(out.sample_total_min_s, s.total_s);
      out.sample_total_max_s = std::max(out.sample_total_max_s, s.total_s);
      sum += s.total_s;
    }
    out.sample_total_mean_s = sum / static_cast<double>(out.per_sample.size());
  }
  return out;
}

}  // namespace confalyzer
