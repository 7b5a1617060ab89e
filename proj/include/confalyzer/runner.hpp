#pragma once

#include "confalyzer/catalog.hpp"
#include "confalyzer/dataset.hpp"
#include "confalyzer/finding.hpp"
#include "confalyzer/gateway.hpp"
#include "confalyzer/prompt.hpp"
#include "confalyzer/records.hpp"
#include "confalyzer/store.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace confalyzer {

inline constexpr std::string_view kRepairInstruction = "\n\nReturn only the structured record.";

struct RunOptions {
  // New run id when empty (ignored on resume).
  std::string run_id;
  // Resume this run: only pending and failed cells execute.
  std::optional<std::string> resume_run_id;
  std::size_t max_in_flight = 4;
  ModelParams params;
  RetryPolicy retry;
  // Stop after this many cells have executed, leaving the rest pending.
  std::optional<std::size_t> cell_limit;
  // Invoked from worker threads after each cell is stored.
  std::function<void(const Cell&)> on_cell_done;
};

struct RunResult {
  RunManifest manifest;
  std::vector<Finding> findings;
  std::vector<FailureRecord> failures;  // cells whose latest outcome is a failure
  std::size_t executed = 0;             // cells analyzed by this invocation
};

std::string make_run_id();

// Cells in deterministic order: samples outer, criteria inner.
std::vector<Cell> plan_cells(std::span<const int> sample_ids, std::span<const CriterionId> criterion_ids);

/// Runs (or resumes) the sample x criterion matrix.
///
/// Each cell renders its prompt, segments the recording if the budget
/// requires it, calls the backend through analyze() and parses the reply.
/// Findings and failures are appended to the store as cells complete; a
/// failed cell never stops the run. Failed cells are retried only when the
/// run is resumed.
RunResult run_matrix(Store& store, std::span<const ConfiguratorSample> samples,
                     const Catalog& catalog, const PromptTemplatePair& templates, Backend& backend,
                     const RunOptions& options);

struct CriterionTiming {
  CriterionId criterion_id;
  std::size_t count = 0;
  double min_s = 0.0;
  double mean_s = 0.0;
  double max_s = 0.0;
};

struct SampleTiming {
  int sample_id = 0;
  std::size_t count = 0;
  double total_s = 0.0;
};

struct TimingSummary {
  std::vector<CriterionTiming> per_criterion;  // manifest criterion order
  std::vector<SampleTiming> per_sample;        // manifest sample order
  double min_s = 0.0;                          // over all cell latencies
  double mean_s = 0.0;
  double max_s = 0.0;
  double sample_total_min_s = 0.0;
  double sample_total_mean_s = 0.0;
  double sample_total_max_s = 0.0;
};

// Throws InvalidArgument("run not finished") when the run has pending cells or no findings.
TimingSummary timing_summary(const RunManifest& manifest, std::span<const Finding> findings);

}  // namespace confalyzer
