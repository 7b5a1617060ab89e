#pragma once

#include "confalyzer/catalog.hpp"
#include "confalyzer/finding.hpp"
#include "confalyzer/reliability.hpp"
#include "confalyzer/review.hpp"
#include "confalyzer/runner.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace confalyzer {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Printed below a markdown table; omitted from CSV.
  std::vector<std::string> notes;
};

enum class ReportFormat { Csv, Markdown };
std::optional<ReportFormat> report_format_from_string(std::string_view s);

std::string render_csv(const Table& t);
std::string render_markdown(const Table& t);
std::string render(const Table& t, ReportFormat format);
// Throws StoreError when the path cannot be written.
void export_table(const Table& t, ReportFormat format, const std::filesystem::path& path);

// Half-up rounding of a non-negative ratio (half away from zero otherwise).
std::string format_decimal(const Rational& r, int digits);
// 80/148 -> "54.1%"
std::string format_percent(const Rational& r, int digits);

struct SeverityCounts {
  std::size_t no_issue = 0;
  std::size_t minor = 0;
  std::size_t major = 0;

  std::size_t issues() const noexcept { return minor + major; }
  std::size_t total() const noexcept { return no_issue + minor + major; }
  void add(Severity s);
  bool operator==(const SeverityCounts&) const = default;
};

struct SampleSeverity {
  int sample_id = 0;
  SeverityCounts counts;
};

struct SampleSeverityReport {
  std::vector<SampleSeverity> rows;  // ascending sample id
  SeverityCounts totals;
  std::size_t issue_min = 0;
  std::size_t issue_max = 0;
  Rational issue_mean = 0;  // total issues / samples
};

SampleSeverityReport severity_by_sample(std::span<const Finding> findings);

struct CriterionSeverity {
  CriterionId criterion_id;
  std::string name;
  SeverityCounts counts;
};

// One row per catalog criterion, in catalog order, zero rows included.
std::vector<CriterionSeverity> severity_by_criterion(std::span<const Finding> findings, const Catalog& catalog);

Table severity_table(const SampleSeverityReport& report);
Table severity_table(std::span<const CriterionSeverity> rows);

struct PlausibilityReport {
  AgreementSummary summary;  // partitions may be empty (n = 0)
  std::size_t completed = 0;
  std::size_t incomplete = 0;
};

// Accepts an empty verdict list (all partitions n = 0).
PlausibilityReport plausibility_report(const VerdictSet& set);
Table plausibility_table(const PlausibilityReport& report);
Table agreement_table(const PlausibilityReport& report);

enum class Grouping { Sample, Criterion };

Table timing_table(const TimingSummary& summary, Grouping by);
Table tokens_table(std::span<const Finding> findings, const RunManifest& manifest, Grouping by);

struct IrrColumn {
  Question question;
  Rational observed;
  std::optional<Rational> kappa;  // nullopt = undefined
  Rational ac1;
  std::size_t items = 0;
};

IrrColumn irr_column(const RatingMatrix& m, Question question);
// Rows P_o / Fleiss' kappa / Gwet's AC1, one column per question.
Table irr_table(std::span<const IrrColumn> columns);

}  // namespace confalyzer
