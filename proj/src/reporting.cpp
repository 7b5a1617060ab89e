#include "confalyzer/reporting.hpp"

#include "confalyzer/util.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace confalyzer {

std::optional<ReportFormat> report_format_from_string(std::string_view s) {
  const std::string v = to_lower(s);
  if (v == "csv") return ReportFormat::Csv;
  if (v == "markdown" || v == "md") return ReportFormat::Markdown;
  return std::nullopt;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n') {
      out += "<br>";
    } else {
      out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string render_csv(const Table& t) {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
    out << "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out.str();
}

std::string render_markdown(const Table& t) {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    out << "|";
    for (const auto& c : cells) out << " " << md_cell(c) << " |";
    out << "\n";
  };
  line(t.header);
  out << "|";
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i == 0 ? " --- |" : " ---: |");
  out << "\n";
  for (const auto& r : t.rows) line(r);
  if (!t.notes.empty()) {
    out << "\n";
    for (std::size_t i = 0; i < t.notes.size(); ++i) out << "[" << i + 1 << "] " << t.notes[i] << "\n";
  }
  return out.str();
}

std::string render(const Table& t, ReportFormat format) {
  return format == ReportFormat::Csv ? render_csv(t) : render_markdown(t);
}

void export_table(const Table& t, ReportFormat format, const std::filesystem::path& path) {
  try {
    write_file_atomic(path, render(t, format));
  } catch (const std::exception& e) {
    throw StoreError("cannot write report to " + path.string() + ": " + e.what());
  }
}

std::string format_decimal(const Rational& r, int digits) {
  std::int64_t num = r.numerator();
  const std::int64_t den = r.denominator();
  const bool negative = num < 0;
  if (negative) num = -num;
  std::int64_t scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const std::int64_t rounded = (2 * num * scale + den) / (2 * den);
  std::string out = (negative && rounded != 0 ? "-" : "") + std::to_string(rounded / scale);
  if (digits > 0) {
    std::string frac = std::to_string(rounded % scale);
    out += "." + std::string(static_cast<std::size_t>(digits) - frac.size(), '0') + frac;
  }
  return out;
}

std::string format_percent(const Rational& r, int digits) { return format_decimal(r * 100, digits) + "%"; }

void SeverityCounts::add(Severity s) {
  switch (s) {
    case Severity::NoIssue:
      ++no_issue;
      break;
    case Severity::Minor:
      ++minor;
      break;
    case Severity::Major:
      ++major;
      break;
  }
}

SampleSeverityReport severity_by_sample(std::span<const Finding> findings) {
  std::map<int, SeverityCounts> by;
  SampleSeverityReport out;
  for (const auto& f : findings) {
    by[f.sample_id].add(f.severity);
    out.totals.add(f.severity);
  }
  for (const auto& [sid, counts] : by) out.rows.push_back({sid, counts});
  if (!out.rows.empty()) {
    out.issue_min = out.issue_max = out.rows.front().counts.issues();
    for (const auto& r : out.rows) {
      out.issue_min = std::min(out.issue_min, r.counts.issues());
      out.issue_max = std::max(out.issue_max, r.counts.issues());
    }
    out.issue_mean = Rational(static_cast<std::int64_t>(out.totals.issues()),
                              static_cast<std::int64_t>(out.rows.size()));
  }
  return out;
}

std::vector<CriterionSeverity> severity_by_criterion(std::span<const Finding> findings, const Catalog& catalog) {
  std::vector<CriterionSeverity> rows;
  std::map<std::string, std::size_t> index;
  for (const auto& c : catalog) {
    index[c.id.str()] = rows.size();
    rows.push_back({c.id, c.name, {}});
  }
  for (const auto& f : findings) {
    auto it = index.find(f.criterion_id.str());
    if (it != index.end()) rows[it->second].counts.add(f.severity);
  }
  return rows;
}

namespace {

std::vector<std::string> count_cells(const SeverityCounts& c) {
  return {std::to_string(c.no_issue), std::to_string(c.minor), std::to_string(c.major), std::to_string(c.issues()),
          std::to_string(c.total())};
}

}  // namespace

Table severity_table(const SampleSeverityReport& report) {
  Table t;
  t.header = {"Sample", "No Issue", "Minor", "Major", "Issues", "Total"};
  for (const auto& r : report.rows) {
    auto row = count_cells(r.counts);
    row.insert(row.begin(), std::to_string(r.sample_id));
    t.rows.push_back(std::move(row));
  }
  auto total = count_cells(report.totals);
  total.insert(total.begin(), "All");
  t.rows.push_back(std::move(total));
  if (!report.rows.empty()) {
    t.notes.push_back("Issues (minor + major) per sample range from " + std::to_string(report.issue_min) + " to " +
                      std::to_string(report.issue_max) + ".");
    t.notes.push_back("Mean issues per sample = total issues / samples = " + std::to_string(report.totals.issues()) +
                      " / " + std::to_string(report.rows.size()) + " = " + format_decimal(report.issue_mean, 2) +
                      ".");
  }
  return t;
}

Table severity_table(std::span<const CriterionSeverity> rows) {
  Table t;
  t.header = {"Criterion", "Name", "No Issue", "Minor", "Major", "Issues", "Total"};
  for (const auto& r : rows) {
    auto row = count_cells(r.counts);
    row.insert(row.begin(), r.name);
    row.insert(row.begin(), r.criterion_id.str());
    t.rows.push_back(std::move(row));
  }
  return t;
}

PlausibilityReport plausibility_report(const VerdictSet& set) {
  PlausibilityReport r;
  if (!set.verdicts.empty()) r.summary = agreement_summary(set.verdicts);
  r.completed = set.verdicts.size();
  r.incomplete = set.incomplete.size();
  return r;
}

namespace {

std::string rate_or_blank(const PartitionSummary& p, Rational (PartitionSummary::*rate)() const, bool percent) {
  if (p.n == 0) return "";
  const Rational v = (p.*rate)();
  return percent ? format_percent(v, 1) : format_decimal(v, 3);
}

}  // namespace

Table plausibility_table(const PlausibilityReport& report) {
  Table t;
  t.header = {"Severity", "n", "Issue Description", "Improvement Recommendation"};
  const std::pair<const char*, const PartitionSummary*> parts[] = {
      {"Minor Issues", &report.summary.minor}, {"Major Issues", &report.summary.major}, {"All Issues", &report.summary.all}};
  for (const auto& [label, p] : parts) {
    t.rows.push_back({label, std::to_string(p->n), rate_or_blank(*p, &PartitionSummary::issue_rate, false),
                      rate_or_blank(*p, &PartitionSummary::improvement_rate, false)});
  }
  t.notes.push_back("Share of findings judged plausible by majority vote; " + std::to_string(report.completed) +
                    " complete, " + std::to_string(report.incomplete) + " incomplete (excluded).");
  return t;
}

Table agreement_table(const PlausibilityReport& report) {
  Table t;
  t.header = {"Severity", "n", "Issue Description", "Improvement Recommendation"};
  const std::pair<const char*, const PartitionSummary*> parts[] = {
      {"Minor Issues", &report.summary.minor}, {"Major Issues", &report.summary.major}, {"All Issues", &report.summary.all}};
  for (const auto& [label, p] : parts) {
    t.rows.push_back({label, std::to_string(p->n), rate_or_blank(*p, &PartitionSummary::issue_full_agreement_rate, true),
                      rate_or_blank(*p, &PartitionSummary::improvement_full_agreement_rate, true)});
  }
  t.notes.push_back("Share of findings on which all reviewers gave the same judgment.");
  return t;
}

Table timing_table(const TimingSummary& s, Grouping by) {
  Table t;
  if (by == Grouping::Criterion) {
    t.header = {"Criterion", "n", "Min (s)", "Mean (s)", "Max (s)"};
    std::size_t n = 0;
    for (const auto& c : s.per_criterion) {
      t.rows.push_back({c.criterion_id.str(), std::to_string(c.count), fixed(c.min_s, 1), fixed(c.mean_s, 1),
                        fixed(c.max_s, 1)});
      n += c.count;
    }
    t.rows.push_back({"All", std::to_string(n), fixed(s.min_s, 1), fixed(s.mean_s, 1), fixed(s.max_s, 1)});
  } else {
    t.header = {"Sample", "n", "Total (s)"};
    for (const auto& p : s.per_sample) {
      t.rows.push_back({std::to_string(p.sample_id), std::to_string(p.count), fixed(p.total_s, 1)});
    }
    t.notes.push_back("Total time per sample: min " + fixed(s.sample_total_min_s, 1) + " s, mean " +
                      fixed(s.sample_total_mean_s, 1) + " s, max " + fixed(s.sample_total_max_s, 1) + " s.");
  }
  return t;
}

Table tokens_table(std::span<const Finding> findings, const RunManifest& manifest, Grouping by) {
  struct Acc {
    std::size_t n = 0;
    std::uint64_t in = 0;
    std::uint64_t out = 0;
  };
  std::map<std::string, Acc> acc;
  Acc total;
  for (const auto& f : findings) {
    auto& a = acc[by == Grouping::Criterion ? f.criterion_id.str() : std::to_string(f.sample_id)];
    for (Acc* x : {&a, &total}) {
      ++x->n;
      x->in += f.input_tokens;
      x->out += f.output_tokens;
    }
  }
  std::vector<std::string> keys;
  if (by == Grouping::Criterion) {
    for (const auto& c : manifest.criterion_ids) keys.push_back(c.str());
  } else {
    for (int s : manifest.sample_ids) keys.push_back(std::to_string(s));
  }
  Table t;
  t.header = {by == Grouping::Criterion ? "Criterion" : "Sample", "n", "Input tokens", "Output tokens",
              "Mean input tokens"};
  auto row = [](const std::string& label, const Acc& a) {
    const std::string mean =
        a.n ? format_decimal(Rational(static_cast<std::int64_t>(a.in), static_cast<std::int64_t>(a.n)), 1) : "";
    return std::vector<std::string>{label, std::to_string(a.n), std::to_string(a.in), std::to_string(a.out), mean};
  };
  for (const auto& k : keys) {
    auto it = acc.find(k);
    t.rows.push_back(row(k, it == acc.end() ? Acc{} : it->second));
  }
  t.rows.push_back(row("All", total));
  return t;
}

IrrColumn irr_column(const RatingMatrix& m, Question question) {
  return IrrColumn{question, observed_agreement(m), fleiss_kappa(m), gwet_ac1(m), m.items()};
}

Table irr_table(std::span<const IrrColumn> columns) {
  Table t;
  t.header = {"Measure"};
  for (const auto& c : columns) {
    t.header.push_back(c.question == Question::Issue ? "Issue Description" : "Improvement Recommendation");
  }
  std::vector<std::string> po{"Observed Agreement (P_o)"};
  std::vector<std::string> kappa{"Fleiss' Kappa"};
  std::vector<std::string> ac1{"Gwet's AC1"};
  std::vector<std::string> n{"n"};
  for (const auto& c : columns) {
    po.push_back(format_decimal(c.observed, 3));
    kappa.push_back(c.kappa ? format_decimal(*c.kappa, 3) : "undefined");
    ac1.push_back(format_decimal(c.ac1, 3));
    n.push_back(std::to_string(c.items));
  }
  t.rows = {po, kappa, ac1, n};
  return t;
}

}  // namespace confalyzer
