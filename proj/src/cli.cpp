#include "confalyzer/cli.hpp"

#include "confalyzer/catalog.hpp"
#include "confalyzer/config.hpp"
#include "confalyzer/dataset.hpp"
#include "confalyzer/http_backend.hpp"
#include "confalyzer/mock_backend.hpp"
#include "confalyzer/prompt.hpp"
#include "confalyzer/reliability.hpp"
#include "confalyzer/reporting.hpp"
#include "confalyzer/review.hpp"
#include "confalyzer/runner.hpp"
#include "confalyzer/service.hpp"
#include "confalyzer/store.hpp"
#include "confalyzer/util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <iostream>
#include <optional>

namespace confalyzer {

using nlohmann::json;

namespace {

struct Globals {
  std::string config_path;
  std::string store_root;
};

Config resolve_config(const Globals& g) {
  Config c;
  if (!g.config_path.empty()) {
    c = load_config_file(g.config_path);
  } else if (const char* env = std::getenv("CONFALYZER_CONFIG"); env && *env) {
    c = load_config_file(env);
  }
  if (!g.store_root.empty()) c.store_root = g.store_root;
  return c;
}

Catalog resolve_catalog(const Config& c, const std::string& flag) {
  if (!flag.empty()) return load_catalog_file(flag);
  if (c.catalog_path) return load_catalog_file(*c.catalog_path);
  return builtin_catalog();
}

// Catalog a run was analyzed with, for reports over stored findings.
Catalog stored_catalog(const Store& store) { return store.load_catalog_snapshot().value_or(builtin_catalog()); }

std::string latest_run(const Store& store, const std::string& flag) {
  if (!flag.empty()) {
    if (!store.has_run(flag)) throw InvalidArgument("unknown run " + flag);
    return flag;
  }
  const auto ids = store.run_ids();
  if (ids.empty()) throw InvalidArgument("no runs in store " + store.root().string());
  return ids.back();
}

ReportFormat parse_format(const std::string& s) {
  auto f = report_format_from_string(s);
  if (!f) throw InvalidArgument("unknown format \"" + s + "\" (csv or markdown)");
  return *f;
}

Grouping parse_grouping(const std::string& s) {
  if (s == "sample") return Grouping::Sample;
  if (s == "criterion") return Grouping::Criterion;
  throw InvalidArgument("--by must be sample or criterion");
}

void emit(const Table& t, const std::string& format, const std::string& out_path, std::ostream& out) {
  const ReportFormat f = parse_format(format);
  if (out_path.empty()) {
    out << render(t, f);
  } else {
    export_table(t, f, out_path);
  }
}

std::vector<Reviewer> load_reviewers_file(const std::filesystem::path& path) {
  const json j = json::parse(read_file(path));
  const json& arr = j.is_object() ? j.at("reviewers") : j;
  if (!arr.is_array()) throw InvalidArgument("reviewers file must be an array of {id, display_name}");
  std::vector<Reviewer> out;
  for (const auto& r : arr) out.push_back(reviewer_from_json(r));
  return out;
}

bool parse_bool(const std::string& s) {
  const auto v = to_lower(s);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw InvalidArgument("expected true or false, got \"" + s + "\"");
}

std::optional<Question> parse_question(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "issue") return Question::Issue;
  if (s == "improvement") return Question::Improvement;
  throw InvalidArgument("--question must be issue or improvement");
}

ReviewService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Usability audit pipeline for product configurator screen recordings", "confalyzer"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Config file (JSON)");
  app.add_option("--store", g.store_root, "Store root directory (overrides config)");

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Dataset manifest ingestion");
  dataset->require_subcommand(1);
  std::string ingest_path;
  auto* ds_ingest = dataset->add_subcommand("ingest", "Validate and store a dataset manifest");
  ds_ingest->add_option("manifest", ingest_path, "Manifest file")->required();
  auto* ds_list = dataset->add_subcommand("list", "List ingested samples");
  std::string ds_format = "markdown";
  ds_list->add_option("--format", ds_format, "csv or markdown");

  // catalog
  auto* catalog_cmd = app.add_subcommand("catalog", "Usability criteria catalog");
  catalog_cmd->require_subcommand(1);
  std::string catalog_flag;
  std::string cat_format = "text";
  bool cat_descriptions = false;
  auto* cat_list = catalog_cmd->add_subcommand("list", "List criteria");
  cat_list->add_option("--catalog", catalog_flag, "Catalog file (default: built-in)");
  cat_list->add_option("--format", cat_format, "text, csv, markdown or json");
  cat_list->add_flag("--descriptions", cat_descriptions, "Include descriptions");
  std::string cat_out;
  auto* cat_export = catalog_cmd->add_subcommand("export", "Write the catalog as JSON");
  cat_export->add_option("--catalog", catalog_flag, "Catalog file (default: built-in)");
  cat_export->add_option("--out", cat_out, "Output file (default: stdout)");
  std::string cat_validate_path;
  auto* cat_validate = catalog_cmd->add_subcommand("validate", "Check a catalog file");
  cat_validate->add_option("file", cat_validate_path, "Catalog file")->required();

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Run the sample x criterion analysis matrix");
  std::string an_dataset, an_backend, an_fixture, an_criteria = "all", an_resume, an_templates, an_run_id, an_model;
  std::size_t an_max_in_flight = 4;
  std::optional<double> an_temperature, an_fps, an_delay_scale;
  std::optional<std::uint64_t> an_max_context;
  std::optional<std::size_t> an_cell_limit;
  analyze_cmd->add_option("--dataset", an_dataset, "Dataset manifest (ingested first)");
  analyze_cmd->add_option("--catalog", catalog_flag, "Catalog file (default: built-in)");
  analyze_cmd->add_option("--backend", an_backend, "mock or http");
  analyze_cmd->add_option("--fixture", an_fixture, "Mock response fixture");
  analyze_cmd->add_option("--criteria", an_criteria, "Comma-separated criterion ids or 'all'");
  analyze_cmd->add_option("--max-in-flight", an_max_in_flight, "Concurrent backend calls")->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--resume", an_resume, "Resume this run id");
  analyze_cmd->add_option("--templates", an_templates, "Prompt templates file");
  analyze_cmd->add_option("--run-id", an_run_id, "Id for a new run");
  analyze_cmd->add_option("--model", an_model, "Model name");
  analyze_cmd->add_option("--temperature", an_temperature, "Sampling temperature");
  analyze_cmd->add_option("--fps", an_fps, "Frames per second");
  analyze_cmd->add_option("--max-context-tokens", an_max_context, "Context window");
  analyze_cmd->add_option("--mock-delay-scale", an_delay_scale, "Mock sleeps latency * scale seconds per call");
  analyze_cmd->add_option("--cell-limit", an_cell_limit, "Stop after this many cells");

  // report
  auto* report_cmd = app.add_subcommand("report", "Tabular reports over stored results");
  report_cmd->require_subcommand(1);
  std::string rp_run, rp_by, rp_format = "markdown", rp_out;
  auto add_report = [&](const char* name, const char* help, bool by) {
    auto* sc = report_cmd->add_subcommand(name, help);
    sc->add_option("--run", rp_run, "Run id (default: latest)");
    sc->add_option("--format", rp_format, "csv or markdown");
    sc->add_option("--out", rp_out, "Output file (default: stdout)");
    if (by) sc->add_option("--by", rp_by, "sample or criterion (default: sample for severity, criterion otherwise)");
    return sc;
  };
  auto* rp_severity = add_report("severity", "Severity histogram", true);
  auto* rp_plaus = add_report("plausibility", "Majority-vote plausibility by severity", false);
  auto* rp_agree = add_report("agreement", "Full reviewer agreement by severity", false);
  auto* rp_timing = add_report("timing", "Analysis latency", true);
  auto* rp_tokens = add_report("tokens", "Token usage", true);

  // review
  auto* review_cmd = app.add_subcommand("review", "Human plausibility review");
  review_cmd->require_subcommand(1);
  std::string rv_run, rv_reviewers, rv_out, rv_format = "markdown";
  std::optional<int> rv_k;
  std::optional<std::uint64_t> rv_seed;
  auto* rv_assign = review_cmd->add_subcommand("assign", "Assign flagged findings to reviewers");
  rv_assign->add_option("--run", rv_run, "Run id (default: latest)");
  rv_assign->add_option("--reviewers", rv_reviewers, "Reviewers file")->required();
  rv_assign->add_option("--k", rv_k, "Reviewers per finding (odd)");
  rv_assign->add_option("--seed", rv_seed, "Shuffle seed");
  auto* rv_status = review_cmd->add_subcommand("status", "Per-reviewer progress");
  rv_status->add_option("--run", rv_run, "Run id (default: all runs)");
  auto* rv_verdicts = review_cmd->add_subcommand("verdicts", "Majority-vote verdicts");
  rv_verdicts->add_option("--run", rv_run, "Run id (default: all runs)");
  rv_verdicts->add_option("--format", rv_format, "csv or markdown");
  rv_verdicts->add_option("--out", rv_out, "Output file (default: stdout)");
  std::string jd_reviewer, jd_criterion, jd_issue, jd_improvement;
  int jd_sample = 0;
  auto* rv_judge = review_cmd->add_subcommand("judge", "Record one judgment");
  rv_judge->add_option("--run", rv_run, "Run id (default: latest)");
  rv_judge->add_option("--reviewer", jd_reviewer, "Reviewer id")->required();
  rv_judge->add_option("--sample", jd_sample, "Sample id")->required();
  rv_judge->add_option("--criterion", jd_criterion, "Criterion id")->required();
  rv_judge->add_option("--issue", jd_issue, "Issue description plausible (true/false)")->required();
  rv_judge->add_option("--improvement", jd_improvement, "Improvement plausible (true/false)")->required();

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Inter-rater reliability");
  stats_cmd->require_subcommand(1);
  std::string st_question;
  auto* st_irr = stats_cmd->add_subcommand("irr", "Observed agreement, Fleiss' kappa, Gwet's AC1");
  st_irr->add_option("--run", rv_run, "Run id (default: all runs)");
  st_irr->add_option("--question", st_question, "issue or improvement (default: both)");
  st_irr->add_option("--format", rv_format, "csv or markdown");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve the review API");
  std::optional<int> sv_port;
  std::string sv_tokens, sv_host;
  serve_cmd->add_option("--port", sv_port, "Port (0 picks a free one)");
  serve_cmd->add_option("--host", sv_host, "Bind address");
  serve_cmd->add_option("--tokens", sv_tokens, "Token table file");

  // export
  auto* export_cmd = app.add_subcommand("export", "Export stored records");
  export_cmd->require_subcommand(1);
  std::string ex_format = "jsonl";
  auto* ex_findings = export_cmd->add_subcommand("findings", "Export findings of a run");
  ex_findings->add_option("--run", rv_run, "Run id (default: latest)");
  ex_findings->add_option("--format", ex_format, "jsonl or csv");
  ex_findings->add_option("--out", rv_out, "Output file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ds_ingest->parsed()) {
      Config c = resolve_config(g);
      Store store(c.store_root);
      const auto r = store.ingest_dataset(ingest_path);
      out << (r.changed ? "ingested " : "unchanged: ") << r.samples.size() << " samples\n";
      return kExitOk;
    }
    if (ds_list->parsed()) {
      Config c = resolve_config(g);
      Store store(c.store_root);
      Table t;
      t.header = {"Id", "Industry", "Name", "Duration", "URL"};
      for (const auto& s : store.samples()) {
        t.rows.push_back({std::to_string(s.id), s.industry, s.name, format_duration(s.duration_s), s.url});
      }
      for (int id : store.changed_recordings()) {
        err << "warning: recording of sample " << id << " changed since ingest\n";
      }
      out << render(t, parse_format(ds_format));
      return kExitOk;
    }
    if (cat_list->parsed()) {
      const Catalog cat = resolve_catalog(resolve_config(g), catalog_flag);
      if (cat_format == "json") {
        out << dump_catalog(cat) << "\n";
        return kExitOk;
      }
      if (cat_format == "text") {
        for (const auto& c : cat) {
          out << c.id.str() << "\t" << to_string(c.category) << "\t" << c.name;
          if (cat_descriptions) out << "\t" << c.description;
          out << "\n";
        }
        return kExitOk;
      }
      Table t;
      t.header = {"Id", "Category", "Name"};
      if (cat_descriptions) t.header.push_back("Description");
      for (const auto& c : cat) {
        t.rows.push_back({c.id.str(), std::string(to_string(c.category)), c.name});
        if (cat_descriptions) t.rows.back().push_back(c.description);
      }
      out << render(t, parse_format(cat_format));
      return kExitOk;
    }
    if (cat_export->parsed()) {
      const std::string doc = dump_catalog(resolve_catalog(resolve_config(g), catalog_flag)) + "\n";
      if (cat_out.empty()) {
        out << doc;
      } else {
        write_file_atomic(cat_out, doc);
      }
      return kExitOk;
    }
    if (cat_validate->parsed()) {
      const Catalog cat = load_catalog_file(cat_validate_path);
      out << "ok: " << cat.size() << " criteria, version " << cat.version() << "\n";
      return kExitOk;
    }
    if (analyze_cmd->parsed()) {
      Config c = resolve_config(g);
      if (!an_backend.empty()) c.backend_kind = an_backend;
      if (!an_fixture.empty()) c.mock_fixture = an_fixture;
      if (an_delay_scale) c.mock_delay_scale = *an_delay_scale;
      if (!an_model.empty()) c.params.model_name = an_model;
      if (an_temperature) c.params.temperature = *an_temperature;
      if (an_fps) c.params.frames_per_second = *an_fps;
      if (an_max_context) c.params.max_context_tokens = *an_max_context;
      c.validate();

      Store store(c.store_root);
      std::vector<ConfiguratorSample> samples;
      if (!an_dataset.empty()) {
        samples = store.ingest_dataset(an_dataset).samples;
      } else {
        samples = store.samples();
        if (samples.empty()) throw InvalidArgument("no samples: pass --dataset or run `dataset ingest` first");
      }
      for (int id : store.changed_recordings()) {
        err << "warning: recording of sample " << id << " changed since ingest\n";
      }

      Catalog catalog = resolve_catalog(c, catalog_flag);
      if (an_resume.empty()) {
        catalog = criteria_subset(catalog, parse_criteria_list(an_criteria, catalog));
        store.save_catalog_snapshot(resolve_catalog(c, catalog_flag));
      }
      PromptTemplatePair templates = default_templates();
      if (!an_templates.empty()) {
        templates = load_templates_file(an_templates);
      } else if (c.templates_path) {
        templates = load_templates_file(*c.templates_path);
      }

      std::unique_ptr<Backend> backend;
      if (c.backend_kind == "mock") {
        std::filesystem::path fixture;
        if (c.mock_fixture) {
          fixture = *c.mock_fixture;
        } else if (!an_dataset.empty()) {
          fixture = std::filesystem::path(an_dataset).parent_path() / "mock_responses.json";
        } else {
          throw InvalidArgument("mock backend needs --fixture");
        }
        MockBackend::Options opts;
        opts.delay_scale = c.mock_delay_scale;
        if (const char* log = std::getenv("CONFALYZER_MOCK_INVOCATION_LOG"); log && *log) opts.invocation_log = log;
        backend = std::make_unique<MockBackend>(load_mock_fixture_file(fixture), opts);
      } else {
        backend = HttpBackend::from_environment(c.profile);
      }

      RunOptions opts;
      opts.run_id = an_run_id;
      if (!an_resume.empty()) opts.resume_run_id = an_resume;
      opts.max_in_flight = an_max_in_flight;
      opts.params = c.params;
      opts.cell_limit = an_cell_limit;
      const RunResult r = run_matrix(store, samples, catalog, templates, *backend, opts);

      SeverityCounts totals;
      for (const auto& f : r.findings) totals.add(f.severity);
      out << "run " << r.manifest.run_id << "\n"
          << "cells " << r.manifest.cells.size() << ", executed " << r.executed << "\n"
          << "findings " << r.findings.size() << " (no issue " << totals.no_issue << ", minor " << totals.minor
          << ", major " << totals.major << ")\n"
          << "failures " << r.failures.size() << "\n";
      for (const auto& f : r.failures) {
        err << "failed " << f.sample_id << "/" << f.criterion_id.str() << " [" << f.error_kind << "] " << f.message
            << "\n";
      }
      if (!r.failures.empty() || r.manifest.finished_at.empty()) {
        err << "resume with: analyze --resume " << r.manifest.run_id << "\n";
      }
      return kExitOk;
    }
    if (rp_severity->parsed() || rp_plaus->parsed() || rp_agree->parsed() || rp_timing->parsed() ||
        rp_tokens->parsed()) {
      Config c = resolve_config(g);
      Store store(c.store_root);
      if (rp_plaus->parsed() || rp_agree->parsed()) {
        std::optional<std::string> run;
        if (!rp_run.empty()) run = latest_run(store, rp_run);
        const auto report =
            plausibility_report(verdicts(store.load_judgments(run).records, store.load_assignments(run).records));
        emit(rp_plaus->parsed() ? plausibility_table(report) : agreement_table(report), rp_format, rp_out, out);
        return kExitOk;
      }
      const std::string run = latest_run(store, rp_run);
      const auto loaded = store.load_findings(run);
      for (const auto& bad : loaded.corrupt) err << "warning: findings.log line " << bad.line << ": " << bad.error << "\n";
      const Grouping by = parse_grouping(rp_by.empty() ? (rp_severity->parsed() ? "sample" : "criterion") : rp_by);
      if (rp_severity->parsed()) {
        if (by == Grouping::Sample) {
          emit(severity_table(severity_by_sample(loaded.records)), rp_format, rp_out, out);
        } else {
          emit(severity_table(severity_by_criterion(loaded.records, stored_catalog(store))), rp_format, rp_out, out);
        }
      } else if (rp_timing->parsed()) {
        emit(timing_table(timing_summary(store.load_manifest(run), loaded.records), by), rp_format, rp_out, out);
      } else {
        emit(tokens_table(loaded.records, store.load_manifest(run), by), rp_format, rp_out, out);
      }
      return kExitOk;
    }
    if (rv_assign->parsed()) {
      Config c = resolve_config(g);
      Store store(c.store_root);
      const std::string run = latest_run(store, rv_run);
      if (!store.load_assignments(run).records.empty()) throw InvalidArgument("run " + run + " already has assignments");
      const int k = rv_k.value_or(c.review_k);
      const auto reviewers = load_reviewers_file(rv_reviewers);
      const auto reviewable = select_reviewable(store.load_findings(run).records);
      const auto assignments = assign(reviewable, reviewers, k, rv_seed.value_or(c.review_seed), run);
      store.save_reviewers(reviewers);
      store.append_assignments(assignments);
      out << "assigned " << assignments.size() << " findings to " << reviewers.size() << " reviewers (k=" << k
          << ")\n";
      for (const auto& p : review_progress(reviewers, assignments, {})) {
        out << p.reviewer_id << "\t" << p.assigned << "\n";
      }
      return kExitOk;
    }
    if (rv_status->parsed()) {
      Config c = resolve_config(g);
      Store store(c.store_root);
      std::optional<std::string> run;
      if (!rv_run.empty()) run = latest_run(store, rv_run);
      const auto assignments = store.load_assignments(run).records;
      const auto judgments = latest_judgments(store.load_judgments(run).records);
      const auto set = verdicts(judgments, assignments);
      Table t;
      t.header = {"Reviewer", "Assigned", "Judged", "Pending"};
      for (const auto& p : review_progress(store.load_reviewers(), assignments, judgments)) {
        t.rows.push_back({p.reviewer_id, std::to_string(p.assigned), std::to_string(p.judged),
                          std::to_string(p.assigned - p.judged)});
      }
      t.notes.push_back(std::to_string(set.verdicts.size()) + " of " + std::to_string(assignments.size()) +
                        " findings complete.");
      out << render_markdown(t);
      return kExitOk;
    }
    if (rv_verdicts->parsed()) {
      Config c = resolve_config(g);
      Store store(c.store_root);
      std::optional<std::string> run;
      if (!rv_run.empty()) run = latest_run(store, rv_run);
      const auto set = verdicts(store.load_judgments(run).records, store.load_assignments(run).records);
      Table t;
      t.header = {"Run", "Sample", "Criterion", "Severity", "Issue plausible", "Improvement plausible",
                  "Issue unanimous", "Improvement unanimous"};
      auto yn = [](bool b) { return std::string(b ? "yes" : "no"); };
      for (const auto& v : set.verdicts) {
        t.rows.push_back({v.key.run_id, std::to_string(v.key.sample_id), v.key.criterion_id.str(),
                          std::string(to_label(v.severity)), yn(v.issue_plausible_majority),
                          yn(v.improvement_plausible_majority), yn(v.full_agreement_issue),
                          yn(v.full_agreement_improvement)});
      }
      t.notes.push_back(std::to_string(set.incomplete.size()) + " incomplete findings excluded.");
      emit(t, rv_format, rv_out, out);
      return kExitOk;
    }
    if (rv_judge->parsed()) {
      Config c = resolve_config(g);
      Store store(c.store_root);
      Judgment j;
      j.key = FindingKey{latest_run(store, rv_run), jd_sample, CriterionId::parse(jd_criterion)};
      j.reviewer_id = jd_reviewer;
      j.issue_plausible = parse_bool(jd_issue);
      j.improvement_plausible = parse_bool(jd_improvement);
      const Judgment stored = record_judgment(store, j);
      out << "recorded " << stored.key.str() << " by " << stored.reviewer_id << "\n";
      return kExitOk;
    }
    if (st_irr->parsed()) {
      Config c = resolve_config(g);
      Store store(c.store_root);
      std::optional<std::string> run;
      if (!rv_run.empty()) run = latest_run(store, rv_run);
      const auto judgments = store.load_judgments(run).records;
      const auto assignments = store.load_assignments(run).records;
      const auto set = verdicts(judgments, assignments);
      if (set.verdicts.empty()) throw InvalidArgument("no complete findings");
      std::vector<Assignment> complete;
      std::set<FindingKey> done;
      for (const auto& v : set.verdicts) done.insert(v.key);
      for (const auto& a : assignments) {
        if (done.count(a.key)) complete.push_back(a);
      }
      std::vector<IrrColumn> cols;
      const auto q = parse_question(st_question);
      for (Question question : {Question::Issue, Question::Improvement}) {
        if (q && *q != question) continue;
        cols.push_back(irr_column(from_judgments(judgments, complete, question), question));
      }
      Table t = irr_table(cols);
      if (!set.incomplete.empty()) {
        t.notes.push_back(std::to_string(set.incomplete.size()) + " incomplete findings excluded.");
      }
      out << render(t, parse_format(rv_format));
      return kExitOk;
    }
    if (serve_cmd->parsed()) {
      Config c = resolve_config(g);
      if (sv_port) c.service_port = *sv_port;
      if (!sv_host.empty()) c.service_host = sv_host;
      if (!sv_tokens.empty()) c.tokens_path = sv_tokens;
      c.validate();
      if (!c.tokens_path) throw InvalidArgument("serve needs --tokens");
      ReviewService service(c.store_root, load_tokens_file(*c.tokens_path));
      const int port = service.start(c.service_host, c.service_port);
      out << "listening on http://" << c.service_host << ":" << port << "\n" << std::flush;
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.wait();
      g_service = nullptr;
      return kExitOk;
    }
    if (ex_findings->parsed()) {
      Config c = resolve_config(g);
      Store store(c.store_root);
      const std::string run = latest_run(store, rv_run);
      const auto findings = store.load_findings(run).records;
      std::string doc;
      if (ex_format == "jsonl") {
        for (const auto& f : findings) {
          auto j = finding_to_json(f);
          j["run_id"] = run;
          j["schema"] = kSchemaVersion;
          doc += j.dump() + "\n";
        }
      } else if (ex_format == "csv") {
        Table t;
        t.header = {"run_id", "sample_id", "criterion_id", "severity", "issue", "improvement", "latency_s",
                    "input_tokens", "output_tokens", "created_at"};
        for (const auto& f : findings) {
          t.rows.push_back({run, std::to_string(f.sample_id), f.criterion_id.str(), std::string(to_label(f.severity)),
                            f.issue_description.value_or(""), f.improvement_suggestion.value_or(""),
                            json(f.latency_s).dump(), std::to_string(f.input_tokens), std::to_string(f.output_tokens),
                            f.created_at});
        }
        doc = render_csv(t);
      } else {
        throw InvalidArgument("--format must be jsonl or csv");
      }
      if (rv_out.empty()) {
        out << doc;
      } else {
        write_file_atomic(rv_out, doc);
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace confalyzer
