// Acceptance suite: one [PASS]/[FAIL]/[SKIP] line per criterion. Exits 1 if any criterion fails.

#include "confalyzer/catalog.hpp"
#include "confalyzer/dataset.hpp"
#include "confalyzer/gateway.hpp"
#include "confalyzer/http_backend.hpp"
#include "confalyzer/mock_backend.hpp"
#include "confalyzer/reliability.hpp"
#include "confalyzer/reporting.hpp"
#include "confalyzer/review.hpp"
#include "confalyzer/runner.hpp"
#include "confalyzer/store.hpp"
#include "confalyzer/util.hpp"
#include "review_fixture.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

using namespace confalyzer;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(CONFALYZER_SOURCE_DIR) / "fixtures";
const std::string kCli = CONFALYZER_CLI;

enum class Status { Pass, Fail, Skip };

struct Failure {
  std::string what;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

template <class A, class B>
void expect_eq(const A& actual, const B& expected, const std::string& what) {
  if (!(actual == expected)) {
    std::ostringstream s;
    s << what << ": got " << actual << ", expected " << expected;
    throw Failure{s.str()};
  }
}

class Scratch {
 public:
  Scratch() {
    char tmpl[] = "/tmp/confalyzer-acceptance-XXXXXX";
    path_ = ::mkdtemp(tmpl);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Proc {
  int status = -1;
  std::string out;
};

pid_t spawn(const std::vector<std::string>& args, const std::map<std::string, std::string>& env, int out_fd) {
  const pid_t pid = ::fork();
  if (pid == 0) {
    for (const auto& [k, v] : env) ::setenv(k.c_str(), v.c_str(), 1);
    if (out_fd >= 0) ::dup2(out_fd, STDOUT_FILENO);
    const int devnull = ::open("/dev/null", O_WRONLY);
    ::dup2(devnull, STDERR_FILENO);
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(kCli.c_str()));
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    ::execv(kCli.c_str(), argv.data());
    ::_exit(127);
  }
  return pid;
}

Proc run_cli(const std::vector<std::string>& args, const std::map<std::string, std::string>& env = {}) {
  int fds[2];
  if (::pipe(fds) != 0) throw Failure{"pipe failed"};
  const pid_t pid = spawn(args, env, fds[1]);
  ::close(fds[1]);
  Proc p;
  char buf[4096];
  for (ssize_t n; (n = ::read(fds[0], buf, sizeof buf)) > 0;) p.out.append(buf, static_cast<std::size_t>(n));
  ::close(fds[0]);
  int raw = 0;
  ::waitpid(pid, &raw, 0);
  p.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return p;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> lines_of(const std::string& s) {
  auto v = split(s, '\n');
  if (!v.empty() && v.back().empty()) v.pop_back();
  return v;
}

// ---------------------------------------------------------------------------

std::string catalog_fidelity() {
  const auto p = run_cli({"catalog", "list", "--descriptions"});
  expect_eq(p.status, 0, "exit status");
  const auto rows = lines_of(p.out);
  expect_eq(rows.size(), 18u, "criteria listed");

  const std::vector<std::pair<std::string, std::string>> expected = {
      {"C1", "Customized options"},         {"C2", "Organized configuration space"},
      {"C3", "Availability of options"},    {"C4", "Auto-completion"},
      {"C5", "Variant comparison"},         {"C6", "Error prevention"},
      {"E1", "Providing domain knowledge"}, {"E2", "Transparency of dependencies"},
      {"E3", "Transparency of errors"},     {"E4", "Repair suggestions"},
      {"N1", "Focused navigation"},         {"N2", "Manual step transition"},
      {"N3", "Flexible navigation"},        {"N4", "Progress indication"},
      {"N5", "Variant persistence"},        {"N6", "Starting points"},
      {"V1", "Product preview"},            {"V2", "Customized preview"}};
  std::map<std::string, int> per_category;
  std::map<std::string, std::string> descriptions;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto cols = split(rows[i], '\t');
    expect_eq(cols.size(), 4u, "columns in row " + std::to_string(i));
    expect_eq(cols[0], expected[i].first, "id of row " + std::to_string(i));
    expect_eq(cols[2], expected[i].second, "name of " + cols[0]);
    ++per_category[cols[1]];
    descriptions[cols[0]] = cols[3];
  }
  expect_eq(per_category.size(), 4u, "categories");
  expect_eq(per_category["ConfigurationProcess"], 6, "configuration process criteria");
  expect_eq(per_category["Explanation"], 4, "explanation criteria");
  expect_eq(per_category["Navigation"], 6, "navigation criteria");
  expect_eq(per_category["Visualization"], 2, "visualization criteria");

  expect_eq(descriptions["C4"],
            std::string("Does the configurator offer user-triggered auto-completion that fills in the remaining "
                        "required options with defaults?"),
            "C4 description");
  expect_eq(descriptions["N5"],
            std::string("Can users save, name, or restore previous full configuration variants during or after the "
                        "session (e.g., version history or saved configurations)?"),
            "N5 description");
  expect_eq(descriptions["V1"],
            std::string("Does the configurator provide a product preview that is continuously updated after changes "
                        "to reflect the current configuration?"),
            "V1 description");
  return "18 criteria, 6/4/6/2";
}

std::string end_to_end_mock_run() {
  Scratch s;
  const auto store = (s.path() / "store").string();
  auto p = run_cli({"--store", store, "dataset", "ingest", (kFixtures / "samples.manifest").string()});
  expect_eq(p.status, 0, "ingest exit status");
  p = run_cli({"--store", store, "analyze", "--dataset", (kFixtures / "samples.manifest").string(), "--run-id", "e2e"});
  expect_eq(p.status, 0, "analyze exit status");
  expect(p.out.find("findings 288 (no issue 140, minor 73, major 75)") != std::string::npos,
         "analyze summary: " + p.out);

  p = run_cli({"--store", store, "report", "severity", "--run", "e2e", "--format", "csv"});
  expect_eq(p.status, 0, "report exit status");
  const auto rows = lines_of(p.out);
  expect_eq(rows.size(), 18u, "csv lines (header + 16 samples + All)");
  std::size_t none = 0, minor = 0, major = 0;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    const auto c = split(rows[i], ',');
    const auto n = std::stoul(c[1]), mi = std::stoul(c[2]), ma = std::stoul(c[3]);
    expect_eq(std::stoul(c[4]), mi + ma, "issues of sample " + c[0]);
    expect_eq(std::stoul(c[5]), 18ul, "cells of sample " + c[0]);
    expect_eq(n + mi + ma, 18ul, "severity sum of sample " + c[0]);
    none += n;
    minor += mi;
    major += ma;
  }
  expect_eq(rows.back(), std::string("All,140,73,75,148,288"), "totals row");
  expect_eq(none, 140u, "no-issue sum");
  expect_eq(minor, 73u, "minor sum");
  expect_eq(major, 75u, "major sum");

  p = run_cli({"--store", store, "report", "severity", "--run", "e2e", "--by", "criterion", "--format", "csv"});
  const auto crit = lines_of(p.out);
  expect_eq(crit.size(), 19u, "criterion csv lines");
  std::size_t issues = 0;
  for (std::size_t i = 1; i < crit.size(); ++i) {
    const auto c = split(crit[i], ',');
    expect_eq(std::stoul(c.back()), 16ul, "cells of criterion " + c[0]);
    issues += std::stoul(c[c.size() - 2]);
  }
  expect_eq(issues, 148u, "issues over criteria");
  return "288 findings, 140/73/75, conservation holds";
}

std::string token_budgeting() {
  const auto samples = parse_dataset_manifest(read_file(kFixtures / "samples.manifest"), kFixtures);
  ModelParams params;
  for (const auto& s : samples) {
    expect_eq(estimate_video_tokens(s.duration_s, params), 258ull * static_cast<unsigned long long>(s.duration_s),
              "tokens of sample " + std::to_string(s.id));
  }
  expect_eq(estimate_video_tokens(parse_duration("05:22"), params), 83076ull, "05:22");
  expect_eq(estimate_video_tokens(parse_duration("01:13"), params), 18834ull, "01:13");

  ModelParams small;
  small.max_context_tokens = 40'000;
  const auto plan = plan_segments(300.0, small, 1000);
  expect_eq(plan.segments.size(), 2u, "segments");
  for (const auto& seg : plan.segments) {
    expect(estimate_video_tokens(seg.length(), small) + 1000 <= 40'000, "segment over budget");
  }
  expect(plan.segments.front().start_s == 0.0 && plan.segments.back().end_s == 300.0, "segments cover the video");
  return "16 durations exact, 2 segments";
}

Rational pairwise_oracle(const std::vector<std::vector<int>>& counts) {
  Rational sum = 0;
  for (const auto& row : counts) {
    std::vector<int> labels;
    for (std::size_t c = 0; c < row.size(); ++c)
      for (int k = 0; k < row[c]; ++k) labels.push_back(static_cast<int>(c));
    std::int64_t agree = 0, pairs = 0;
    for (std::size_t a = 0; a < labels.size(); ++a)
      for (std::size_t b = a + 1; b < labels.size(); ++b) {
        ++pairs;
        agree += labels[a] == labels[b];
      }
    sum += Rational(agree, pairs);
  }
  return sum / static_cast<std::int64_t>(counts.size());
}

std::string reliability_exactness() {
  const RatingMatrix m({{2, 1}, {3, 0}, {1, 2}});
  expect(observed_agreement(m) == Rational(5, 9), "P_o != 5/9");
  const auto kappa = fleiss_kappa(m);
  expect(kappa && *kappa == Rational(0), "kappa != 0");
  expect(gwet_ac1(m) == Rational(1, 5), "AC1 != 1/5");

  std::mt19937_64 rng(20260115);
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 6)(rng);
    const int r = std::uniform_int_distribution<int>(2, 4)(rng);
    const int k = std::uniform_int_distribution<int>(2, 3)(rng);
    std::vector<std::vector<int>> counts(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(k)));
    for (auto& row : counts)
      for (int i = 0; i < r; ++i) ++row[std::uniform_int_distribution<std::size_t>(0, row.size() - 1)(rng)];
    expect(observed_agreement(RatingMatrix(counts)) == pairwise_oracle(counts),
           "oracle mismatch on trial " + std::to_string(t));
  }
  return "5/9, 0, 1/5 exact; 1000 random matrices match";
}

std::string kappa_paradox() {
  const auto m = paradox_fixture(148, 0.885, 0.694, 1);
  const double po = to_double(observed_agreement(m));
  const auto kappa = fleiss_kappa(m);
  expect(kappa.has_value(), "kappa undefined");
  const double k = to_double(*kappa);
  const double ac1 = to_double(gwet_ac1(m));
  std::ostringstream d;
  d.precision(3);
  d << std::fixed << "P_o " << po << ", kappa " << k << ", AC1 " << ac1;
  expect(po >= 0.68 && po <= 0.71, "P_o out of range: " + d.str());
  expect(k <= 0.15, "kappa too high: " + d.str());
  expect(ac1 >= 0.40, "AC1 too low: " + d.str());
  return d.str();
}

std::string majority_vote_pipeline() {
  const auto fx = testing::build_review_fixture({});
  const auto report = plausibility_report(verdicts(fx.judgments, fx.assignments));
  expect_eq(report.completed, 148u, "complete findings");
  const auto t = plausibility_table(report);
  const std::vector<std::vector<std::string>> expected = {{"Minor Issues", "73", "0.877", "0.973"},
                                                          {"Major Issues", "75", "0.893", "0.987"},
                                                          {"All Issues", "148", "0.885", "0.980"}};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t c = 0; c < 4; ++c) expect_eq(t.rows.at(i).at(c), expected[i][c], t.rows[i][0]);
  }

  const auto a = agreement_table(report);
  const auto issue = a.rows.at(2).at(2), improvement = a.rows.at(2).at(3);
  expect_eq(issue, std::string("54.1%"), "issue full agreement");
  const double imp = std::stod(improvement);
  expect(imp >= 76.4 && imp <= 76.6, "improvement full agreement " + improvement);
  expect(std::abs(std::stod(issue) - 54.1) <= 0.5 && std::abs(imp - 76.6) <= 0.5, "full agreement off by > 0.5 pp");
  return "0.877/0.893/0.885, 0.973/0.987/0.980, " + issue + " / " + improvement;
}

std::string review_assignment() {
  std::vector<Finding> findings;
  const auto ids = builtin_catalog().ids();
  for (int i = 0; i < 148; ++i) {
    Finding f;
    f.sample_id = 1 + i / 18;
    f.criterion_id = ids[static_cast<std::size_t>(i % 18)];
    f.severity = i < 73 ? Severity::Minor : Severity::Major;
    findings.push_back(f);
  }
  const auto reviewers = testing::six_reviewers();
  const auto as = assign(findings, reviewers, 3, 20260115, "run");
  expect_eq(as.size(), 148u, "assignments");
  std::map<std::string, int> load;
  for (const auto& a : as) {
    expect_eq(std::set<std::string>(a.reviewer_ids.begin(), a.reviewer_ids.end()).size(), 3u, "distinct reviewers");
    for (const auto& r : a.reviewer_ids) ++load[r];
  }
  for (const auto& r : reviewers) expect_eq(load[r.id], 74, "load of " + r.id);
  const auto again = assign(findings, reviewers, 3, 20260115, "run");
  for (std::size_t i = 0; i < as.size(); ++i) {
    expect(again[i].key == as[i].key && again[i].reviewer_ids == as[i].reviewer_ids, "not deterministic");
  }

  std::mt19937 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const int rcount = std::uniform_int_distribution<int>(1, 15)(rng);
    const int k = 2 * std::uniform_int_distribution<int>(0, (rcount - 1) / 2)(rng) + 1;
    const int n = std::uniform_int_distribution<int>(0, 200)(rng);
    std::vector<Reviewer> rs;
    for (int i = 0; i < rcount; ++i) rs.push_back({"x" + std::to_string(i), ""});
    std::vector<Finding> fs(findings.begin(), findings.begin() + std::min(n, 148));
    const auto got = assign(fs, rs, k, static_cast<std::uint64_t>(trial), "run");
    std::map<std::string, int> l;
    for (const auto& r : rs) l[r.id] = 0;
    for (const auto& a : got) {
      expect_eq(std::set<std::string>(a.reviewer_ids.begin(), a.reviewer_ids.end()).size(),
                static_cast<std::size_t>(k), "distinct reviewers (random)");
      for (const auto& r : a.reviewer_ids) ++l[r];
    }
    int lo = 1 << 30, hi = 0;
    for (const auto& [id, v] : l) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    expect(hi - lo <= 1, "load spread > 1 on trial " + std::to_string(trial));
  }
  return "74 each, deterministic, 300 random cases";
}

std::string crash_durability() {
  Scratch s;
  const auto store_dir = s.path() / "store";
  const auto log = (s.path() / "invocations.log").string();
  const auto manifest = (kFixtures / "samples.manifest").string();
  const auto fixture = (kFixtures / "mock_responses.json").string();
  expect_eq(run_cli({"--store", store_dir.string(), "dataset", "ingest", manifest}).status, 0, "ingest");

  const pid_t pid = spawn({"--store", store_dir.string(), "analyze", "--dataset", manifest, "--run-id", "crash",
                           "--max-in-flight", "4", "--mock-delay-scale", "0.003"},
                          {{"CONFALYZER_MOCK_INVOCATION_LOG", log}}, -1);
  const auto findings_log = store_dir / "runs" / "crash" / "findings.log";
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(20);
  bool exited = false;
  for (;;) {
    std::size_t lines = 0;
    if (fs::exists(findings_log)) lines = lines_of(read_file(findings_log)).size();
    if (lines >= 60) break;
    int raw;
    if (::waitpid(pid, &raw, WNOHANG) == pid) {
      exited = true;
      break;
    }
    expect(std::chrono::steady_clock::now() < deadline, "run made no progress");
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  expect(!exited, "run ended before it could be killed");
  ::kill(pid, SIGKILL);
  ::waitpid(pid, nullptr, 0);

  const std::size_t before = count_invocations(log);
  std::size_t stored = 0;
  {
    Store store(store_dir);
    stored = store.load_findings("crash").records.size();
  }
  expect(stored < 288, "nothing left to resume");
  const std::size_t lost = before - stored;

  const auto p = run_cli({"--store", store_dir.string(), "analyze", "--resume", "crash", "--fixture", fixture},
                         {{"CONFALYZER_MOCK_INVOCATION_LOG", log}});
  expect_eq(p.status, 0, "resume exit status");
  expect(p.out.find("executed " + std::to_string(288 - stored)) != std::string::npos,
         "resume executed the wrong cells: " + p.out);
  const std::size_t total = count_invocations(log);
  expect_eq(total, 288 + lost, "total invocations");

  Store store(store_dir);
  const auto findings = store.load_findings("crash").records;
  expect_eq(findings.size(), 288u, "findings after resume");
  std::map<Severity, int> sev;
  for (const auto& f : findings) ++sev[f.severity];
  expect(sev[Severity::NoIssue] == 140 && sev[Severity::Minor] == 73 && sev[Severity::Major] == 75,
         "severity totals after resume");
  expect(!store.load_manifest("crash").finished_at.empty(), "run not marked finished");
  std::ostringstream d;
  d << "killed at " << stored << " stored / " << before << " invoked; total invocations " << total << " = 288 + "
    << lost;
  return d.str();
}

std::string live_backend_contract() {
  Scratch s;
  Store store(s.path() / "store");
  const auto samples = store.ingest_dataset(kFixtures / "samples.manifest").samples;
  const std::vector<ConfiguratorSample> one{find_sample(samples, 14)};
  const auto catalog = criteria_subset(builtin_catalog(), std::vector{CriterionId::parse("C1"), CriterionId::parse("V1")});
  auto backend = HttpBackend::from_environment(ProviderProfile{});
  const auto r = run_matrix(store, one, catalog, default_templates(), *backend, RunOptions{});
  expect_eq(r.findings.size() + r.failures.size(), 2u, "cells accounted for");
  for (const auto& f : r.findings) {
    expect(f.severity == Severity::NoIssue || f.severity == Severity::Minor || f.severity == Severity::Major,
           "severity outside the enum");
    validate_finding(f);
  }
  return std::to_string(r.findings.size()) + " findings, " + std::to_string(r.failures.size()) + " failed cells";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<std::string()> check;
    double limit_s;  // 0 = no runtime bound
    bool live = false;
  };
  const std::vector<Criterion> criteria = {
      {"Catalog fidelity", catalog_fidelity, 1.0},
      {"End-to-end mock run", end_to_end_mock_run, 10.0},
      {"Token budgeting", token_budgeting, 0.0},
      {"Reliability statistics exactness", reliability_exactness, 5.0},
      {"Kappa-paradox reproduction", kappa_paradox, 0.0},
      {"Majority-vote pipeline", majority_vote_pipeline, 0.0},
      {"Review assignment", review_assignment, 0.0},
      {"Crash durability", crash_durability, 0.0},
      {"Live-backend contract", live_backend_contract, 0.0, true},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (c.live) {
      const char* key = std::getenv(ProviderProfile{}.api_key_env.c_str());
      if (!key || !*key) {
        std::cout << "[SKIP] " << c.name << " (no " << ProviderProfile{}.api_key_env << " set)\n";
        continue;
      }
    }
    const auto start = std::chrono::steady_clock::now();
    Status status = Status::Pass;
    std::string detail;
    try {
      detail = c.check();
    } catch (const Failure& f) {
      status = Status::Fail;
      detail = f.what;
    } catch (const std::exception& e) {
      status = Status::Fail;
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (status == Status::Pass && c.limit_s > 0 && elapsed >= c.limit_s) {
      status = Status::Fail;
      detail += "; exceeded " + std::to_string(c.limit_s) + " s";
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2f s", elapsed);
    std::cout << (status == Status::Pass ? "[PASS] " : "[FAIL] ") << c.name << " (" << detail << "; " << timing
              << ")\n";
    if (status == Status::Fail) ++failed;
  }
  std::cout << (failed ? "FAILED: " + std::to_string(failed) + " criteria\n" : std::string("all criteria passed\n"));
  return failed ? 1 : 0;
}
