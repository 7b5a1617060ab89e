#include "confalyzer/store.hpp"
#include "confalyzer/util.hpp"
#include "helpers.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <fstream>
#include <thread>

using namespace confalyzer;

namespace {

RunManifest manifest(const std::string& id, const std::string& started = "2026-01-01T00:00:00.000Z") {
  RunManifest m;
  m.run_id = id;
  m.catalog_version = "sha256:x";
  m.sample_ids = {1};
  m.criterion_ids = {CriterionId::parse("C1"), CriterionId::parse("V2")};
  m.backend_id = "mock";
  m.started_at = started;
  m.cells = {{1, CriterionId::parse("C1"), CellStatus::Done}, {1, CriterionId::parse("V2"), CellStatus::Pending}};
  return m;
}

Finding finding(int sid, const char* cid, Severity s) {
  Finding f;
  f.sample_id = sid;
  f.criterion_id = CriterionId::parse(cid);
  f.severity = s;
  if (s != Severity::NoIssue) {
    f.issue_description = "issue";
    f.improvement_suggestion = "fix";
  }
  f.raw_text = "{\"severity\": \"...\"}";
  f.latency_s = 1.25;
  f.input_tokens = 83076;
  f.output_tokens = 12;
  f.created_at = utc_now_iso8601();
  return f;
}

}  // namespace

TEST_CASE("manifest round trip and run listing") {
  testing::TempDir dir;
  Store store(dir.path());
  store.save_manifest(manifest("b", "2026-01-02T00:00:00.000Z"));
  store.save_manifest(manifest("a", "2026-01-03T00:00:00.000Z"));
  CHECK(store.load_manifest("b") == manifest("b", "2026-01-02T00:00:00.000Z"));
  CHECK(store.run_ids() == std::vector<std::string>{"b", "a"});
  CHECK(store.has_run("a"));
  CHECK_FALSE(store.has_run("zzz"));
}

TEST_CASE("findings append, upsert and filter") {
  testing::TempDir dir;
  Store store(dir.path());
  store.save_manifest(manifest("r"));
  const auto f1 = finding(1, "C1", Severity::Minor);
  store.append_finding("r", f1);
  CHECK(store.load_findings("r").records == std::vector<Finding>{f1});

  const auto f1b = finding(1, "C1", Severity::Major);
  const auto f2 = finding(1, "V2", Severity::NoIssue);
  store.append_finding("r", f2);
  store.append_finding("r", f1b);
  const auto all = store.load_findings("r").records;
  CHECK(all == std::vector<Finding>{f2, f1b});

  FindingFilter only_major;
  only_major.severity = Severity::Major;
  CHECK(store.load_findings("r", only_major).records == std::vector<Finding>{f1b});
  FindingFilter by_crit;
  by_crit.criterion_id = CriterionId::parse("V2");
  CHECK(store.load_findings("r", by_crit).records == std::vector<Finding>{f2});

  CHECK_THROWS_AS(store.append_finding("nope", f1), Error);
  CHECK_THROWS_AS(store.load_findings("nope"), Error);
}

TEST_CASE("records carry the schema field") {
  testing::TempDir dir;
  Store store(dir.path());
  store.save_manifest(manifest("r"));
  store.append_finding("r", finding(1, "C1", Severity::Minor));
  const auto line = read_file(store.run_dir("r") / "findings.log");
  const auto j = nlohmann::json::parse(line);
  for (const char* key : {"schema", "run_id", "sample_id", "criterion_id", "severity", "issue", "improvement", "raw",
                          "latency_s", "input_tokens", "output_tokens", "created_at"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(j["schema"] == 1);
}

TEST_CASE("truncated final line is reported, not fatal") {
  testing::TempDir dir;
  Store store(dir.path());
  store.save_manifest(manifest("r"));
  const auto f = finding(1, "C1", Severity::Minor);
  store.append_finding("r", f);
  {
    std::ofstream out(store.run_dir("r") / "findings.log", std::ios::app);
    out << "{\"schema\":1,\"run_id\":\"r\",\"sample_";
  }
  auto loaded = store.load_findings("r");
  CHECK(loaded.records == std::vector<Finding>{f});
  REQUIRE(loaded.corrupt.size() == 1);
  CHECK(loaded.corrupt[0].line == 2);

  // Later appends start on a fresh line.
  const auto g = finding(1, "V2", Severity::Major);
  store.append_finding("r", g);
  loaded = store.load_findings("r");
  CHECK(loaded.records == std::vector<Finding>{f, g});
  REQUIRE(loaded.corrupt.size() == 1);
  CHECK(loaded.corrupt[0].line == 2);
}

TEST_CASE("corrupt middle line keeps loading") {
  testing::TempDir dir;
  Store store(dir.path());
  store.save_manifest(manifest("r"));
  store.append_finding("r", finding(1, "C1", Severity::Minor));
  {
    std::ofstream out(store.run_dir("r") / "findings.log", std::ios::app);
    out << "{\"schema\":1,\"severity\":\"bogus\"}\n";
  }
  store.append_finding("r", finding(1, "V2", Severity::Minor));
  const auto loaded = store.load_findings("r");
  CHECK(loaded.records.size() == 2);
  REQUIRE(loaded.corrupt.size() == 1);
  CHECK(loaded.corrupt[0].line == 2);
}

TEST_CASE("a killed writer loses at most its last record") {
  testing::TempDir dir;
  {
    Store store(dir.path());
    store.save_manifest(manifest("r"));
  }
  const pid_t pid = ::fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    Store store(dir.path());
    for (int i = 0;; ++i) store.append_finding("r", finding(1 + i % 1000, "C1", Severity::Minor));
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(150));
  ::kill(pid, SIGKILL);
  int status = 0;
  ::waitpid(pid, &status, 0);
  Store store(dir.path());
  const auto loaded = store.load_findings("r");
  CHECK(loaded.records.size() > 0);
  CHECK(loaded.corrupt.size() <= 1);
}

TEST_CASE("concurrent appends from threads are all durable") {
  testing::TempDir dir;
  Store store(dir.path());
  store.save_manifest(manifest("r"));
  std::vector<std::thread> ts;
  for (int t = 0; t < 8; ++t) {
    ts.emplace_back([&, t] {
      for (int i = 0; i < 25; ++i) store.append_finding("r", finding(t * 100 + i, "C1", Severity::Minor));
    });
  }
  for (auto& t : ts) t.join();
  const auto loaded = store.load_findings("r");
  CHECK(loaded.records.size() == 200);
  CHECK(loaded.corrupt.empty());
}

TEST_CASE("a held lock file surfaces as a lock conflict") {
  testing::TempDir dir;
  Store store(dir.path());
  store.save_manifest(manifest("r"));
  store.append_finding("r", finding(1, "C1", Severity::Minor));
  const auto lock = store.run_dir("r") / "findings.log.lock";
  int ready[2];
  REQUIRE(::pipe(ready) == 0);
  const pid_t pid = ::fork();
  if (pid == 0) {
    const int fd = ::open(lock.c_str(), O_RDWR);
    ::flock(fd, LOCK_EX);
    (void)!::write(ready[1], "x", 1);
    ::pause();
    ::_exit(0);
  }
  char c;
  REQUIRE(::read(ready[0], &c, 1) == 1);
  CHECK_THROWS_AS(store.append_finding("r", finding(1, "V2", Severity::Minor)), StoreLockConflict);
  ::kill(pid, SIGKILL);
  ::waitpid(pid, nullptr, 0);
  CHECK_NOTHROW(store.append_finding("r", finding(1, "V2", Severity::Minor)));
}

TEST_CASE("failures, reviewers, assignments and judgments round trip") {
  testing::TempDir dir;
  Store store(dir.path());
  store.save_manifest(manifest("r"));

  FailureRecord fr{1, CriterionId::parse("V2"), "transport", "boom", "", 3, "2026-01-01T00:00:00.000Z"};
  store.append_failure("r", fr);
  CHECK(store.load_failures("r").records == std::vector<FailureRecord>{fr});

  const std::vector<Reviewer> reviewers = {{"r1", "One"}, {"r2", "Two"}};
  store.save_reviewers(reviewers);
  CHECK(store.load_reviewers() == reviewers);

  Assignment a{{"r", 1, CriterionId::parse("C1")}, Severity::Minor, {"r1", "r2", "r3"}, "t"};
  Assignment other{{"s", 2, CriterionId::parse("C2")}, Severity::Major, {"r1", "r2", "r3"}, "t"};
  const Assignment batch[] = {a, other};
  store.append_assignments(batch);
  CHECK(store.load_assignments().records.size() == 2);
  CHECK(store.load_assignments(std::string("r")).records == std::vector<Assignment>{a});

  Judgment j1{a.key, "r1", true, false, "t1"};
  Judgment j2{a.key, "r1", false, true, "t2"};
  store.append_judgment(j1);
  store.append_judgment(j2);
  CHECK(store.load_judgments().records == std::vector<Judgment>{j1, j2});
  CHECK(store.load_judgments(std::string("s")).records.empty());
}

TEST_CASE("dataset ingest is idempotent and detects replaced recordings") {
  testing::TempDir dir;
  std::filesystem::create_directories(dir / "data");
  std::ofstream(dir / "data" / "v.mp4") << "video";
  std::ofstream(dir / "data" / "m.json")
      << R"([{"id":1,"industry":"I","name":"N","duration":"00:10","url":"u","recording_path":"v.mp4"}])";
  Store store(dir / "store");
  const auto first = store.ingest_dataset(dir / "data" / "m.json");
  CHECK(first.changed);
  CHECK(first.samples.size() == 1);
  const auto again = store.ingest_dataset(dir / "data" / "m.json");
  CHECK_FALSE(again.changed);
  CHECK(store.samples() == first.samples);
  CHECK(store.changed_recordings().empty());
  std::ofstream(dir / "data" / "v.mp4") << "replaced";
  CHECK(store.changed_recordings() == std::vector<int>{1});
}

TEST_CASE("catalog snapshot") {
  testing::TempDir dir;
  Store store(dir.path());
  CHECK_FALSE(store.load_catalog_snapshot());
  store.save_catalog_snapshot(builtin_catalog());
  CHECK(store.load_catalog_snapshot() == builtin_catalog());
}
