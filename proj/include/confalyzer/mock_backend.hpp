#pragma once

#include "confalyzer/gateway.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace confalyzer {

/// Canned responses keyed by "sample_id/criterion_id" (e.g. "3/V1").
///
/// File format:
///   {"schema": 1, "default_latency_s": 1.0,
///    "responses": {"3/V1": {"text": "...", "latency_s": 12.5}, "3/V2": "..."}}
struct MockFixture {
  struct Entry {
    std::string text;
    std::optional<double> latency_s;
  };
  std::map<std::string, Entry> responses;
  double default_latency_s = 1.0;

  static std::string key(int sample_id, const CriterionId& criterion_id);
};

MockFixture load_mock_fixture(std::string_view document);
MockFixture load_mock_fixture_file(const std::filesystem::path& path);
std::string dump_mock_fixture(const MockFixture& fixture);

/// Deterministic offline backend. Never touches the network or the video.
class MockBackend : public Backend {
 public:
  struct Options {
    // Sleep for latency * delay_scale seconds per call (0 = no sleep).
    double delay_scale = 0.0;
    // Reply used for keys missing from the fixture; rejected when empty.
    std::optional<std::string> fallback_text;
    // Appends one line per invocation; survives a killed process.
    std::optional<std::filesystem::path> invocation_log;
  };

  explicit MockBackend(MockFixture fixture);
  MockBackend(MockFixture fixture, Options options);

  RawResponse submit(const AnalyzeRequest& request) override;
  std::string id() const override { return "mock"; }

  std::size_t invocation_count() const noexcept { return invocations_.load(); }

 private:
  MockFixture fixture_;
  Options options_;
  std::atomic<std::size_t> invocations_{0};
  std::mutex log_mutex_;
};

// Lines in a MockBackend invocation log (0 if it does not exist).
std::size_t count_invocations(const std::filesystem::path& invocation_log);

}  // namespace confalyzer
