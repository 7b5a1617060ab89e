#include "confalyzer/mock_backend.hpp"

#include "confalyzer/prompt.hpp"
#include "confalyzer/util.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <thread>

namespace confalyzer {

using nlohmann::json;

std::string MockFixture::key(int sample_id, const CriterionId& criterion_id) {
  return std::to_string(sample_id) + "/" + criterion_id.str();
}

MockFixture load_mock_fixture(std::string_view document) {
  MockFixture fixture;
  try {
    const auto doc = json::parse(document);
    fixture.default_latency_s = doc.value("default_latency_s", 1.0);
    for (const auto& [k, v] : doc.at("responses").items()) {
      MockFixture::Entry entry;
      if (v.is_string()) {
        entry.text = v.get<std::string>();
      } else {
        entry.text = v.at("text").get<std::string>();
        if (v.contains("latency_s")) entry.latency_s = v["latency_s"].get<double>();
      }
      fixture.responses.emplace(k, std::move(entry));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("mock fixture: ") + e.what());
  }
  return fixture;
}

MockFixture load_mock_fixture_file(const std::filesystem::path& path) {
  return load_mock_fixture(read_file(path));
}

std::string dump_mock_fixture(const MockFixture& fixture) {
  json responses = json::object();
  for (const auto& [k, e] : fixture.responses) {
    json entry = {{"text", e.text}};
    if (e.latency_s) entry["latency_s"] = *e.latency_s;
    responses[k] = std::move(entry);
  }
  return json{{"schema", 1},
              {"default_latency_s", fixture.default_latency_s},
              {"responses", std::move(responses)}}
             .dump(2) +
         "\n";
}

MockBackend::MockBackend(MockFixture fixture) : MockBackend(std::move(fixture), Options{}) {}

MockBackend::MockBackend(MockFixture fixture, Options options)
    : fixture_(std::move(fixture)), options_(std::move(options)) {}

RawResponse MockBackend::submit(const AnalyzeRequest& request) {
  invocations_.fetch_add(1);
  const auto key = MockFixture::key(request.sample_id, request.criterion_id);
  if (options_.invocation_log) {
    std::lock_guard lock(log_mutex_);
    const int fd = ::open(options_.invocation_log->c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd >= 0) {
      const auto line = key + "\n";
      [[maybe_unused]] auto n = ::write(fd, line.data(), line.size());
      ::close(fd);
    }
  }

  const auto it = fixture_.responses.find(key);
  std::string text;
  double latency = fixture_.default_latency_s;
  if (it != fixture_.responses.end()) {
    text = it->second.text;
    if (it->second.latency_s) latency = *it->second.latency_s;
  } else if (options_.fallback_text) {
    text = *options_.fallback_text;
  } else {
    throw GatewayError(GatewayError::Kind::Rejected, "mock fixture has no response for " + key);
  }

  if (options_.delay_scale > 0.0) {
    std::this_thread::sleep_for(std::chrono::duration<double>(latency * options_.delay_scale));
  }

  RawResponse r;
  r.text = std::move(text);
  r.latency_s = latency;
  r.input_tokens = estimate_video_tokens(request.video.effective_duration(), request.params) +
                   ceil_div(request.system_text.size() + request.user_text.size(), 4);
  r.output_tokens = estimate_text_tokens(r.text);
  r.backend_id = id();
  return r;
}

std::size_t count_invocations(const std::filesystem::path& invocation_log) {
  std::ifstream in(invocation_log);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++n;
  }
  return n;
}

}  // namespace confalyzer
