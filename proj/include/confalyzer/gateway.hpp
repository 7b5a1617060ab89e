#pragma once

#include "confalyzer/catalog.hpp"
#include "confalyzer/error.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace confalyzer {

// Video context cost of one extracted frame.
inline constexpr std::uint64_t kTokensPerFrame = 258;

struct ModelParams {
  std::string model_name = "gemini-2.5-flash";
  double temperature = 0.0;
  double frames_per_second = 1.0;
  std::uint64_t max_context_tokens = 1'000'000;
  std::uint64_t max_output_tokens = 8192;

  // Throws InvalidArgument when an invariant is violated.
  void validate() const;
  bool operator==(const ModelParams&) const = default;
};

// ceil(duration_s * frames_per_second) * 258. Sub-second tails count as a whole frame.
std::uint64_t estimate_video_tokens(double duration_s, const ModelParams& params);

/// Half-open interval [start_s, end_s) of a recording.
struct Segment {
  double start_s = 0.0;
  double end_s = 0.0;

  double length() const noexcept { return end_s - start_s; }
  bool operator==(const Segment&) const = default;
};

struct SegmentPlan {
  std::vector<Segment> segments;
};

/// Fewest equal-length segments whose video tokens plus `prompt_tokens` fit
/// in `max_context_tokens`. Throws GatewayError(Infeasible) when not even a
/// one-second segment fits.
SegmentPlan plan_segments(double duration_s, const ModelParams& params,
                          std::uint64_t prompt_tokens);

struct VideoRef {
  std::filesystem::path path;
  double duration_s = 0.0;
  // Analyze only this part of the recording; whole recording when empty.
  std::optional<Segment> segment;

  double effective_duration() const { return segment ? segment->length() : duration_s; }
};

struct AnalyzeRequest {
  int sample_id = 0;
  CriterionId criterion_id;
  VideoRef video;
  std::string system_text;
  std::string user_text;
  ModelParams params;
};

struct RawResponse {
  std::string text;
  double latency_s = 0.0;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  std::string backend_id;
};

class GatewayError : public Error {
 public:
  enum class Kind {
    Transport,       // retryable
    RateLimited,     // retryable
    Rejected,        // provider refused the request
    BudgetExceeded,  // request exceeds the context budget
    Infeasible,      // no segmentation fits the budget
  };

  GatewayError(Kind kind, const std::string& message, int attempts = 1)
      : Error(message), kind_(kind), attempts_(attempts) {}

  Kind kind() const noexcept { return kind_; }
  int attempts() const noexcept { return attempts_; }
  bool retryable() const noexcept { return kind_ == Kind::Transport || kind_ == Kind::RateLimited; }

 private:
  Kind kind_;
  int attempts_;
};

std::string_view to_string(GatewayError::Kind kind);

/// A multimodal model endpoint. Implementations must tolerate concurrent
/// submit() calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual RawResponse submit(const AnalyzeRequest& request) = 0;
  virtual std::string id() const = 0;
  // Whether a malformed reply is worth one re-prompt.
  virtual bool supports_repair() const { return false; }
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
  // Injected for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

// Backoff before attempt `attempt + 1` (attempt is 1-based): 1 s, 2 s, 4 s, ...
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt);

/// One logical model call with bounded retry on transport and rate-limit
/// errors. Throws GatewayError(BudgetExceeded) without contacting the
/// backend when the request does not fit its context budget.
RawResponse analyze(const AnalyzeRequest& request, Backend& backend,
                    const RetryPolicy& policy = {});

}  // namespace confalyzer
