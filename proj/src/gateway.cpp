#include "confalyzer/gateway.hpp"

#include "confalyzer/util.hpp"

#include <cmath>
#include <thread>

namespace confalyzer {

void ModelParams::validate() const {
  if (model_name.empty()) throw InvalidArgument("model name must not be empty");
  if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
  if (!(frames_per_second > 0.0)) throw InvalidArgument("frames_per_second must be > 0");
  if (max_context_tokens == 0) throw InvalidArgument("max_context_tokens must be > 0");
  if (max_output_tokens == 0) throw InvalidArgument("max_output_tokens must be > 0");
}

std::uint64_t estimate_video_tokens(double duration_s, const ModelParams& params) {
  if (!(duration_s >= 0.0)) throw InvalidArgument("duration must be >= 0");
  // Snap values within 1e-9 of an integer so 150.0000000001 frames stays 150.
  const double frames = duration_s * params.frames_per_second;
  const double rounded = std::round(frames);
  const double whole = std::fabs(frames - rounded) < 1e-9 ? rounded : std::ceil(frames);
  return static_cast<std::uint64_t>(whole) * kTokensPerFrame;
}

SegmentPlan plan_segments(double duration_s, const ModelParams& params,
                          std::uint64_t prompt_tokens) {
  if (!(duration_s > 0.0)) throw InvalidArgument("duration must be > 0");
  if (prompt_tokens >= params.max_context_tokens) {
    throw InvalidArgument("prompt tokens " + std::to_string(prompt_tokens) +
                          " exceed the context budget " +
                          std::to_string(params.max_context_tokens));
  }
  const std::uint64_t available = params.max_context_tokens - prompt_tokens;
  if (estimate_video_tokens(std::min(1.0, duration_s), params) > available) {
    throw GatewayError(GatewayError::Kind::Infeasible,
                       "a one-second segment needs " +
                           std::to_string(estimate_video_tokens(1.0, params)) +
                           " video tokens but only " + std::to_string(available) +
                           " fit the budget");
  }
  const auto fits = [&](std::uint64_t parts) {
    return estimate_video_tokens(duration_s / static_cast<double>(parts), params) <= available;
  };

  // Lower bound from the frame arithmetic, then walk up to absorb rounding.
  const std::uint64_t frames_per_part = available / kTokensPerFrame;
  const double total_frames = duration_s * params.frames_per_second;
  std::uint64_t parts =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(
                                     total_frames / static_cast<double>(frames_per_part))));
  while (parts > 1 && fits(parts - 1)) --parts;
  while (!fits(parts)) ++parts;

  SegmentPlan plan;
  plan.segments.reserve(parts);
  for (std::uint64_t i = 0; i < parts; ++i) {
    const double start = duration_s * static_cast<double>(i) / static_cast<double>(parts);
    const double end =
        i + 1 == parts ? duration_s
                       : duration_s * static_cast<double>(i + 1) / static_cast<double>(parts);
    plan.segments.push_back(Segment{start, end});
  }
  return plan;
}

std::string_view to_string(GatewayError::Kind kind) {
  switch (kind) {
    case GatewayError::Kind::Transport:
      return "transport";
    case GatewayError::Kind::RateLimited:
      return "rate_limited";
    case GatewayError::Kind::Rejected:
      return "rejected";
    case GatewayError::Kind::BudgetExceeded:
      return "budget_exceeded";
    case GatewayError::Kind::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt) {
  const double factor = std::pow(policy.multiplier, attempt - 1);
  return std::chrono::milliseconds(
      static_cast<std::int64_t>(static_cast<double>(policy.initial_backoff.count()) * factor));
}

RawResponse analyze(const AnalyzeRequest& request, Backend& backend, const RetryPolicy& policy) {
  if (!(request.video.duration_s > 0.0)) throw InvalidArgument("video duration must be > 0");
  const auto video_tokens = estimate_video_tokens(request.video.effective_duration(), request.params);
  const auto prompt_tokens =
      ceil_div(request.system_text.size() + request.user_text.size(), 4);
  if (video_tokens + prompt_tokens > request.params.max_context_tokens) {
    throw GatewayError(GatewayError::Kind::BudgetExceeded,
                       "request needs " + std::to_string(video_tokens + prompt_tokens) +
                           " tokens, budget is " +
                           std::to_string(request.params.max_context_tokens) +
                           "; segment the recording");
  }

  const int max_attempts = std::max(1, policy.max_attempts);
  for (int attempt = 1;; ++attempt) {
    try {
      return backend.submit(request);
    } catch (const GatewayError& e) {
      if (!e.retryable()) {
        throw GatewayError(e.kind(), e.what(), attempt);
      }
      if (attempt >= max_attempts) {
        throw GatewayError(e.kind(),
                           std::string(e.what()) + " (gave up after " + std::to_string(attempt) +
                               " attempts)",
                           attempt);
      }
      const auto delay = backoff_delay(policy, attempt);
      if (policy.sleep) {
        policy.sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
    }
  }
}

}  // namespace confalyzer
