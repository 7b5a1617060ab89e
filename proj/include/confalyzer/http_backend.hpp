#pragma once

#include "confalyzer/gateway.hpp"

#include <json.hpp>

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>

namespace confalyzer {

/// Provider-specific wiring for the HTTP adapter. The defaults describe the
/// Gemini Developer API (resumable file upload + generateContent).
struct ProviderProfile {
  std::string name = "gemini";
  std::string base_url = "https://generativelanguage.googleapis.com";
  std::string api_key_env = "CONFALYZER_API_KEY";
  std::string api_key_header = "x-goog-api-key";
  std::string upload_path = "/upload/v1beta/files";
  // {model} is replaced by ModelParams::model_name.
  std::string generate_path = "/v1beta/models/{model}:generateContent";
  // {name} is replaced by the uploaded file's resource name ("files/abc").
  std::string file_status_path = "/v1beta/{name}";
  std::size_t max_in_flight = 4;
  double requests_per_second = 2.0;
  double burst = 4.0;
  std::chrono::seconds timeout{600};
  std::chrono::milliseconds poll_interval{2000};
  int max_polls = 150;
};

/// Token bucket: `rate` tokens per second, at most `burst` stored.
class RateLimiter {
 public:
  RateLimiter(double rate, double burst);
  void acquire();

 private:
  using Clock = std::chrono::steady_clock;
  double rate_;
  double burst_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mutex_;
};

namespace wire {

std::string mime_type_for(const std::filesystem::path& path);
// generateContent body for a request whose video was uploaded as `file_uri`.
nlohmann::json build_generate_request(const AnalyzeRequest& request, const std::string& file_uri);
// Concatenated candidate text plus usage counts.
RawResponse parse_generate_response(const std::string& body);
// Maps an HTTP status to the gateway error taxonomy.
GatewayError classify_status(int status, const std::string& body);

}  // namespace wire

class HttpBackend : public Backend {
 public:
  HttpBackend(ProviderProfile profile, std::string api_key);
  // Reads the credential from profile.api_key_env; throws GatewayError(Rejected) if unset.
  static std::unique_ptr<HttpBackend> from_environment(ProviderProfile profile);

  RawResponse submit(const AnalyzeRequest& request) override;
  std::string id() const override { return "http:" + profile_.name; }
  bool supports_repair() const override { return true; }

 private:
  std::string ensure_uploaded(const VideoRef& video);
  std::string upload(const std::filesystem::path& path);

  ProviderProfile profile_;
  std::string api_key_;
  RateLimiter limiter_;
  std::counting_semaphore<256> in_flight_;
  std::mutex upload_mutex_;
  std::map<std::string, std::string> uploaded_;  // path -> file uri
};

}  // namespace confalyzer
