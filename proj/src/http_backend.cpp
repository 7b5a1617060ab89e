#include "confalyzer/http_backend.hpp"

#include "confalyzer/util.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace confalyzer {

using nlohmann::json;

RateLimiter::RateLimiter(double rate, double burst)
    : rate_(rate), burst_(std::max(1.0, burst)), tokens_(std::max(1.0, burst)), last_(Clock::now()) {}

void RateLimiter::acquire() {
  if (rate_ <= 0.0) return;
  for (;;) {
    std::chrono::duration<double> wait{};
    {
      std::lock_guard lock(mutex_);
      const auto now = Clock::now();
      tokens_ = std::min(burst_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
      last_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    }
    std::this_thread::sleep_for(wait);
  }
}

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InvalidArgument("bad URL " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

std::string seconds_literal(double s) {
  std::ostringstream ss;
  ss.precision(3);
  ss << std::fixed << s << "s";
  return ss.str();
}

}  // namespace

namespace wire {

std::string mime_type_for(const std::filesystem::path& path) {
  const auto ext = to_lower(path.extension().string());
  if (ext == ".mp4") return "video/mp4";
  if (ext == ".webm") return "video/webm";
  if (ext == ".mov") return "video/quicktime";
  if (ext == ".mkv") return "video/x-matroska";
  return "application/octet-stream";
}

json build_generate_request(const AnalyzeRequest& request, const std::string& file_uri) {
  json video_meta = {{"fps", request.params.frames_per_second}};
  if (request.video.segment) {
    video_meta["startOffset"] = seconds_literal(request.video.segment->start_s);
    video_meta["endOffset"] = seconds_literal(request.video.segment->end_s);
  }
  json video_part = {
      {"fileData", {{"mimeType", mime_type_for(request.video.path)}, {"fileUri", file_uri}}},
      {"videoMetadata", std::move(video_meta)}};
  return json{
      {"systemInstruction", {{"parts", json::array({{{"text", request.system_text}}})}}},
      {"contents",
       json::array({{{"role", "user"},
                     {"parts", json::array({std::move(video_part), {{"text", request.user_text}}})}}})},
      {"generationConfig",
       {{"temperature", request.params.temperature},
        {"maxOutputTokens", request.params.max_output_tokens},
        {"responseMimeType", "application/json"}}}};
}

RawResponse parse_generate_response(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw GatewayError(GatewayError::Kind::Transport,
                       std::string("provider returned non-JSON payload: ") + e.what());
  }
  RawResponse r;
  const auto& candidates = doc.value("candidates", json::array());
  if (candidates.empty()) {
    throw GatewayError(GatewayError::Kind::Rejected,
                       "provider returned no candidates: " + body.substr(0, 300));
  }
  const auto& parts = candidates[0].value("content", json::object()).value("parts", json::array());
  for (const auto& p : parts) {
    if (p.contains("text") && p["text"].is_string()) r.text += p["text"].get<std::string>();
  }
  const auto usage = doc.value("usageMetadata", json::object());
  r.input_tokens = usage.value("promptTokenCount", std::uint64_t{0});
  r.output_tokens = usage.value("candidatesTokenCount", std::uint64_t{0});
  return r;
}

GatewayError classify_status(int status, const std::string& body) {
  const auto msg = "provider HTTP " + std::to_string(status) + ": " + body.substr(0, 300);
  if (status == 429) return GatewayError(GatewayError::Kind::RateLimited, msg);
  if (status == 408 || status >= 500) return GatewayError(GatewayError::Kind::Transport, msg);
  return GatewayError(GatewayError::Kind::Rejected, msg);
}

}  // namespace wire

HttpBackend::HttpBackend(ProviderProfile profile, std::string api_key)
    : profile_(std::move(profile)),
      api_key_(std::move(api_key)),
      limiter_(profile_.requests_per_second, profile_.burst),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(profile_.max_in_flight, 1, 256))) {
}

std::unique_ptr<HttpBackend> HttpBackend::from_environment(ProviderProfile profile) {
  const char* key = std::getenv(profile.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw GatewayError(GatewayError::Kind::Rejected,
                       "credential environment variable " + profile.api_key_env + " is not set");
  }
  return std::make_unique<HttpBackend>(std::move(profile), key);
}

namespace {

httplib::Client make_client(const std::string& origin, std::chrono::seconds timeout) {
  httplib::Client cli(origin);
  cli.set_connection_timeout(std::chrono::seconds(30));
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  return cli;
}

[[noreturn]] void throw_transport(const httplib::Result& res, const std::string& what) {
  throw GatewayError(GatewayError::Kind::Transport,
                     what + ": " + httplib::to_string(res.error()));
}

}  // namespace

std::string HttpBackend::upload(const std::filesystem::path& path) {
  const auto base = split_url(profile_.base_url);
  const auto bytes = read_file(path);
  const auto mime = wire::mime_type_for(path);

  auto cli = make_client(base.origin, profile_.timeout);
  httplib::Headers start_headers = {
      {profile_.api_key_header, api_key_},
      {"X-Goog-Upload-Protocol", "resumable"},
      {"X-Goog-Upload-Command", "start"},
      {"X-Goog-Upload-Header-Content-Length", std::to_string(bytes.size())},
      {"X-Goog-Upload-Header-Content-Type", mime}};
  const json start_body = {{"file", {{"display_name", path.filename().string()}}}};
  auto start = cli.Post(base.path == "/" ? profile_.upload_path : base.path + profile_.upload_path,
                        start_headers, start_body.dump(), "application/json");
  if (!start) throw_transport(start, "upload start");
  if (start->status / 100 != 2) throw wire::classify_status(start->status, start->body);
  const auto upload_url = start->get_header_value("X-Goog-Upload-URL");
  if (upload_url.empty()) {
    throw GatewayError(GatewayError::Kind::Rejected, "upload start returned no upload URL");
  }

  const auto target = split_url(upload_url);
  auto up_cli = make_client(target.origin, profile_.timeout);
  httplib::Headers up_headers = {{profile_.api_key_header, api_key_},
                                 {"X-Goog-Upload-Offset", "0"},
                                 {"X-Goog-Upload-Command", "upload, finalize"}};
  auto up = up_cli.Post(target.path, up_headers, bytes, mime);
  if (!up) throw_transport(up, "upload");
  if (up->status / 100 != 2) throw wire::classify_status(up->status, up->body);

  json file;
  try {
    file = json::parse(up->body).at("file");
  } catch (const json::exception& e) {
    throw GatewayError(GatewayError::Kind::Transport, std::string("upload response: ") + e.what());
  }
  const auto uri = file.value("uri", std::string{});
  const auto name = file.value("name", std::string{});
  auto state = file.value("state", std::string{"ACTIVE"});

  // Video files are processed asynchronously; wait until usable.
  for (int poll = 0; state == "PROCESSING"; ++poll) {
    if (poll >= profile_.max_polls) {
      throw GatewayError(GatewayError::Kind::Transport, "uploaded file " + name + " never became active");
    }
    std::this_thread::sleep_for(profile_.poll_interval);
    auto st = cli.Get((base.path == "/" ? std::string{} : base.path) +
                          replace_all(profile_.file_status_path, "{name}", name),
                      httplib::Headers{{profile_.api_key_header, api_key_}});
    if (!st) throw_transport(st, "file status");
    if (st->status / 100 != 2) throw wire::classify_status(st->status, st->body);
    state = json::parse(st->body).value("state", std::string{"ACTIVE"});
  }
  if (state == "FAILED") {
    throw GatewayError(GatewayError::Kind::Rejected, "provider failed to process " + path.string());
  }
  if (uri.empty()) throw GatewayError(GatewayError::Kind::Rejected, "upload returned no file uri");
  return uri;
}

std::string HttpBackend::ensure_uploaded(const VideoRef& video) {
  std::lock_guard lock(upload_mutex_);
  const auto key = video.path.string();
  if (auto it = uploaded_.find(key); it != uploaded_.end()) return it->second;
  auto uri = upload(video.path);
  uploaded_.emplace(key, uri);
  return uri;
}

RawResponse HttpBackend::submit(const AnalyzeRequest& request) {
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<256>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  const auto file_uri = ensure_uploaded(request.video);
  limiter_.acquire();

  const auto base = split_url(profile_.base_url);
  auto cli = make_client(base.origin, profile_.timeout);
  const auto path = (base.path == "/" ? std::string{} : base.path) +
                    replace_all(profile_.generate_path, "{model}", request.params.model_name);
  const auto body = wire::build_generate_request(request, file_uri).dump();

  const auto t0 = std::chrono::steady_clock::now();
  auto res = cli.Post(path, httplib::Headers{{profile_.api_key_header, api_key_}}, body,
                      "application/json");
  const auto t1 = std::chrono::steady_clock::now();
  if (!res) throw_transport(res, "generate");
  if (res->status / 100 != 2) throw wire::classify_status(res->status, res->body);

  auto r = wire::parse_generate_response(res->body);
  r.latency_s = std::chrono::duration<double>(t1 - t0).count();
  r.backend_id = id();
  return r;
}

}  // namespace confalyzer
