#include "confalyzer/config.hpp"

#include "confalyzer/records.hpp"
#include "confalyzer/util.hpp"

#include <json.hpp>

#include <set>

namespace confalyzer {

using nlohmann::json;

void Config::validate() const {
  if (review_k <= 0 || review_k % 2 == 0) throw InvalidArgument("review.k must be odd, got " + std::to_string(review_k));
  if (backend_kind != "mock" && backend_kind != "http") {
    throw InvalidArgument("backend.kind must be mock or http, got \"" + backend_kind + "\"");
  }
  if (mock_delay_scale < 0.0) throw InvalidArgument("backend.delay_scale must be non-negative");
  if (service_port < 0 || service_port > 65535) throw InvalidArgument("service.port out of range");
  params.validate();
}

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidArgument(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidArgument("unknown config key " + where + "." + key);
  }
}

std::filesystem::path resolve(const json& v, const std::filesystem::path& base) {
  std::filesystem::path p = v.get<std::string>();
  return p.is_relative() ? base / p : p;
}

ProviderProfile profile_from_json(const json& j) {
  check_keys(j,
             {"name", "base_url", "api_key_env", "api_key_header", "upload_path", "generate_path", "file_status_path",
              "max_in_flight", "requests_per_second", "burst", "timeout_s", "poll_interval_ms", "max_polls"},
             "backend.profile");
  ProviderProfile p;
  p.name = j.value("name", p.name);
  p.base_url = j.value("base_url", p.base_url);
  p.api_key_env = j.value("api_key_env", p.api_key_env);
  p.api_key_header = j.value("api_key_header", p.api_key_header);
  p.upload_path = j.value("upload_path", p.upload_path);
  p.generate_path = j.value("generate_path", p.generate_path);
  p.file_status_path = j.value("file_status_path", p.file_status_path);
  p.max_in_flight = j.value("max_in_flight", p.max_in_flight);
  p.requests_per_second = j.value("requests_per_second", p.requests_per_second);
  p.burst = j.value("burst", p.burst);
  p.timeout = std::chrono::seconds(j.value("timeout_s", static_cast<long>(p.timeout.count())));
  p.poll_interval = std::chrono::milliseconds(j.value("poll_interval_ms", static_cast<long>(p.poll_interval.count())));
  p.max_polls = j.value("max_polls", p.max_polls);
  if (p.max_in_flight == 0 || p.requests_per_second <= 0.0 || p.burst < 1.0) {
    throw InvalidArgument("backend.profile limits must be positive");
  }
  return p;
}

}  // namespace

Config load_config(std::string_view document, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"schema", "store_root", "catalog", "templates", "backend", "model", "review", "service"}, "config");
  Config c;
  try {
    if (j.contains("store_root")) c.store_root = resolve(j["store_root"], base_dir);
    if (j.contains("catalog")) c.catalog_path = resolve(j["catalog"], base_dir);
    if (j.contains("templates")) c.templates_path = resolve(j["templates"], base_dir);
    if (j.contains("backend")) {
      const auto& b = j["backend"];
      check_keys(b, {"kind", "fixture", "delay_scale", "profile"}, "backend");
      c.backend_kind = b.value("kind", c.backend_kind);
      if (b.contains("fixture")) c.mock_fixture = resolve(b["fixture"], base_dir);
      c.mock_delay_scale = b.value("delay_scale", c.mock_delay_scale);
      if (b.contains("profile")) c.profile = profile_from_json(b["profile"]);
    }
    if (j.contains("model")) c.params = params_from_json(j["model"]);
    if (j.contains("review")) {
      const auto& r = j["review"];
      check_keys(r, {"k", "seed"}, "review");
      c.review_k = r.value("k", c.review_k);
      c.review_seed = r.value("seed", c.review_seed);
    }
    if (j.contains("service")) {
      const auto& s = j["service"];
      check_keys(s, {"host", "port", "tokens"}, "service");
      c.service_host = s.value("host", c.service_host);
      c.service_port = s.value("port", c.service_port);
      if (s.contains("tokens")) c.tokens_path = resolve(s["tokens"], base_dir);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

Config load_config_file(const std::filesystem::path& path) {
  return load_config(read_file(path), std::filesystem::absolute(path).parent_path());
}

TokenTable load_tokens(std::string_view document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("token table is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("token table must map token -> reviewer id");
  TokenTable out;
  std::set<std::string> reviewers;
  for (const auto& [token, reviewer] : j.items()) {
    if (token.empty() || !reviewer.is_string()) throw InvalidArgument("token table must map token -> reviewer id");
    const auto rid = reviewer.get<std::string>();
    if (!reviewers.insert(rid).second) throw InvalidArgument("reviewer " + rid + " has more than one token");
    out.emplace(token, rid);
  }
  return out;
}

TokenTable load_tokens_file(const std::filesystem::path& path) { return load_tokens(read_file(path)); }

}  // namespace confalyzer
