#include "confalyzer/service.hpp"

#include "confalyzer/review.hpp"
#include "confalyzer/reporting.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

namespace confalyzer {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, json body) {
  body["schema"] = kSchemaVersion;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  send_json(res, status, std::move(extra));
}

std::string rate_text(const PartitionSummary& p, Rational (PartitionSummary::*rate)() const) {
  return p.n == 0 ? std::string{} : format_decimal((p.*rate)(), 3);
}

json rate_value(const PartitionSummary& p, Rational (PartitionSummary::*rate)() const) {
  if (p.n == 0) return nullptr;
  const Rational r = (p.*rate)();
  return json{{"numerator", r.numerator()}, {"denominator", r.denominator()}, {"value", to_double(r)},
              {"text", rate_text(p, rate)}};
}

json partition_json(const char* name, const PartitionSummary& p) {
  return json{{"partition", name},
              {"n", p.n},
              {"issue_plausible", p.issue_plausible},
              {"improvement_plausible", p.improvement_plausible},
              {"issue_rate", rate_value(p, &PartitionSummary::issue_rate)},
              {"improvement_rate", rate_value(p, &PartitionSummary::improvement_rate)},
              {"issue_full_agreement", p.issue_full_agreement},
              {"improvement_full_agreement", p.improvement_full_agreement}};
}

json verdict_json(const Verdict& v) {
  auto j = key_to_json(v.key);
  j["severity"] = std::string(to_label(v.severity));
  j["issue_plausible_majority"] = v.issue_plausible_majority;
  j["improvement_plausible_majority"] = v.improvement_plausible_majority;
  j["full_agreement_issue"] = v.full_agreement_issue;
  j["full_agreement_improvement"] = v.full_agreement_improvement;
  return j;
}

std::optional<std::string> run_param(const httplib::Request& req) {
  if (req.has_param("run")) return req.get_param_value("run");
  return std::nullopt;
}

}  // namespace

ReviewService::ReviewService(std::filesystem::path store_root, TokenTable tokens)
    : store_(std::make_unique<Store>(std::move(store_root))),
      tokens_(std::move(tokens)),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ReviewService::~ReviewService() { stop(); }

int ReviewService::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void ReviewService::wait() {
  if (thread_.joinable()) thread_.join();
}

void ReviewService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void ReviewService::install_routes() {
  auto& srv = *server_;
  Store& store = *store_;
  const TokenTable& tokens = tokens_;

  // Reviewer id for the request's token, or nullopt (response already set to 401).
  auto authenticate = [&tokens](const httplib::Request& req, httplib::Response& res) -> std::optional<std::string> {
    std::string token;
    const auto header = req.get_header_value("Authorization");
    if (header.rfind("Bearer ", 0) == 0) {
      token = header.substr(7);
    } else if (req.has_param("token")) {
      token = req.get_param_value("token");
    }
    auto it = tokens.find(token);
    if (token.empty() || it == tokens.end()) {
      send_error(res, 401, "missing or invalid token");
      return std::nullopt;
    }
    return it->second;
  };

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const StoreLockConflict& e) {
      send_error(res, 409, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  });

  srv.Get("/api/queue", [&store, authenticate](const httplib::Request& req, httplib::Response& res) {
    const auto who = authenticate(req, res);
    if (!who) return;
    const std::string reviewer = req.has_param("reviewer") ? req.get_param_value("reviewer") : *who;
    const auto reviewers = store.load_reviewers();
    if (std::none_of(reviewers.begin(), reviewers.end(), [&](const Reviewer& r) { return r.id == reviewer; })) {
      return send_error(res, 404, "unknown reviewer " + reviewer);
    }
    if (reviewer != *who) return send_error(res, 403, "token does not belong to reviewer " + reviewer);

    const auto assignments = store.load_assignments().records;
    const auto judgments = store.load_judgments().records;
    std::set<FindingKey> judged;
    for (const auto& j : judgments) {
      if (j.reviewer_id == reviewer) judged.insert(j.key);
    }
    const Catalog catalog = store.load_catalog_snapshot().value_or(builtin_catalog());
    std::map<int, ConfiguratorSample> samples;
    for (auto& s : store.samples()) samples.emplace(s.id, std::move(s));
    std::map<std::string, std::map<std::pair<int, std::string>, Finding>> findings;  // by run

    json items = json::array();
    std::size_t total = 0;
    for (const auto& a : assignments) {
      if (std::find(a.reviewer_ids.begin(), a.reviewer_ids.end(), reviewer) == a.reviewer_ids.end()) continue;
      ++total;
      if (judged.count(a.key)) continue;
      if (!findings.count(a.key.run_id)) {
        auto& by_cell = findings[a.key.run_id];
        for (auto& f : store.load_findings(a.key.run_id).records) {
          by_cell.emplace(std::make_pair(f.sample_id, f.criterion_id.str()), std::move(f));
        }
      }
      json item;
      item["finding_key"] = key_to_json(a.key);
      const auto* crit = catalog.find(a.key.criterion_id.str());
      item["criterion"] = {{"id", a.key.criterion_id.str()},
                           {"name", crit ? crit->name : ""},
                           {"description", crit ? crit->description : ""}};
      auto sit = samples.find(a.key.sample_id);
      item["sample"] = {{"id", a.key.sample_id},
                        {"name", sit != samples.end() ? sit->second.name : ""},
                        {"industry", sit != samples.end() ? sit->second.industry : ""}};
      item["severity"] = std::string(to_label(a.severity));
      const auto& by_cell = findings[a.key.run_id];
      auto fit = by_cell.find({a.key.sample_id, a.key.criterion_id.str()});
      item["issue"] = fit != by_cell.end() && fit->second.issue_description ? json(*fit->second.issue_description)
                                                                            : json(nullptr);
      item["improvement"] = fit != by_cell.end() && fit->second.improvement_suggestion
                                ? json(*fit->second.improvement_suggestion)
                                : json(nullptr);
      item["recording_url"] = "/api/recordings/" + std::to_string(a.key.sample_id);
      items.push_back(std::move(item));
    }
    const std::size_t pending = items.size();
    for (std::size_t i = 0; i < items.size(); ++i) {
      items[i]["position"] = i + 1;
      items[i]["total"] = pending;
    }
    send_json(res, 200,
              json{{"reviewer_id", reviewer}, {"assigned", total}, {"judged", total - pending}, {"items", items}});
  });

  srv.Get(R"(/api/recordings/(\d+))", [&store, authenticate](const httplib::Request& req, httplib::Response& res) {
    if (!authenticate(req, res)) return;
    const int id = std::stoi(req.matches[1]);
    std::optional<ConfiguratorSample> sample;
    for (auto& s : store.samples()) {
      if (s.id == id) sample = std::move(s);
    }
    if (!sample || !std::filesystem::is_regular_file(sample->recording_path)) {
      return send_error(res, 404, "unknown recording " + std::to_string(id));
    }
    const auto path = sample->recording_path;
    const auto size = static_cast<std::size_t>(std::filesystem::file_size(path));
    auto file = std::make_shared<std::ifstream>(path, std::ios::binary);
    res.set_header("Accept-Ranges", "bytes");
    res.set_content_provider(size, wire::mime_type_for(path),
                             [file](std::size_t offset, std::size_t length, httplib::DataSink& sink) {
                               char buf[64 * 1024];
                               file->clear();
                               file->seekg(static_cast<std::streamoff>(offset));
                               const auto want = std::min(length, sizeof buf);
                               file->read(buf, static_cast<std::streamsize>(want));
                               const auto got = static_cast<std::size_t>(file->gcount());
                               if (got == 0) return false;
                               return sink.write(buf, got);
                             });
  });

  srv.Post("/api/judgments", [&store, authenticate](const httplib::Request& req, httplib::Response& res) {
    const auto who = authenticate(req, res);
    if (!who) return;
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error&) {
      return send_error(res, 422, "body is not valid JSON");
    }
    if (!body.is_object()) return send_error(res, 422, "body must be an object");
    for (const char* field : {"finding_key", "issue_plausible", "improvement_plausible"}) {
      if (!body.contains(field) || body[field].is_null()) {
        return send_error(res, 422, std::string("missing field ") + field, json{{"field", field}});
      }
    }
    for (const char* field : {"issue_plausible", "improvement_plausible"}) {
      if (!body[field].is_boolean()) {
        return send_error(res, 422, std::string("field ") + field + " must be a boolean", json{{"field", field}});
      }
    }
    Judgment j;
    try {
      j.key = key_from_json(body["finding_key"]);
    } catch (const std::exception& e) {
      return send_error(res, 422, std::string("bad finding_key: ") + e.what(), json{{"field", "finding_key"}});
    }
    if (body.contains("reviewer_id") && body["reviewer_id"] != *who) {
      return send_error(res, 403, "token does not belong to reviewer " + body["reviewer_id"].dump());
    }
    j.reviewer_id = *who;
    j.issue_plausible = body["issue_plausible"].get<bool>();
    j.improvement_plausible = body["improvement_plausible"].get<bool>();
    try {
      const Judgment stored = record_judgment(store, j);
      send_json(res, 201, json{{"judgment", to_json(stored)}});
    } catch (const ReviewError& e) {
      send_error(res, e.kind() == ReviewError::Kind::UnknownFinding ? 404 : 403, e.what());
    }
  });

  srv.Get("/api/verdicts", [&store, authenticate](const httplib::Request& req, httplib::Response& res) {
    if (!authenticate(req, res)) return;
    const auto run = run_param(req);
    const auto set = verdicts(store.load_judgments(run).records, store.load_assignments(run).records);
    json vs = json::array();
    for (const auto& v : set.verdicts) vs.push_back(verdict_json(v));
    json inc = json::array();
    for (const auto& k : set.incomplete) inc.push_back(key_to_json(k));
    send_json(res, 200, json{{"verdicts", vs}, {"incomplete", inc}});
  });

  srv.Get("/api/reports/plausibility", [&store, authenticate](const httplib::Request& req, httplib::Response& res) {
    if (!authenticate(req, res)) return;
    const auto run = run_param(req);
    const auto report =
        plausibility_report(verdicts(store.load_judgments(run).records, store.load_assignments(run).records));
    send_json(res, 200,
              json{{"completed", report.completed},
                   {"incomplete", report.incomplete},
                   {"rows", json::array({partition_json("minor", report.summary.minor),
                                         partition_json("major", report.summary.major),
                                         partition_json("all", report.summary.all)})}});
  });
}

}  // namespace confalyzer
