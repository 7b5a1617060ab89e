#pragma once

#include "confalyzer/config.hpp"
#include "confalyzer/store.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace confalyzer {

/// HTTP API for the review UI. Every request re-reads the store, so the
/// service holds no state besides the token table.
///
///   GET  /api/queue?reviewer=<id>
///   GET  /api/recordings/<sample_id>      (Range requests supported)
///   POST /api/judgments
///   GET  /api/verdicts[?run=<id>]
///   GET  /api/reports/plausibility[?run=<id>]
///
/// Requests authenticate with "Authorization: Bearer <token>" or, for media
/// elements that cannot set headers, a "token" query parameter.
class ReviewService {
 public:
  ReviewService(std::filesystem::path store_root, TokenTable tokens);
  ~ReviewService();
  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port.
  int start(const std::string& host, int port);
  // Blocks until stop() is called from elsewhere.
  void wait();
  void stop();

 private:
  void install_routes();

  std::unique_ptr<Store> store_;
  TokenTable tokens_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace confalyzer
