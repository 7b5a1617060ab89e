#pragma once

#include "confalyzer/gateway.hpp"
#include "confalyzer/http_backend.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace confalyzer {

/// Settings shared by all subcommands. Relative paths in a config file are
/// resolved against the file's directory.
///
///   {"store_root": "store", "catalog": "catalog.json", "templates": "templates.json",
///    "backend": {"kind": "mock", "fixture": "mock.json", "delay_scale": 0,
///                "profile": {"base_url": "...", "api_key_env": "..."}},
///    "model": {"model_name": "...", "temperature": 0.0, ...},
///    "review": {"k": 3, "seed": 7},
///    "service": {"host": "127.0.0.1", "port": 8080, "tokens": "tokens.json"}}
struct Config {
  std::filesystem::path store_root = "store";
  std::optional<std::filesystem::path> catalog_path;    // built-in catalog when empty
  std::optional<std::filesystem::path> templates_path;  // built-in templates when empty

  std::string backend_kind = "mock";  // mock | http
  std::optional<std::filesystem::path> mock_fixture;
  double mock_delay_scale = 0.0;
  ProviderProfile profile;

  ModelParams params;

  int review_k = 3;
  std::uint64_t review_seed = 0;

  std::string service_host = "127.0.0.1";
  int service_port = 8080;
  std::optional<std::filesystem::path> tokens_path;

  // Throws InvalidArgument on an even k, an unknown backend kind, bad
  // model parameters or an out-of-range port.
  void validate() const;
};

Config load_config(std::string_view document, const std::filesystem::path& base_dir);
Config load_config_file(const std::filesystem::path& path);

// token -> reviewer id. Throws InvalidArgument if two tokens map to one reviewer.
using TokenTable = std::map<std::string, std::string>;
TokenTable load_tokens(std::string_view document);
TokenTable load_tokens_file(const std::filesystem::path& path);

}  // namespace confalyzer
