#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace confalyzer {

/// One audited configurator and its screen recording.
struct ConfiguratorSample {
  int id = 0;
  std::string industry;
  std::string name;
  int duration_s = 0;
  std::string url;
  // Absolute once ingested.
  std::filesystem::path recording_path;
  // SHA-256 of the recording at ingest time; empty before ingest.
  std::string recording_sha256;

  bool operator==(const ConfiguratorSample&) const = default;
};

// "MM:SS" -> seconds. Throws InvalidArgument on malformed text, SS >= 60 or a zero duration.
int parse_duration(std::string_view text);
std::string format_duration(int seconds);

/// Parses and validates a dataset manifest (JSON array of
/// {id, industry, name, duration:"MM:SS", url, recording_path}).
///
/// Relative recording paths resolve against `base_dir`. Each recording must
/// exist; its content hash is computed here.
std::vector<ConfiguratorSample> parse_dataset_manifest(std::string_view document,
                                                       const std::filesystem::path& base_dir);

const ConfiguratorSample& find_sample(const std::vector<ConfiguratorSample>& samples, int id);

}  // namespace confalyzer
