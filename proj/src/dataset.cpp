#include "confalyzer/dataset.hpp"

#include "confalyzer/error.hpp"
#include "confalyzer/util.hpp"

#include <json.hpp>

#include <cstdio>
#include <set>

namespace confalyzer {

using nlohmann::json;

int parse_duration(std::string_view text) {
  const auto bad = [&](const std::string& why) {
    return InvalidArgument("bad duration \"" + std::string(text) + "\": " + why);
  };
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 3 != text.size()) {
    throw bad("expected MM:SS");
  }
  int minutes = 0;
  for (char ch : text.substr(0, colon)) {
    if (ch < '0' || ch > '9') throw bad("expected MM:SS");
    minutes = minutes * 10 + (ch - '0');
    if (minutes > 100000) throw bad("minutes out of range");
  }
  const auto ss = text.substr(colon + 1);
  if (ss[0] < '0' || ss[0] > '9' || ss[1] < '0' || ss[1] > '9') throw bad("expected MM:SS");
  const int seconds = (ss[0] - '0') * 10 + (ss[1] - '0');
  if (seconds >= 60) throw bad("seconds must be < 60");
  const int total = minutes * 60 + seconds;
  if (total <= 0) throw bad("duration must be positive");
  return total;
}

std::string format_duration(int seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d:%02d", seconds / 60, seconds % 60);
  return buf;
}

std::vector<ConfiguratorSample> parse_dataset_manifest(std::string_view document,
                                                       const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("dataset manifest parse failure: ") + e.what());
  }
  if (!doc.is_array()) throw InvalidArgument("dataset manifest must be an array of samples");
  if (doc.empty()) throw InvalidArgument("no samples");

  std::vector<ConfiguratorSample> samples;
  std::set<int> ids;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& row = doc[i];
    const auto where = "row " + std::to_string(i);
    try {
      ConfiguratorSample s;
      s.id = row.at("id").get<int>();
      s.industry = row.at("industry").get<std::string>();
      s.name = row.at("name").get<std::string>();
      s.duration_s = parse_duration(row.at("duration").get<std::string>());
      s.url = row.value("url", std::string{});
      std::filesystem::path rec = row.at("recording_path").get<std::string>();
      if (rec.is_relative()) rec = base_dir / rec;
      s.recording_path = std::filesystem::weakly_canonical(rec);
      if (!ids.insert(s.id).second) {
        throw InvalidArgument("duplicate sample id " + std::to_string(s.id));
      }
      if (!std::filesystem::is_regular_file(s.recording_path)) {
        throw InvalidArgument("missing recording file " + s.recording_path.string());
      }
      s.recording_sha256 = sha256_file(s.recording_path);
      samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw InvalidArgument(where + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(where + ": " + e.what());
    }
  }
  return samples;
}

const ConfiguratorSample& find_sample(const std::vector<ConfiguratorSample>& samples, int id) {
  for (const auto& s : samples) {
    if (s.id == id) return s;
  }
  throw InvalidArgument("unknown sample id " + std::to_string(id));
}

}  // namespace confalyzer
