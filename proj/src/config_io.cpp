#include "spectrahar/config_io.hpp"

#include <cstdio>

#include "spectrahar/errors.hpp"

namespace spectrahar {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const FeatureConfig& c) {
  json stats = json::array();
  for (auto s : c.temporal_stats) stats.push_back(to_string(s));
  return {{"strategy", to_string(c.strategy)},
          {"use_eigenvectors", c.use_eigenvectors},
          {"k_val", c.k_val},
          {"k_vec", c.k_vec},
          {"window_seconds", c.window_seconds},
          {"stride_seconds", c.stride_seconds},
          {"radius_m", c.radius_m},
          {"parts", c.sorted_parts()},
          {"min_valid_fraction", c.min_valid_fraction},
          {"temporal_stats", stats}};
}

FeatureConfig feature_config_from_json(const json& j, FeatureConfig c) {
  if (!j.is_object()) throw UsageError("feature config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "strategy") c.strategy = parse_strategy(v.get<std::string>());
      else if (key == "use_eigenvectors") c.use_eigenvectors = v.get<bool>();
      else if (key == "k_val") c.k_val = v.get<int>();
      else if (key == "k_vec") c.k_vec = v.get<int>();
      else if (key == "window_seconds") c.window_seconds = v.get<double>();
      else if (key == "stride_seconds") c.stride_seconds = v.get<double>();
      else if (key == "radius_m") c.radius_m = v.get<double>();
      else if (key == "parts") c.parts = v.get<std::vector<int>>();
      else if (key == "min_valid_fraction") c.min_valid_fraction = v.get<double>();
      else if (key == "temporal_stats") {
        c.temporal_stats.clear();
        for (const auto& s : v) c.temporal_stats.push_back(parse_temporal_stat(s.get<std::string>()));
      } else {
        throw UsageError("unknown feature config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad feature config: ") + e.what());
  }
  return c;
}

std::uint64_t config_hash(const FeatureConfig& config) { return fnv1a64(to_json(config).dump()); }

}  // namespace spectrahar
