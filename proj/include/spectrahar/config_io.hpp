#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "spectrahar/features.hpp"

namespace spectrahar {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hash_hex(std::uint64_t h);

nlohmann::json to_json(const FeatureConfig& config);
/// Missing keys keep their defaults; unknown keys throw UsageError.
FeatureConfig feature_config_from_json(const nlohmann::json& j, FeatureConfig base = {});

/// Hash of the canonical JSON serialization; identifies artifacts produced under a config.
std::uint64_t config_hash(const FeatureConfig& config);

}  // namespace spectrahar
