#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "spectrahar/features.hpp"

namespace spectrahar {

/// Window features extracted from one manifest under one configuration.
///
/// Binary layout (little-endian):
///   "SHFS" | u32 version | u64 config hash | string config json |
///   u32 dimension | u64 record count |
///   per record: 4 x string (sequence, subject, activity, environment) |
///               i64 window start frame | f32[dimension]
/// where string = u32 length + bytes. A JSON sidecar `<path>.json` echoes
/// the configuration for humans.
struct FeatureStore {
  FeatureConfig config;
  std::uint32_t dimension = 0;
  std::vector<WindowFeature> windows;
};

inline constexpr std::uint32_t kFeatureStoreVersion = 1;

void write_feature_store(const std::filesystem::path& path, const FeatureStore& store);
FeatureStore read_feature_store(const std::filesystem::path& path);

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes);

}  // namespace spectrahar
