#include "spectrahar/feature_store.hpp"

#include <fstream>
#include <iterator>

#include "spectrahar/binary_io.hpp"
#include "spectrahar/config_io.hpp"
#include "spectrahar/errors.hpp"

namespace spectrahar {

namespace {
constexpr char kMagic[4] = {'S', 'H', 'F', 'S'};
}

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

void write_feature_store(const std::filesystem::path& path, const FeatureStore& store) {
  ByteWriter w;
  for (char c : kMagic) w.put<char>(c);
  w.put<std::uint32_t>(kFeatureStoreVersion);
  w.put<std::uint64_t>(config_hash(store.config));
  w.put_string(to_json(store.config).dump());
  w.put<std::uint32_t>(store.dimension);
  w.put<std::uint64_t>(store.windows.size());
  for (const auto& wf : store.windows) {
    if (wf.vector.size() != store.dimension) throw DataError("window vector length differs from store dimension");
    w.put_string(wf.sequence_id);
    w.put_string(wf.subject_id);
    w.put_string(wf.activity_id);
    w.put_string(wf.environment_id);
    w.put<std::int64_t>(wf.window_start_frame);
    for (float v : wf.vector) w.put<float>(v);
  }
  write_file_bytes(path, w.bytes());

  nlohmann::json side = {{"config", to_json(store.config)},
                         {"config_hash", hash_hex(config_hash(store.config))},
                         {"dimension", store.dimension},
                         {"records", store.windows.size()}};
  std::ofstream out(path.string() + ".json");
  if (!out) throw DataError("cannot write sidecar for " + path.string());
  out << side.dump(2) << '\n';
}

FeatureStore read_feature_store(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  ByteReader r(bytes);
  for (char c : kMagic)
    if (r.get<char>() != c) throw DataError(path.string() + " is not a feature store");
  const auto version = r.get<std::uint32_t>();
  if (version != kFeatureStoreVersion)
    throw DataError(path.string() + ": unsupported feature store version " + std::to_string(version));
  const auto hash = r.get<std::uint64_t>();
  FeatureStore store;
  try {
    store.config = feature_config_from_json(nlohmann::json::parse(r.get_string()));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": corrupt config block");
  }
  if (config_hash(store.config) != hash) throw DataError(path.string() + ": config hash mismatch");
  store.dimension = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    WindowFeature wf;
    wf.sequence_id = r.get_string();
    wf.subject_id = r.get_string();
    wf.activity_id = r.get_string();
    wf.environment_id = r.get_string();
    wf.window_start_frame = r.get<std::int64_t>();
    wf.vector.resize(store.dimension);
    for (auto& v : wf.vector) v = r.get<float>();
    store.windows.push_back(std::move(wf));
  }
  if (r.remaining() != 0) throw DataError(path.string() + ": trailing bytes after records");
  return store;
}

}  // namespace spectrahar
