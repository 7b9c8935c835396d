#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace spectrahar {

using Point3 = Eigen::Vector3d;

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Maps sensor axes onto the canonical frame: component 0 is lateral,
/// component 1 vertical, component 2 depth.
struct AxisConvention {
  Axis lateral = Axis::X;
  Axis vertical = Axis::Y;
  Axis depth = Axis::Z;

  bool valid() const;
  static AxisConvention parse(const std::string& spec);  // e.g. "XYZ", "YZX"
  std::string to_string() const;
};

/// Upright box in the canonical frame. `size` is the full extent along
/// (lateral, vertical, depth); `yaw` rotates the box about the vertical axis.
struct BoundingBox {
  Point3 center = Point3::Zero();
  Point3 size = Point3::Ones();
  double yaw = 0.0;
};

struct FrameCloud {
  std::vector<Point3> points;
  std::size_t frame_index = 0;
  double timestamp = 0.0;
  std::size_t dropped_nonfinite = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct SequenceRecord {
  std::string sequence_id;
  std::string subject_id;
  std::string activity_id;
  std::string environment_id;
  std::vector<std::filesystem::path> frame_paths;  // resolved against the manifest directory
  double frame_rate_hz = 10.0;
  std::optional<BoundingBox> bbox;
  AxisConvention axes;
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<SequenceRecord> records;
  std::size_t warnings = 0;  // unknown fields encountered
};

/// Reads a JSON-lines manifest. Throws DataError (with 1-based line number)
/// on parse errors, missing fields and duplicate (subject, activity, sequence) keys.
Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<SequenceRecord>& records);

enum class FrameFormat { Xyz, Bin, Ply };

FrameFormat format_from_extension(const std::filesystem::path& path);

/// Loads a .xyz, .bin or .ply frame and reorders axes per `convention`.
/// Non-finite points are dropped and counted in `dropped_nonfinite`.
FrameCloud load_frame(const std::filesystem::path& path, const AxisConvention& convention = {});

/// Writes canonical-order coordinates; format chosen from the extension.
void write_frame(const std::filesystem::path& path, const FrameCloud& frame);

FrameCloud crop_to_bbox(const FrameCloud& frame, const BoundingBox& box);

}  // namespace spectrahar
