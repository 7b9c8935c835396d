#include "spectrahar/ingest.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "spectrahar/errors.hpp"

namespace spectrahar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

char axis_char(Axis a) { return "XYZ"[static_cast<int>(a)]; }

Axis axis_from_char(char c) {
  switch (c) {
    case 'X': case 'x': return Axis::X;
    case 'Y': case 'y': return Axis::Y;
    case 'Z': case 'z': return Axis::Z;
    default: throw DataError(std::string("unknown axis '") + c + "'");
  }
}

const std::set<std::string>& known_manifest_fields() {
  static const std::set<std::string> fields = {
      "sequence_id", "subject_id", "activity_id", "environment_id",
      "frame_rate_hz", "frames", "bbox", "axes"};
  return fields;
}

Point3 parse_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw DataError(what + " must be an array of 3 numbers");
  Point3 p;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw DataError(what + " must be an array of 3 numbers");
    p[i] = j[i].get<double>();
  }
  return p;
}

std::string required_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw DataError(std::string("missing required field '") + key + "'");
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

SequenceRecord parse_record(const json& j, const fs::path& base_dir, std::size_t& warnings) {
  if (!j.is_object()) throw DataError("record must be a JSON object");
  SequenceRecord r;
  r.sequence_id = required_string(j, "sequence_id");
  r.subject_id = required_string(j, "subject_id");
  r.activity_id = required_string(j, "activity_id");
  r.environment_id = required_string(j, "environment_id");

  if (auto it = j.find("frame_rate_hz"); it != j.end()) {
    if (!it->is_number()) throw DataError("field 'frame_rate_hz' must be a number");
    r.frame_rate_hz = it->get<double>();
  }
  if (!(r.frame_rate_hz > 0.0)) throw DataError("frame_rate_hz must be > 0");

  auto frames = j.find("frames");
  if (frames == j.end()) throw DataError("missing required field 'frames'");
  if (!frames->is_array() || frames->empty()) throw DataError("field 'frames' must be a non-empty array");
  for (const auto& f : *frames) {
    if (!f.is_string()) throw DataError("frame paths must be strings");
    fs::path p = f.get<std::string>();
    r.frame_paths.push_back(p.is_absolute() ? p : base_dir / p);
  }

  if (auto it = j.find("bbox"); it != j.end() && !it->is_null()) {
    BoundingBox box;
    if (!it->contains("center") || !it->contains("size")) throw DataError("bbox needs center and size");
    box.center = parse_vec3((*it)["center"], "bbox.center");
    box.size = parse_vec3((*it)["size"], "bbox.size");
    box.yaw = it->value("yaw", 0.0);
    if ((box.size.array() <= 0.0).any()) throw DataError("bbox size components must be > 0");
    r.bbox = box;
  }
  if (auto it = j.find("axes"); it != j.end()) {
    if (!it->is_string()) throw DataError("field 'axes' must be a string like \"XYZ\"");
    r.axes = AxisConvention::parse(it->get<std::string>());
  }
  for (const auto& [key, _] : j.items()) {
    if (!known_manifest_fields().count(key)) ++warnings;
  }
  return r;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  // from_chars rejects a leading '+'
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

void push_point(FrameCloud& frame, const Point3& raw, const AxisConvention& c) {
  if (!raw.allFinite()) {
    ++frame.dropped_nonfinite;
    return;
  }
  frame.points.emplace_back(raw[static_cast<int>(c.lateral)], raw[static_cast<int>(c.vertical)],
                            raw[static_cast<int>(c.depth)]);
}

std::ifstream open_input(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

void load_xyz(const fs::path& path, const AxisConvention& c, FrameCloud& frame) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty() || toks.front().front() == '#') continue;
    if (toks.size() < 3) throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 3 coordinates");
    Point3 p;
    for (int k = 0; k < 3; ++k) {
      if (!parse_number(toks[k], p[k]))
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric value '" +
                        std::string(toks[k]) + "'");
    }
    push_point(frame, p, c);
  }
}

float load_le_float(const unsigned char* bytes) {
  std::uint32_t bits;
  std::memcpy(&bits, bytes, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

void load_bin(const fs::path& path, const AxisConvention& c, FrameCloud& frame) {
  auto in = open_input(path, std::ios::binary);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() % 12 != 0)
    throw DataError(path.string() + ": truncated binary frame (" + std::to_string(buf.size()) +
                    " bytes is not a multiple of 12)");
  frame.points.reserve(buf.size() / 12);
  for (std::size_t off = 0; off < buf.size(); off += 12) {
    Point3 p(load_le_float(&buf[off]), load_le_float(&buf[off + 4]), load_le_float(&buf[off + 8]));
    push_point(frame, p, c);
  }
}

void load_ply(const fs::path& path, const AxisConvention& c, FrameCloud& frame) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + msg);
  };

  if (!std::getline(in, line) || split_ws(line) != std::vector<std::string_view>{"ply"}) {
    line_no = 1;
    fail("missing 'ply' magic");
  }
  ++line_no;

  // Elements before "vertex" must be skipped line by line; elements after it are ignored.
  struct Element { std::string name; std::size_t count; std::size_t n_props = 0; };
  std::vector<Element> elements;
  int ix = -1, iy = -1, iz = -1;
  bool ascii = false;
  while (true) {
    if (!std::getline(in, line)) fail("unexpected end of header");
    ++line_no;
    auto t = split_ws(line);
    if (t.empty() || t[0] == "comment" || t[0] == "obj_info") continue;
    if (t[0] == "end_header") break;
    if (t[0] == "format") {
      if (t.size() < 2) fail("bad format line");
      if (t[1] != "ascii") fail("only ASCII PLY is supported (got " + std::string(t[1]) + ")");
      ascii = true;
    } else if (t[0] == "element") {
      std::size_t count = 0;
      if (t.size() != 3 || !parse_number(t[2], count)) fail("bad element line");
      elements.push_back({std::string(t[1]), count});
    } else if (t[0] == "property") {
      if (elements.empty()) fail("property before element");
      auto& e = elements.back();
      if (e.name == "vertex") {
        if (t.size() >= 2 && t[1] == "list") fail("list property on vertex element");
        std::string_view name = t.back();
        int idx = static_cast<int>(e.n_props);
        if (name == "x") ix = idx;
        else if (name == "y") iy = idx;
        else if (name == "z") iz = idx;
      }
      ++e.n_props;
    } else {
      fail("unexpected header line '" + line + "'");
    }
  }
  if (!ascii) fail("missing format line");
  if (ix < 0 || iy < 0 || iz < 0) fail("vertex element lacks x, y, z properties");

  for (const auto& e : elements) {
    for (std::size_t k = 0; k < e.count; ++k) {
      if (!std::getline(in, line)) fail("truncated body: expected " + std::to_string(e.count) + " " + e.name);
      ++line_no;
      if (e.name != "vertex") continue;
      auto t = split_ws(line);
      if (t.size() < e.n_props) fail("vertex record has too few values");
      Point3 p;
      if (!parse_number(t[ix], p[0]) || !parse_number(t[iy], p[1]) || !parse_number(t[iz], p[2]))
        fail("non-numeric vertex coordinate");
      push_point(frame, p, c);
    }
    if (e.name == "vertex") break;
  }
}

}  // namespace

bool AxisConvention::valid() const {
  return lateral != vertical && lateral != depth && vertical != depth;
}

AxisConvention AxisConvention::parse(const std::string& spec) {
  if (spec.size() != 3) throw DataError("axis convention must have 3 letters, got '" + spec + "'");
  AxisConvention c{axis_from_char(spec[0]), axis_from_char(spec[1]), axis_from_char(spec[2])};
  if (!c.valid()) throw DataError("axis convention '" + spec + "' repeats an axis");
  return c;
}

std::string AxisConvention::to_string() const {
  return {axis_char(lateral), axis_char(vertical), axis_char(depth)};
}

Manifest load_manifest(const fs::path& path) {
  auto in = open_input(path);
  Manifest m;
  m.base_dir = path.parent_path();
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (split_ws(line).empty()) continue;
    auto where = [&] { return path.string() + ":" + std::to_string(line_no) + ": "; };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where() + "parse error: " + e.what());
    }
    SequenceRecord r;
    try {
      r = parse_record(j, m.base_dir, m.warnings);
    } catch (const DataError& e) {
      throw DataError(where() + e.what());
    }
    if (!seen.emplace(r.subject_id, r.activity_id, r.sequence_id).second)
      throw DataError(where() + "duplicate key (subject=" + r.subject_id + ", activity=" + r.activity_id +
                      ", sequence=" + r.sequence_id + ")");
    m.records.push_back(std::move(r));
  }
  return m;
}

void write_manifest(const fs::path& path, const std::vector<SequenceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  const fs::path base = path.parent_path();
  for (const auto& r : records) {
    json j;
    j["sequence_id"] = r.sequence_id;
    j["subject_id"] = r.subject_id;
    j["activity_id"] = r.activity_id;
    j["environment_id"] = r.environment_id;
    j["frame_rate_hz"] = r.frame_rate_hz;
    json frames = json::array();
    for (const auto& f : r.frame_paths) frames.push_back(f.lexically_relative(base).generic_string());
    j["frames"] = frames;
    if (r.bbox) {
      j["bbox"] = {{"center", {r.bbox->center[0], r.bbox->center[1], r.bbox->center[2]}},
                   {"size", {r.bbox->size[0], r.bbox->size[1], r.bbox->size[2]}},
                   {"yaw", r.bbox->yaw}};
    }
    if (r.axes.to_string() != "XYZ") j["axes"] = r.axes.to_string();
    out << j.dump() << '\n';
  }
}

FrameFormat format_from_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (ext == ".xyz" || ext == ".txt") return FrameFormat::Xyz;
  if (ext == ".bin") return FrameFormat::Bin;
  if (ext == ".ply") return FrameFormat::Ply;
  throw DataError("unknown frame extension '" + ext + "' for " + path.string());
}

FrameCloud load_frame(const fs::path& path, const AxisConvention& convention) {
  if (!convention.valid()) throw DataError("invalid axis convention");
  FrameCloud frame;
  switch (format_from_extension(path)) {
    case FrameFormat::Xyz: load_xyz(path, convention, frame); break;
    case FrameFormat::Bin: load_bin(path, convention, frame); break;
    case FrameFormat::Ply: load_ply(path, convention, frame); break;
  }
  return frame;
}

void write_frame(const fs::path& path, const FrameCloud& frame) {
  const auto format = format_from_extension(path);
  if (format == FrameFormat::Bin) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    std::vector<unsigned char> buf(frame.points.size() * 12);
    for (std::size_t i = 0; i < frame.points.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        float v = static_cast<float>(frame.points[i][k]);
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
        std::memcpy(&buf[i * 12 + k * 4], &bits, 4);
      }
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(9);
  if (format == FrameFormat::Ply) {
    out << "ply\nformat ascii 1.0\nelement vertex " << frame.points.size()
        << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  }
  for (const auto& p : frame.points) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
}

FrameCloud crop_to_bbox(const FrameCloud& frame, const BoundingBox& box) {
  FrameCloud out;
  out.frame_index = frame.frame_index;
  out.timestamp = frame.timestamp;
  out.dropped_nonfinite = frame.dropped_nonfinite;
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const Point3 half = 0.5 * box.size;
  for (const auto& p : frame.points) {
    const Point3 d = p - box.center;
    // inverse yaw rotation in the lateral/depth plane
    const double lat = c * d[0] + s * d[2];
    const double dep = -s * d[0] + c * d[2];
    if (std::abs(lat) <= half[0] && std::abs(d[1]) <= half[1] && std::abs(dep) <= half[2])
      out.points.push_back(p);
  }
  return out;
}

}  // namespace spectrahar
