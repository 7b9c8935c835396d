#include "spectrahar/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "spectrahar/errors.hpp"
#include "spectrahar/parallel.hpp"
#include "spectrahar/random_forest.hpp"

namespace spectrahar {

using nlohmann::json;

void SynthSpec::validate() const {
  if (n_subjects < 1 || n_activities < 1 || frames_per_sequence < 1 || points_per_frame < 1)
    throw UsageError("synth counts must be >= 1");
  if (!(noise_std_m >= 0.0)) throw UsageError("noise_std_m must be >= 0");
  if (!(subject_variation >= 0.0 && subject_variation <= 1.0)) throw UsageError("subject_variation must lie in [0, 1]");
  if (mirrored_pairs < 0 || 2 * mirrored_pairs > n_activities)
    throw UsageError("mirrored_pairs must be between 0 and n_activities / 2");
  if (environments < 1 || environments > n_subjects) throw UsageError("environments must be between 1 and n_subjects");
  if (!(frame_rate_hz > 0.0)) throw UsageError("frame_rate_hz must be positive");
}

json to_json(const SynthSpec& s) {
  return {{"n_subjects", s.n_subjects},
          {"n_activities", s.n_activities},
          {"frames_per_sequence", s.frames_per_sequence},
          {"points_per_frame", s.points_per_frame},
          {"noise_std_m", s.noise_std_m},
          {"subject_variation", s.subject_variation},
          {"seed", s.seed},
          {"mirrored_pairs", s.mirrored_pairs},
          {"environments", s.environments},
          {"frame_rate_hz", s.frame_rate_hz}};
}

SynthSpec synth_spec_from_json(const json& j, SynthSpec s) {
  if (!j.is_object()) throw UsageError("synth spec must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_subjects") s.n_subjects = v.get<int>();
      else if (key == "n_activities") s.n_activities = v.get<int>();
      else if (key == "frames_per_sequence") s.frames_per_sequence = v.get<int>();
      else if (key == "points_per_frame") s.points_per_frame = v.get<int>();
      else if (key == "noise_std_m") s.noise_std_m = v.get<double>();
      else if (key == "subject_variation") s.subject_variation = v.get<double>();
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "mirrored_pairs") s.mirrored_pairs = v.get<int>();
      else if (key == "environments") s.environments = v.get<int>();
      else if (key == "frame_rate_hz") s.frame_rate_hz = v.get<double>();
      else throw UsageError("unknown synth key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

enum Limb { LeftArm, RightArm, LeftLeg, RightLeg };
constexpr std::array<double, 4> kLimbSide = {-1.0, 1.0, -1.0, 1.0};  // lateral sign

// Joint angle a(t) = base + amp * sin(omega t + phase), in degrees.
struct Oscillator {
  double base = 0.0, amp = 0.0, phase = 0.0;
  double at(double wt) const { return (base + amp * std::sin(wt + phase)) * kDeg; }
};

struct LimbMotion {
  Oscillator abduction;  // away from the body in the lateral/vertical plane
  Oscillator flexion;    // forward in the vertical/depth plane
};

struct Template {
  std::string name;
  std::array<LimbMotion, 4> limbs;
  double period_s = 2.0;
  Oscillator lean;  // lateral trunk shift, in cm
  Oscillator bob;   // vertical trunk shift, in cm
};

constexpr double kRestArm = 8.0;

Template rest_template(const std::string& name, double period) {
  Template t;
  t.name = name;
  t.period_s = period;
  t.limbs[LeftArm].abduction.base = kRestArm;
  t.limbs[RightArm].abduction.base = kRestArm;
  return t;
}

// Left/right swap with the lateral shift negated.
Template mirrored(const Template& t, const std::string& name) {
  Template m = t;
  m.name = name;
  std::swap(m.limbs[LeftArm], m.limbs[RightArm]);
  std::swap(m.limbs[LeftLeg], m.limbs[RightLeg]);
  m.lean.base = -t.lean.base;
  m.lean.amp = -t.lean.amp;
  return m;
}

Template raise_arm_left() {
  Template t = rest_template("raise_arm_left", 2.4);
  t.limbs[LeftArm].abduction = {80.0, 72.0, -kPi / 2};
  return t;
}

Template side_lift_left() {
  Template t = rest_template("side_lift_left", 2.0);
  t.limbs[LeftLeg].abduction = {22.0, 22.0, -kPi / 2};
  t.lean = {4.0, 4.0, -kPi / 2};
  return t;
}

Template procedural(const std::string& name, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Template t = rest_template(name, 1.5 + 1.5 * u(rng));
  for (int l = 0; l < 4; ++l) {
    const bool arm = l < 2;
    auto& m = t.limbs[l];
    m.abduction = {(arm ? kRestArm : 0.0) + (arm ? 50.0 : 15.0) * u(rng), (arm ? 50.0 : 15.0) * u(rng),
                   2 * kPi * u(rng)};
    m.flexion = {(arm ? 60.0 : 30.0) * u(rng) - 10.0, (arm ? 45.0 : 30.0) * u(rng), 2 * kPi * u(rng)};
  }
  t.bob = {0.0, 6.0 * u(rng), 2 * kPi * u(rng)};
  return t;
}

std::vector<Template> templates(const SynthSpec& spec) {
  std::vector<Template> out;
  for (int p = 0; p < spec.mirrored_pairs; ++p) {
    Template left;
    if (p == 0) left = raise_arm_left();
    else if (p == 1) left = side_lift_left();
    else left = procedural("pair" + std::to_string(p) + "_left", derive_seed(spec.seed ^ 0x6d697272ULL, p));
    std::string base = left.name.substr(0, left.name.size() - 5);
    out.push_back(left);
    out.push_back(mirrored(left, base + "_right"));
  }
  std::vector<Template> fixed;
  {
    Template t = rest_template("arms_forward", 2.5);
    t.limbs[LeftArm].flexion = {45.0, 45.0, -kPi / 2};
    t.limbs[RightArm].flexion = {45.0, 45.0, -kPi / 2};
    fixed.push_back(t);
  }
  {
    Template t = rest_template("squat", 3.0);
    t.bob = {-12.0, 12.0, kPi / 2};
    t.limbs[LeftLeg].flexion = {35.0, 35.0, -kPi / 2};
    t.limbs[RightLeg].flexion = {35.0, 35.0, -kPi / 2};
    t.limbs[LeftLeg].abduction = {10.0, 10.0, -kPi / 2};
    t.limbs[RightLeg].abduction = {10.0, 10.0, -kPi / 2};
    fixed.push_back(t);
  }
  {
    Template t = rest_template("march", 1.6);
    t.limbs[LeftLeg].flexion = {20.0, 20.0, 0.0};
    t.limbs[RightLeg].flexion = {20.0, 20.0, kPi};
    t.limbs[LeftArm].flexion = {0.0, 25.0, kPi};
    t.limbs[RightArm].flexion = {0.0, 25.0, 0.0};
    t.bob = {0.0, 2.0, 0.0};
    fixed.push_back(t);
  }
  {
    Template t = rest_template("jumping_jack", 1.4);
    t.limbs[LeftArm].abduction = {85.0, 75.0, -kPi / 2};
    t.limbs[RightArm].abduction = {85.0, 75.0, -kPi / 2};
    t.limbs[LeftLeg].abduction = {12.0, 12.0, -kPi / 2};
    t.limbs[RightLeg].abduction = {12.0, 12.0, -kPi / 2};
    t.bob = {0.0, 5.0, 0.0};
    fixed.push_back(t);
  }
  for (std::size_t i = 0; out.size() < static_cast<std::size_t>(spec.n_activities); ++i) {
    if (i < fixed.size()) {
      out.push_back(fixed[i]);
    } else {
      char name[32];
      std::snprintf(name, sizeof name, "motion%02zu", out.size());
      out.push_back(procedural(name, derive_seed(spec.seed ^ 0x70726f63ULL, out.size())));
    }
  }
  return out;
}

// Per-subject body and timing, symmetric between left and right.
struct SubjectShape {
  double body_scale = 1.0;
  double arm_scale = 1.0;
  double leg_scale = 1.0;
  double amplitude_scale = 1.0;
  double period_scale = 1.0;
  double phase = 0.0;
};

SubjectShape subject_shape(const SynthSpec& spec, int subject) {
  std::mt19937_64 rng(derive_seed(spec.seed ^ 0x7375626aULL, static_cast<std::uint64_t>(subject)));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double v = spec.subject_variation;
  SubjectShape s;
  s.body_scale = 1.0 + 0.15 * v * u(rng);
  s.arm_scale = 1.0 + 0.25 * v * u(rng);
  s.leg_scale = 1.0 + 0.25 * v * u(rng);
  s.amplitude_scale = 1.0 + 0.4 * v * u(rng);
  s.period_scale = 1.0 + 0.3 * v * u(rng);
  s.phase = kPi * v * u(rng);
  return s;
}

struct Capsule {
  Point3 a, b;
  double radius;
};

struct Ellipsoid {
  Point3 center, semi_axes;
};

double ellipsoid_area(const Point3& s) {
  // Knud Thomsen's approximation.
  const double p = 1.6075;
  const double ab = std::pow(s[0] * s[1], p), ac = std::pow(s[0] * s[2], p), bc = std::pow(s[1] * s[2], p);
  return 4.0 * kPi * std::pow((ab + ac + bc) / 3.0, 1.0 / p);
}

Point3 unit_sphere(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  while (true) {
    Point3 p(n(rng), n(rng), n(rng));
    const double len = p.norm();
    if (len > 1e-12) return p / len;
  }
}

Point3 sample_capsule(const Capsule& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Point3 axis = c.b - c.a;
  const double len = axis.norm();
  const Point3 d = axis / len;
  const double side = 2.0 * kPi * c.radius * len;
  const double caps = 4.0 * kPi * c.radius * c.radius;
  if (u(rng) * (side + caps) < side) {
    // Orthonormal frame around the axis.
    const Point3 helper = std::abs(d[0]) < 0.9 ? Point3::UnitX() : Point3::UnitY();
    const Point3 e1 = d.cross(helper).normalized();
    const Point3 e2 = d.cross(e1);
    const double t = u(rng) * len, theta = 2.0 * kPi * u(rng);
    return c.a + t * d + c.radius * (std::cos(theta) * e1 + std::sin(theta) * e2);
  }
  const Point3 s = unit_sphere(rng);
  return (s.dot(d) < 0.0 ? c.a : c.b) + c.radius * s;
}

Point3 limb_direction(double side, double abduction, double flexion) {
  return Point3(side * std::sin(abduction) * std::cos(flexion), -std::cos(abduction) * std::cos(flexion),
                std::sin(flexion));
}

}  // namespace

std::vector<std::string> synth_activity_names(const SynthSpec& spec) {
  spec.validate();
  std::vector<std::string> names;
  for (const auto& t : templates(spec)) names.push_back(t.name);
  return names;
}

namespace {

FrameCloud make_frame(const SynthSpec& spec, const Template& act, const SubjectShape& shape, int subject,
                      int activity, int frame) {
  const double t = static_cast<double>(frame) / spec.frame_rate_hz;
  const double wt = 2.0 * kPi * t / (act.period_s * shape.period_scale) + shape.phase;
  const double amp = shape.amplitude_scale;
  auto angle = [&](const Oscillator& o) {
    Oscillator scaled = o;
    scaled.amp *= amp;
    return scaled.at(wt);
  };

  const double k = shape.body_scale;
  const Point3 shift(0.01 * (act.lean.base + amp * act.lean.amp * std::sin(wt + act.lean.phase)),
                     0.01 * (act.bob.base + amp * act.bob.amp * std::sin(wt + act.bob.phase)), 0.0);
  const Ellipsoid trunk{Point3(0.0, 1.35 * k, 0.0) + shift, Point3(0.2, 0.42, 0.12) * k};
  std::array<Capsule, 4> limbs;
  for (int l = 0; l < 4; ++l) {
    const bool arm = l < 2;
    const double side = kLimbSide[l];
    const Point3 joint = (arm ? Point3(side * 0.22, 1.55, 0.0) : Point3(side * 0.1, 0.95, 0.0)) * k + shift;
    const double length = arm ? 0.65 * k * shape.arm_scale : 0.9 * k * shape.leg_scale;
    const Point3 dir =
        limb_direction(side, angle(act.limbs[l].abduction), angle(act.limbs[l].flexion));
    limbs[l] = {joint, joint + length * dir, arm ? 0.045 * k : 0.07 * k};
  }

  // Points per segment by surface area, largest remainder first.
  std::array<double, 5> area;
  area[0] = ellipsoid_area(trunk.semi_axes);
  for (int l = 0; l < 4; ++l) {
    const double len = (limbs[l].b - limbs[l].a).norm(), r = limbs[l].radius;
    area[l + 1] = 2.0 * kPi * r * len + 4.0 * kPi * r * r;
  }
  double total = 0.0;
  for (double a : area) total += a;
  std::array<int, 5> count{};
  std::array<std::pair<double, int>, 5> remainder;
  int assigned = 0;
  for (int s = 0; s < 5; ++s) {
    const double exact = spec.points_per_frame * area[s] / total;
    count[s] = static_cast<int>(std::floor(exact));
    assigned += count[s];
    remainder[s] = {exact - count[s], s};
  }
  std::sort(remainder.begin(), remainder.end(), [](auto a, auto b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  for (int i = 0; assigned < spec.points_per_frame; ++i, ++assigned) ++count[remainder[i % 5].second];

  // Surface draws depend on (seed, frame) only, so they carry no label
  // information; the noise stream is per subject, activity and frame.
  std::mt19937_64 surface(derive_seed(spec.seed, static_cast<std::uint64_t>(frame)));
  std::mt19937_64 noise_rng(derive_seed(
      derive_seed(derive_seed(spec.seed ^ 0x6e6f6973ULL, static_cast<std::uint64_t>(subject)),
                  static_cast<std::uint64_t>(activity)),
      static_cast<std::uint64_t>(frame)));
  std::normal_distribution<double> noise(0.0, 1.0);

  FrameCloud cloud;
  cloud.frame_index = static_cast<std::size_t>(frame);
  cloud.timestamp = t;
  cloud.points.reserve(static_cast<std::size_t>(spec.points_per_frame));
  for (int i = 0; i < count[0]; ++i)
    cloud.points.push_back(trunk.center + unit_sphere(surface).cwiseProduct(trunk.semi_axes));
  for (int l = 0; l < 4; ++l)
    for (int i = 0; i < count[l + 1]; ++i) cloud.points.push_back(sample_capsule(limbs[l], surface));
  if (spec.noise_std_m > 0.0)
    for (auto& p : cloud.points)
      for (int d = 0; d < 3; ++d) p[d] += spec.noise_std_m * noise(noise_rng);
  return cloud;
}

std::string subject_name(const SynthSpec& spec, int s) {
  char buf[16];
  std::snprintf(buf, sizeof buf, spec.n_subjects > 99 ? "s%03d" : "s%02d", s + 1);
  return buf;
}

}  // namespace

FrameCloud synth_frame(const SynthSpec& spec, int subject, int activity, int frame) {
  spec.validate();
  const auto acts = templates(spec);
  if (subject < 0 || subject >= spec.n_subjects || activity < 0 || activity >= spec.n_activities || frame < 0)
    throw UsageError("synth frame index out of range");
  return make_frame(spec, acts[static_cast<std::size_t>(activity)], subject_shape(spec, subject), subject, activity,
                    frame);
}

Manifest generate(const SynthSpec& spec, const std::filesystem::path& out_dir_arg, unsigned threads) {
  spec.validate();
  const auto out_dir = std::filesystem::absolute(out_dir_arg);
  const auto acts = templates(spec);
  std::vector<SequenceRecord> records;
  for (int s = 0; s < spec.n_subjects; ++s) {
    for (int a = 0; a < spec.n_activities; ++a) {
      SequenceRecord r;
      r.subject_id = subject_name(spec, s);
      r.activity_id = acts[static_cast<std::size_t>(a)].name;
      r.sequence_id = r.subject_id + "_" + r.activity_id;
      r.environment_id = "E" + std::to_string(1 + s * spec.environments / spec.n_subjects);
      r.frame_rate_hz = spec.frame_rate_hz;
      for (int f = 0; f < spec.frames_per_sequence; ++f) {
        char name[32];
        std::snprintf(name, sizeof name, "%06d.bin", f);
        r.frame_paths.push_back(out_dir / "frames" / r.sequence_id / name);
      }
      records.push_back(std::move(r));
    }
  }
  try {
    std::filesystem::create_directories(out_dir);
  } catch (const std::filesystem::filesystem_error& e) {
    throw DataError(std::string("cannot create output directory: ") + e.what());
  }
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const int s = static_cast<int>(i) / spec.n_activities;
    const int a = static_cast<int>(i) % spec.n_activities;
    const auto shape = subject_shape(spec, s);
    std::filesystem::create_directories(out_dir / "frames" / records[i].sequence_id);
    for (int f = 0; f < spec.frames_per_sequence; ++f)
      write_frame(records[i].frame_paths[static_cast<std::size_t>(f)],
                  make_frame(spec, acts[static_cast<std::size_t>(a)], shape, s, a, f));
  });
  write_manifest(out_dir / "manifest.jsonl", records);
  return load_manifest(out_dir / "manifest.jsonl");
}

}  // namespace spectrahar
