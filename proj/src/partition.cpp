#include "spectrahar/partition.hpp"

#include <algorithm>

#include "spectrahar/errors.hpp"

namespace spectrahar {

double lower_median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty set");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

int quadrant_of(const Point3& p, double lateral_median, double vertical_median) {
  const bool right = p[0] >= lateral_median;
  const bool upper = p[1] >= vertical_median;
  return 1 + (right ? 1 : 0) + (upper ? 2 : 0);
}

PartSet partition(const FrameCloud& frame) {
  if (frame.empty()) throw DataError("cannot partition an empty frame");
  std::vector<double> lat, vert;
  lat.reserve(frame.size());
  vert.reserve(frame.size());
  for (const auto& p : frame.points) {
    lat.push_back(p[0]);
    vert.push_back(p[1]);
  }
  PartSet set;
  set.lateral_median = lower_median(std::move(lat));
  set.vertical_median = lower_median(std::move(vert));
  for (auto& part : set.parts) {
    part.frame_index = frame.frame_index;
    part.timestamp = frame.timestamp;
  }
  set.parts[kWholeBody].points = frame.points;
  for (const auto& p : frame.points) {
    set.parts[quadrant_of(p, set.lateral_median, set.vertical_median)].points.push_back(p);
    if (p[1] < set.vertical_median) set.parts[kLowerBody].points.push_back(p);
  }
  return set;
}

}  // namespace spectrahar
