#pragma once

#include <array>

#include "spectrahar/ingest.hpp"

namespace spectrahar {

inline constexpr int kPartCount = 6;
inline constexpr int kWholeBody = 0;
inline constexpr int kLowerBody = 5;

/// Part 0: all points. Parts 1-4: quadrants from lower-median splits of the
/// lateral (component 0) and vertical (component 1) coordinates; a point
/// equal to a median goes to the upper/right side.
///   1: lat < m_lat, vert < m_vert     2: lat >= m_lat, vert < m_vert
///   3: lat < m_lat, vert >= m_vert    4: lat >= m_lat, vert >= m_vert
/// Part 5: lower body, vert < m_vert.
struct PartSet {
  std::array<FrameCloud, kPartCount> parts;
  double lateral_median = 0.0;
  double vertical_median = 0.0;
};

/// Element at index floor((n-1)/2) of the sorted values.
double lower_median(std::vector<double> values);

/// Throws DataError for an empty frame.
PartSet partition(const FrameCloud& frame);

/// Quadrant id (1-4) of a point given the split medians.
int quadrant_of(const Point3& p, double lateral_median, double vertical_median);

}  // namespace spectrahar
