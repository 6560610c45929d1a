#pragma once

#include <algorithm>

#include "hdrtv/frame.hpp"
#include "hdrtv/parallel.hpp"

namespace hdrtv {

inline constexpr double kDefaultSegmentThreshold = 0.05;

// Dark and bright ranges of an SDR image, each stretched linearly onto
// [0,1]. Produced once from the source image; feeding `low` or `high` back
// into segment() has no defined meaning.
struct SegMaskPair {
  PixelFrame low;
  PixelFrame high;
  double threshold = kDefaultSegmentThreshold;
};

inline double segment_low(double x, double t) { return std::max(0.0, (t - x) / t); }
inline double segment_high(double x, double t) { return std::max(0.0, (x - 1.0) / t + 1.0); }

// Applied per RGB channel. Throws DomainError unless 0 < t < 0.5 and all
// samples lie in [0,1].
SegMaskPair segment(const PixelFrame& sdr, double t = kDefaultSegmentThreshold,
                    Exec exec = Exec::parallel);

}  // namespace hdrtv
