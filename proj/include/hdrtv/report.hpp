#pragma once

#include <span>
#include <string>
#include <vector>

#include "hdrtv/metrics.hpp"

namespace hdrtv {

struct MetricRow {
  std::string path;
  metrics::MetricVector values;
};

// Columns: path,fhlp,ehl,fwgp,ewg,si,cf,stdl,asl,all,foep. New metrics are
// appended. Undefined slots are empty cells. The last row is the
// per-column mean, with path "frame-average".
std::string metrics_csv(std::span<const MetricRow> rows);

// {"mode": ..., "frames": [{"path", "metrics": {...}}], "frame_average": {...}}
// Undefined slots are null.
std::string metrics_json(std::span<const MetricRow> rows, std::string_view mode);

// Recovery and shift rates are null when the ground-truth value is zero;
// an infinite PSNR is written as the string "inf".
std::string comparison_json(const metrics::ComparisonReport& report);

// Shortest text that parses back to the same double.
std::string format_number(double v);

}  // namespace hdrtv
