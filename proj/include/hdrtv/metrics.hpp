#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "hdrtv/frame.hpp"
#include "hdrtv/parallel.hpp"

namespace hdrtv::metrics {

// Luminance (normalized to a 1000 nit peak) above which an HDR pixel is a
// highlight: 100 nit, the SDR container peak.
inline constexpr double kHighlightThreshold = 0.1;
// Encoded SDR luma at or above this value quantizes to code 255.
inline constexpr double kOverExposedLuma = 1.0 - 1.0 / 512.0;

// All values are percentages. HDR frames fill the first nine slots; SDR
// frames fill si, cf, asl, all and foep.
struct MetricVector {
  std::optional<double> fhlp, ehl, fwgp, ewg, si, cf, stdl, asl, all, foep;

  static constexpr std::array<std::string_view, 10> kNames{
      "fhlp", "ehl", "fwgp", "ewg", "si", "cf", "stdl", "asl", "all", "foep"};

  // Slots in the frozen column order above.
  std::array<std::optional<double>, 10> slots() const {
    return {fhlp, ehl, fwgp, ewg, si, cf, stdl, asl, all, foep};
  }
  static MetricVector from_slots(const std::array<std::optional<double>, 10>& s);
};

// Per-slot mean over the frames that define the slot.
MetricVector frame_average(std::span<const MetricVector> rows);

// Individual metrics. HDR-only metrics require a PQ frame, foep an SDR
// frame; the rest accept either container.
double fhlp(const PixelFrame& hdr, Exec exec = Exec::parallel);
double ehl(const PixelFrame& hdr, Exec exec = Exec::parallel);
double fwgp(const PixelFrame& hdr, Exec exec = Exec::parallel);
double ewg(const PixelFrame& hdr, Exec exec = Exec::parallel);
double si(const PixelFrame& frame, Exec exec = Exec::parallel);
double cf(const PixelFrame& frame, Exec exec = Exec::parallel);
double stdl(const PixelFrame& hdr, Exec exec = Exec::parallel);
double asl(const PixelFrame& frame, Exec exec = Exec::parallel);
double all(const PixelFrame& frame, Exec exec = Exec::parallel);
double foep(const PixelFrame& sdr, Exec exec = Exec::parallel);

// Per-pixel ASL contribution: 100 * sqrt(2) * |[c1, c2]|.
double saturation_level(double c1, double c2);

// Every metric defined for the frame's container, in one fused pass.
MetricVector evaluate(const PixelFrame& frame, Exec exec = Exec::parallel);

// PSNR over PQ-encoded RGB with peak 1.0; +inf for identical frames.
double psnr(const PixelFrame& pred, const PixelFrame& gt, Exec exec = Exec::parallel);
// Mean per-pixel Delta E ITP (720 * |[dI, dCt/2, dCp]|).
double delta_e_itp(const PixelFrame& pred, const PixelFrame& gt, Exec exec = Exec::parallel);

// 100 * pred / gt; nullopt when gt is zero.
std::optional<double> recovery_rate(double pred, double gt);
// 100 * (pred - gt) / gt; nullopt when gt is zero.
std::optional<double> shift_rate(double pred, double gt);

struct ComparisonReport {
  MetricVector pred, gt;
  std::optional<double> fhlp_recovery, ehl_recovery, fwgp_recovery, ewg_recovery;
  std::optional<double> asl_shift, all_shift;
  double psnr_db = 0.0;
  double delta_e_itp = 0.0;
};

ComparisonReport compare(const PixelFrame& pred, const PixelFrame& gt,
                         Exec exec = Exec::parallel);

// Naive single-threaded implementations: one straightforward loop per
// metric, pixel-order accumulation. Kept as the baseline the fused kernels
// are tested and benchmarked against.
namespace reference {
double fhlp(const PixelFrame& hdr);
double ehl(const PixelFrame& hdr);
double fwgp(const PixelFrame& hdr);
double ewg(const PixelFrame& hdr);
double si(const PixelFrame& frame);
double cf(const PixelFrame& frame);
double stdl(const PixelFrame& hdr);
double asl(const PixelFrame& frame);
double all(const PixelFrame& frame);
double foep(const PixelFrame& sdr);
MetricVector evaluate(const PixelFrame& frame);
double psnr(const PixelFrame& pred, const PixelFrame& gt);
double delta_e_itp(const PixelFrame& pred, const PixelFrame& gt);
}  // namespace reference

}  // namespace hdrtv::metrics
