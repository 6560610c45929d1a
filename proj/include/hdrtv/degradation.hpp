#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "hdrtv/color.hpp"
#include "hdrtv/frame.hpp"
#include "hdrtv/lut3d.hpp"
#include "hdrtv/parallel.hpp"

namespace hdrtv {

enum class DmKind { hc_gm, tm2446c_gm, lut3d, reinhard_gm };

// CLI spellings: hc_gm, 2446c_gm, lut, reinhard_gm.
std::string_view to_string(DmKind kind);
std::optional<DmKind> parse_dm_kind(std::string_view name);

inline constexpr int kDmJpegQuality = 80;

struct DegradationSpec {
  DmKind kind = DmKind::hc_gm;
  int jpeg_qf = kDmJpegQuality;
  std::shared_ptr<const Lut3D> lut;
  std::uint64_t seed = 0;

  void validate() const;
};

// BT.2446 Method C global luminance curve, 1000 nit -> 100 nit, in nits.
struct ToneCurve2446C {
  double k1 = 0.83802;
  double k2 = 15.09968;
  double k3 = 0.74204;
  double k4 = 78.99439;
  double y_ip = 58.5 / 0.83802;  // knee, HDR side
  double out_clip = 100.0;

  // Curve without the output clamp.
  double unclipped(double nits) const;
  // Output clamped to [0, out_clip].
  double operator()(double nits) const;
};

double tm_2446c(double nits);

// ----- per-pixel stages (linear, normalized to the container peak) ---------

// Luminance hard clip: 10 * clamp(E, 0, 0.1) per channel.
inline Rgb hard_clip_luminance(const Rgb& e) {
  return {10.0 * std::clamp(e[0], 0.0, 0.1), 10.0 * std::clamp(e[1], 0.0, 0.1),
          10.0 * std::clamp(e[2], 0.0, 0.1)};
}

// Per-channel clamp of linear BT.709 to [0,1].
inline Rgb gamut_clip(const Rgb& linear709) {
  return {std::clamp(linear709[0], 0.0, 1.0), std::clamp(linear709[1], 0.0, 1.0),
          std::clamp(linear709[2], 0.0, 1.0)};
}

// BT.2020 -> BT.709 primaries followed by gamut_clip.
inline Rgb gamut_map_hard(const Rgb& linear2020) { return gamut_clip(kBt2020ToBt709 * linear2020); }

// Linear BT.709 SDR light in [0,1] for one PQ-encoded HDR pixel.
Rgb hc_gm_linear(const Rgb& pq_code);
Rgb tm2446c_gm_linear(const Rgb& pq_code, const ToneCurve2446C& curve = {});
Rgb reinhard_gm_linear(const Rgb& pq_code);

PixelFrame gamut_clip(const PixelFrame& linear709, Exec exec = Exec::parallel);
PixelFrame gamut_map_hard(const PixelFrame& linear2020, Exec exec = Exec::parallel);

// ----- frame-level models ---------------------------------------------------

// Gamma-encoded SDR before any quantization.
PixelFrame degrade_encoded(const PixelFrame& hdr, const DegradationSpec& spec,
                           Exec exec = Exec::parallel);

struct DegradedImage {
  PixelFrame frame;                // decoded JPEG, what a consumer would see
  std::vector<std::uint8_t> jpeg;  // stored artifact
  std::size_t lut_clamped_pixels = 0;
};

// Full model: encoded SDR, 8-bit quantization, JPEG at spec.jpeg_qf.
DegradedImage degrade(const PixelFrame& hdr, const DegradationSpec& spec,
                      Exec exec = Exec::parallel);

PixelFrame dm_hc_gm(const PixelFrame& hdr, int qf = kDmJpegQuality, Exec exec = Exec::parallel);
PixelFrame dm_2446c_gm(const PixelFrame& hdr, int qf = kDmJpegQuality, Exec exec = Exec::parallel);
PixelFrame dm_reinhard(const PixelFrame& hdr, int qf = kDmJpegQuality, Exec exec = Exec::parallel);

// 8-bit quantize, JPEG encode at qf, decode.
PixelFrame jpeg_roundtrip(const PixelFrame& sdr, int qf);

}  // namespace hdrtv
