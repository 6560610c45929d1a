#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "hdrtv/frame.hpp"
#include "hdrtv/parallel.hpp"

namespace hdrtv {

// ---------------------------------------------------------------------------
// Transfer functions
// ---------------------------------------------------------------------------

// SMPTE ST 2084 constants, exact rationals.
namespace pq {
inline constexpr double m1 = 2610.0 / 16384.0;
inline constexpr double m2 = 2523.0 / 4096.0 * 128.0;
inline constexpr double c1 = 3424.0 / 4096.0;
inline constexpr double c2 = 2413.0 / 4096.0 * 32.0;
inline constexpr double c3 = 2392.0 / 4096.0 * 32.0;
inline constexpr double max_nits = 10000.0;

// Unchecked kernels; callers guarantee the domain.
inline double to_nits(double code) {
  const double p = std::pow(code, 1.0 / m2);
  const double num = std::max(p - c1, 0.0);
  return max_nits * std::pow(num / (c2 - c3 * p), 1.0 / m1);
}

inline double from_nits(double nits) {
  const double y = std::pow(nits / max_nits, m1);
  return std::pow((c1 + c2 * y) / (1.0 + c3 * y), m2);
}
}  // namespace pq

inline constexpr double kSdrGamma = 2.22;

// PQ code value in [0,1] to absolute luminance in nits.
double pq_eotf(double code);
// Absolute luminance in [0, 10000] nits to PQ code value.
double pq_inverse_eotf(double nits);
// Pure 2.22 power law; both directions are defined on [0,1].
double sdr_oetf(double linear);
double sdr_eotf(double encoded);

// ---------------------------------------------------------------------------
// Chromaticity and matrices
// ---------------------------------------------------------------------------

struct ChromaticityPoint {
  double x = 0.0;
  double y = 0.0;
};

struct GamutTriangle {
  ChromaticityPoint red, green, blue, white;
};

inline constexpr ChromaticityPoint kD65{0.3127, 0.3290};
inline constexpr GamutTriangle kBt709Gamut{{0.640, 0.330}, {0.300, 0.600}, {0.150, 0.060}, kD65};
inline constexpr GamutTriangle kBt2020Gamut{{0.708, 0.292}, {0.170, 0.797}, {0.131, 0.046}, kD65};

const GamutTriangle& gamut_of(Primaries p);

// Closed triangle test; points within 1e-12 of an edge count as inside.
bool contains(const GamutTriangle& gamut, ChromaticityPoint p);

struct Mat3 {
  std::array<double, 9> m{};

  double operator()(int r, int c) const { return m[r * 3 + c]; }
  Rgb operator*(const Rgb& v) const {
    return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
            m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
            m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
  }
  Mat3 operator*(const Mat3& o) const;
  Mat3 inverse() const;
  double determinant() const;
};

// Standard primaries + white point construction of the RGB->XYZ matrix.
Mat3 rgb_to_xyz_matrix(const GamutTriangle& gamut);
const Mat3& rgb_to_xyz_matrix(Primaries p);
const Mat3& xyz_to_rgb_matrix(Primaries p);

// BT.2020 -> BT.709 primaries conversion used by the gamut-mapping stage.
// Magnitudes as published for this conversion; signs follow the standard
// matrix so that every row sums to one.
inline constexpr Mat3 kBt2020ToBt709{{1.6605, -0.5876, -0.0728,   //
                                      -0.1246, 1.1329, -0.0083,   //
                                      -0.0182, -0.1006, 1.1187}};

inline constexpr std::array<double, 3> kBt2020LumaCoeffs{0.2627, 0.6780, 0.0593};
inline constexpr std::array<double, 3> kBt709LumaCoeffs{0.2126, 0.7152, 0.0722};

inline const std::array<double, 3>& luma_coeffs(Primaries p) {
  return p == Primaries::bt2020 ? kBt2020LumaCoeffs : kBt709LumaCoeffs;
}

inline double weighted_sum(const std::array<double, 3>& w, const Rgb& v) {
  return w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
}

using Xyz = Rgb;

// All-zero input yields D65 so downstream counting stays total.
ChromaticityPoint xyz_to_xy(const Xyz& xyz);
Xyz xy_to_xyz(ChromaticityPoint xy, double luminance);

// ---------------------------------------------------------------------------
// Opponent colour
// ---------------------------------------------------------------------------

struct Ictcp {
  double i = 0.0, ct = 0.0, cp = 0.0;
};

// `linear` is BT.2020 RGB normalized so 1.0 == `peak_nits`.
Ictcp rgb_to_ictcp(const Rgb& linear, double peak_nits);

struct YCbCr {
  double y = 0.0, cb = 0.0, cr = 0.0;
};

// Full-range BT.709 luma/chroma from gamma-encoded RGB.
inline YCbCr rgb_to_ycbcr709(const Rgb& encoded) {
  const double y = weighted_sum(kBt709LumaCoeffs, encoded);
  return {y, (encoded[2] - y) / (2.0 * (1.0 - kBt709LumaCoeffs[2])),
          (encoded[0] - y) / (2.0 * (1.0 - kBt709LumaCoeffs[0]))};
}

// ---------------------------------------------------------------------------
// Frame operations
// ---------------------------------------------------------------------------

// PQ or gamma frame to linear light normalized to the container peak.
PixelFrame linearize(const PixelFrame& frame, Exec exec = Exec::parallel);
// Linear frame to the given container (PQ needs BT.2020, gamma needs BT.709).
// Values are clamped into the container's domain.
PixelFrame encode(const PixelFrame& linear, Transfer transfer, Exec exec = Exec::parallel);

PixelFrame cst_2020_to_709(const PixelFrame& linear2020, Exec exec = Exec::parallel);

// Normalized linear luminance (1.0 == nominal peak).
std::vector<double> luminance(const PixelFrame& linear, Exec exec = Exec::parallel);

std::vector<Xyz> rgb_to_xyz(const PixelFrame& linear, Exec exec = Exec::parallel);

struct IctcpPlanes {
  std::vector<double> i, ct, cp;
};
IctcpPlanes rgb_to_ictcp(const PixelFrame& linear2020, Exec exec = Exec::parallel);

struct YCbCrPlanes {
  std::vector<double> y, cb, cr;
};
YCbCrPlanes rgb_to_ycbcr709(const PixelFrame& encoded709, Exec exec = Exec::parallel);

}  // namespace hdrtv
