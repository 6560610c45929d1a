#include "hdrtv/color.hpp"

#include <algorithm>
#include <string>

#include "hdrtv/error.hpp"

namespace hdrtv {

namespace {

void require_unit(double v, const char* op) {
  if (!(v >= 0.0 && v <= 1.0))
    throw DomainError(std::string(op) + ": input " + std::to_string(v) + " outside [0,1]");
}

double cross(ChromaticityPoint o, ChromaticityPoint a, ChromaticityPoint b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// BT.2100 RGB -> LMS, in units of 1/4096.
constexpr Mat3 kLms{{1688.0 / 4096, 2146.0 / 4096, 262.0 / 4096,  //
                     683.0 / 4096, 2951.0 / 4096, 462.0 / 4096,   //
                     99.0 / 4096, 309.0 / 4096, 3688.0 / 4096}};

}  // namespace

double pq_eotf(double code) {
  require_unit(code, "pq_eotf");
  return pq::to_nits(code);
}

double pq_inverse_eotf(double nits) {
  if (!(nits >= 0.0 && nits <= pq::max_nits))
    throw DomainError("pq_inverse_eotf: luminance " + std::to_string(nits) +
                      " outside [0, 10000] nit");
  return pq::from_nits(nits);
}

double sdr_oetf(double linear) {
  require_unit(linear, "sdr_oetf");
  return std::pow(linear, 1.0 / kSdrGamma);
}

double sdr_eotf(double encoded) {
  require_unit(encoded, "sdr_eotf");
  return std::pow(encoded, kSdrGamma);
}

const GamutTriangle& gamut_of(Primaries p) {
  return p == Primaries::bt2020 ? kBt2020Gamut : kBt709Gamut;
}

bool contains(const GamutTriangle& g, ChromaticityPoint p) {
  constexpr double eps = 1e-12;
  const double d1 = cross(g.red, g.green, p);
  const double d2 = cross(g.green, g.blue, p);
  const double d3 = cross(g.blue, g.red, p);
  const bool has_neg = d1 < -eps || d2 < -eps || d3 < -eps;
  const bool has_pos = d1 > eps || d2 > eps || d3 > eps;
  return !(has_neg && has_pos);
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
      r.m[i * 3 + j] = s;
    }
  return r;
}

double Mat3::determinant() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Mat3 Mat3::inverse() const {
  const double det = determinant();
  if (std::abs(det) < 1e-15) throw DomainError("singular 3x3 matrix");
  const double inv = 1.0 / det;
  return Mat3{{(m[4] * m[8] - m[5] * m[7]) * inv, (m[2] * m[7] - m[1] * m[8]) * inv,
               (m[1] * m[5] - m[2] * m[4]) * inv, (m[5] * m[6] - m[3] * m[8]) * inv,
               (m[0] * m[8] - m[2] * m[6]) * inv, (m[2] * m[3] - m[0] * m[5]) * inv,
               (m[3] * m[7] - m[4] * m[6]) * inv, (m[1] * m[6] - m[0] * m[7]) * inv,
               (m[0] * m[4] - m[1] * m[3]) * inv}};
}

Mat3 rgb_to_xyz_matrix(const GamutTriangle& g) {
  auto column = [](ChromaticityPoint c) -> Rgb { return {c.x / c.y, 1.0, (1 - c.x - c.y) / c.y}; };
  const Rgb r = column(g.red), gr = column(g.green), b = column(g.blue), w = column(g.white);
  const Mat3 primaries{{r[0], gr[0], b[0], r[1], gr[1], b[1], r[2], gr[2], b[2]}};
  if (std::abs(primaries.determinant()) < 1e-12)
    throw DomainError("gamut primaries are collinear");
  const Rgb s = primaries.inverse() * w;
  Mat3 out = primaries;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) out.m[row * 3 + col] *= s[col];
  return out;
}

const Mat3& rgb_to_xyz_matrix(Primaries p) {
  static const Mat3 m2020 = rgb_to_xyz_matrix(kBt2020Gamut);
  static const Mat3 m709 = rgb_to_xyz_matrix(kBt709Gamut);
  return p == Primaries::bt2020 ? m2020 : m709;
}

const Mat3& xyz_to_rgb_matrix(Primaries p) {
  static const Mat3 m2020 = rgb_to_xyz_matrix(Primaries::bt2020).inverse();
  static const Mat3 m709 = rgb_to_xyz_matrix(Primaries::bt709).inverse();
  return p == Primaries::bt2020 ? m2020 : m709;
}

ChromaticityPoint xyz_to_xy(const Xyz& xyz) {
  const double sum = xyz[0] + xyz[1] + xyz[2];
  if (sum == 0.0) return kD65;
  return {xyz[0] / sum, xyz[1] / sum};
}

Xyz xy_to_xyz(ChromaticityPoint xy, double luminance) {
  if (luminance == 0.0) return {0.0, 0.0, 0.0};
  return {xy.x * luminance / xy.y, luminance, (1.0 - xy.x - xy.y) * luminance / xy.y};
}

Ictcp rgb_to_ictcp(const Rgb& linear, double peak_nits) {
  const double scale = peak_nits / pq::max_nits;
  const Rgb lms = kLms * Rgb{linear[0] * scale, linear[1] * scale, linear[2] * scale};
  Rgb e;
  for (int k = 0; k < 3; ++k) e[k] = pq::from_nits(std::clamp(lms[k], 0.0, 1.0) * pq::max_nits);
  return {0.5 * e[0] + 0.5 * e[1], (6610.0 * e[0] - 13613.0 * e[1] + 7003.0 * e[2]) / 4096.0,
          (17933.0 * e[0] - 17390.0 * e[1] - 543.0 * e[2]) / 4096.0};
}

PixelFrame linearize(const PixelFrame& frame, Exec exec) {
  const auto& enc = frame.encoding();
  if (enc.is_linear()) return frame;
  require_unit_range(frame, "linearize");
  PixelFrame out(frame.width(), frame.height(),
                 ColorEncoding::linear(enc.primaries, enc.nominal_peak));
  const bool is_pq = enc.is_hdr_pq();
  const double peak = enc.nominal_peak;
  for (int c = 0; c < 3; ++c) {
    auto src = frame.plane(c);
    auto dst = out.plane(c);
    for_each_index(src.size(), exec, [&](std::size_t i) {
      const double v = src[i];
      dst[i] = static_cast<float>(is_pq ? pq::to_nits(v) / peak : std::pow(v, kSdrGamma));
    });
  }
  return out;
}

PixelFrame encode(const PixelFrame& linear, Transfer transfer, Exec exec) {
  require_transfer(linear, Transfer::linear, "encode");
  ColorEncoding target;
  if (transfer == Transfer::pq) {
    if (linear.encoding().primaries != Primaries::bt2020)
      throw ContractError("encode: PQ output requires BT.2020 primaries");
    target = ColorEncoding::hdr_pq();
  } else if (transfer == Transfer::gamma_sdr) {
    if (linear.encoding().primaries != Primaries::bt709)
      throw ContractError("encode: gamma SDR output requires BT.709 primaries");
    target = ColorEncoding::sdr_gamma();
  } else {
    return linear;
  }
  PixelFrame out(linear.width(), linear.height(), target);
  const double peak = linear.encoding().nominal_peak;
  for (int c = 0; c < 3; ++c) {
    auto src = linear.plane(c);
    auto dst = out.plane(c);
    for_each_index(src.size(), exec, [&](std::size_t i) {
      const double v = src[i];
      dst[i] = static_cast<float>(
          transfer == Transfer::pq
              ? pq::from_nits(std::clamp(v * peak, 0.0, pq::max_nits))
              : std::pow(std::clamp(v * peak / target.nominal_peak, 0.0, 1.0), 1.0 / kSdrGamma));
    });
  }
  return out;
}

PixelFrame cst_2020_to_709(const PixelFrame& linear2020, Exec exec) {
  require_transfer(linear2020, Transfer::linear, "cst_2020_to_709");
  if (linear2020.encoding().primaries != Primaries::bt2020)
    throw ContractError("cst_2020_to_709: input primaries must be BT.2020");
  PixelFrame out(linear2020.width(), linear2020.height(),
                 ColorEncoding::linear(Primaries::bt709, linear2020.encoding().nominal_peak));
  for_each_index(linear2020.pixel_count(), exec, [&](std::size_t i) {
    out.set_pixel(i, kBt2020ToBt709 * linear2020.pixel(i));
  });
  return out;
}

std::vector<double> luminance(const PixelFrame& linear, Exec exec) {
  require_transfer(linear, Transfer::linear, "luminance");
  const auto& w = luma_coeffs(linear.encoding().primaries);
  std::vector<double> y(linear.pixel_count());
  for_each_index(y.size(), exec, [&](std::size_t i) { y[i] = weighted_sum(w, linear.pixel(i)); });
  return y;
}

std::vector<Xyz> rgb_to_xyz(const PixelFrame& linear, Exec exec) {
  require_transfer(linear, Transfer::linear, "rgb_to_xyz");
  const Mat3& m = rgb_to_xyz_matrix(linear.encoding().primaries);
  std::vector<Xyz> out(linear.pixel_count());
  for_each_index(out.size(), exec, [&](std::size_t i) { out[i] = m * linear.pixel(i); });
  return out;
}

IctcpPlanes rgb_to_ictcp(const PixelFrame& linear2020, Exec exec) {
  require_transfer(linear2020, Transfer::linear, "rgb_to_ictcp");
  if (linear2020.encoding().primaries != Primaries::bt2020)
    throw ContractError("rgb_to_ictcp: input primaries must be BT.2020");
  const std::size_t n = linear2020.pixel_count();
  IctcpPlanes out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  const double peak = linear2020.encoding().nominal_peak;
  for_each_index(n, exec, [&](std::size_t i) {
    const Ictcp v = rgb_to_ictcp(linear2020.pixel(i), peak);
    out.i[i] = v.i;
    out.ct[i] = v.ct;
    out.cp[i] = v.cp;
  });
  return out;
}

YCbCrPlanes rgb_to_ycbcr709(const PixelFrame& encoded709, Exec exec) {
  require_transfer(encoded709, Transfer::gamma_sdr, "rgb_to_ycbcr709");
  const std::size_t n = encoded709.pixel_count();
  YCbCrPlanes out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for_each_index(n, exec, [&](std::size_t i) {
    const YCbCr v = rgb_to_ycbcr709(encoded709.pixel(i));
    out.y[i] = v.y;
    out.cb[i] = v.cb;
    out.cr[i] = v.cr;
  });
  return out;
}

}  // namespace hdrtv
