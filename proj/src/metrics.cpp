#include "hdrtv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hdrtv/color.hpp"
#include "hdrtv/error.hpp"

namespace hdrtv::metrics {

namespace {

constexpr double kNominalHdrPeak = 1000.0;

void require_hdr(const PixelFrame& f, const char* op) {
  require_transfer(f, Transfer::pq, op);
  require_unit_range(f, op);
}

void require_encoded(const PixelFrame& f, const char* op) {
  if (f.encoding().is_linear())
    throw ContractError(std::string(op) + ": expected a PQ or gamma encoded frame");
  require_unit_range(f, op);
}

void require_sobel_size(const PixelFrame& f) {
  if (f.width() < 3 || f.height() < 3)
    throw DomainError("si: frame must be at least 3x3");
}

// Normalized linear BT.2020 light of a PQ pixel.
inline Rgb pq_linear(const Rgb& code) {
  return {pq::to_nits(code[0]) / kNominalHdrPeak, pq::to_nits(code[1]) / kNominalHdrPeak,
          pq::to_nits(code[2]) / kNominalHdrPeak};
}

inline double ehl_term(double y) { return std::abs(y - std::clamp(y, 0.0, kHighlightThreshold)); }

inline bool is_wide_gamut(const Rgb& linear) {
  const ChromaticityPoint xy = xyz_to_xy(rgb_to_xyz_matrix(Primaries::bt2020) * linear);
  return contains(kBt2020Gamut, xy) && !contains(kBt709Gamut, xy);
}

// |S - HC(S)| with both sides expressed through the BT.709 XYZ matrix, so the
// displacement is exactly zero wherever the clamp is the identity.
inline double ewg_term(const Rgb& linear) {
  const Rgb oog = kBt2020ToBt709 * linear;
  const Rgb diff{oog[0] - std::clamp(oog[0], 0.0, 1.0), oog[1] - std::clamp(oog[1], 0.0, 1.0),
                 oog[2] - std::clamp(oog[2], 0.0, 1.0)};
  if (diff[0] == 0.0 && diff[1] == 0.0 && diff[2] == 0.0) return 0.0;
  const Xyz d = rgb_to_xyz_matrix(Primaries::bt709) * diff;
  return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

inline double hdr_asl_term(const Rgb& linear) {
  const Ictcp c = rgb_to_ictcp(linear, kNominalHdrPeak);
  return saturation_level(c.ct, c.cp);
}

inline double sdr_asl_term(const Rgb& encoded) {
  const YCbCr c = rgb_to_ycbcr709(encoded);
  return saturation_level(c.cb, c.cr);
}

inline double sdr_linear_luma(const Rgb& encoded) {
  return weighted_sum(kBt709LumaCoeffs, {std::pow(encoded[0], kSdrGamma),
                                         std::pow(encoded[1], kSdrGamma),
                                         std::pow(encoded[2], kSdrGamma)});
}

inline double opponent_rg(const Rgb& p) { return p[0] - p[1]; }
inline double opponent_yb(const Rgb& p) { return 0.5 * (p[0] + p[1]) - p[2]; }

// Sum over all pixels of f(pixel) via row partials.
template <class PixelFn>
double pixel_sum(const PixelFrame& frame, Exec exec, PixelFn&& f) {
  const int w = frame.width();
  return sum_rows<1>(frame.height(), exec, [&](int y) {
           double s = 0.0;
           const std::size_t base = frame.index(0, y);
           for (int x = 0; x < w; ++x) s += f(frame.pixel(base + x));
           return std::array<double, 1>{s};
         })[0];
}

template <class PixelFn>
double pixel_mean(const PixelFrame& frame, Exec exec, PixelFn&& f) {
  if (frame.empty()) return 0.0;
  return pixel_sum(frame, exec, f) / static_cast<double>(frame.pixel_count());
}

double population_std(const std::vector<double>& v, int width, int rows, double mean, Exec exec) {
  if (v.empty()) return 0.0;
  const double ss = sum_rows<1>(rows, exec, [&](int r) {
    double s = 0.0;
    const std::size_t base = static_cast<std::size_t>(r) * width;
    for (int x = 0; x < width; ++x) {
      const double d = v[base + x] - mean;
      s += d * d;
    }
    return std::array<double, 1>{s};
  })[0];
  return std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<double> encoded_luma(const PixelFrame& frame, Exec exec) {
  const auto& w = luma_coeffs(frame.encoding().primaries);
  std::vector<double> out(frame.pixel_count());
  for_each_index(out.size(), exec, [&](std::size_t i) { out[i] = weighted_sum(w, frame.pixel(i)); });
  return out;
}

// 100 * population std of the 3x3 Sobel magnitude over interior pixels.
double sobel_std(const std::vector<double>& luma, int width, int height, Exec exec) {
  const int iw = width - 2, ih = height - 2;
  std::vector<double> mag(static_cast<std::size_t>(iw) * ih);
  const double total = sum_rows<1>(ih, exec, [&](int r) {
    const int y = r + 1;
    const double* up = &luma[static_cast<std::size_t>(y - 1) * width];
    const double* mid = &luma[static_cast<std::size_t>(y) * width];
    const double* dn = &luma[static_cast<std::size_t>(y + 1) * width];
    double s = 0.0;
    for (int x = 1; x <= iw; ++x) {
      const double gx = (up[x + 1] + 2.0 * mid[x + 1] + dn[x + 1]) - (up[x - 1] + 2.0 * mid[x - 1] + dn[x - 1]);
      const double gy = (dn[x - 1] + 2.0 * dn[x] + dn[x + 1]) - (up[x - 1] + 2.0 * up[x] + up[x + 1]);
      const double m = std::sqrt(gx * gx + gy * gy);
      mag[static_cast<std::size_t>(r) * iw + (x - 1)] = m;
      s += m;
    }
    return std::array<double, 1>{s};
  })[0];
  const double mean = total / static_cast<double>(mag.size());
  return 100.0 * population_std(mag, iw, ih, mean, exec);
}

double colorfulness(const PixelFrame& frame, Exec exec) {
  if (frame.empty()) return 0.0;
  const double n = static_cast<double>(frame.pixel_count());
  const int w = frame.width();
  const auto means = sum_rows<2>(frame.height(), exec, [&](int y) {
    std::array<double, 2> s{};
    const std::size_t base = frame.index(0, y);
    for (int x = 0; x < w; ++x) {
      const Rgb p = frame.pixel(base + x);
      s[0] += opponent_rg(p);
      s[1] += opponent_yb(p);
    }
    return s;
  });
  const double mu_rg = means[0] / n, mu_yb = means[1] / n;
  const auto ss = sum_rows<2>(frame.height(), exec, [&](int y) {
    std::array<double, 2> s{};
    const std::size_t base = frame.index(0, y);
    for (int x = 0; x < w; ++x) {
      const Rgb p = frame.pixel(base + x);
      const double a = opponent_rg(p) - mu_rg, b = opponent_yb(p) - mu_yb;
      s[0] += a * a;
      s[1] += b * b;
    }
    return s;
  });
  const double var_rg = ss[0] / n, var_yb = ss[1] / n;
  return 100.0 * (std::sqrt(var_rg + var_yb) + 0.3 * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb));
}

MetricVector evaluate_hdr(const PixelFrame& frame, Exec exec) {
  MetricVector mv;
  const std::size_t count = frame.pixel_count();
  if (count == 0) return mv;
  const double n = static_cast<double>(count);
  const int w = frame.width(), h = frame.height();
  std::vector<double> lum(count), luma(count);

  // Pass 1: everything that needs linear light.
  enum { kHl, kEhl, kWg, kEwg, kAsl, kY, kRg, kYb, kSlots };
  const auto s = sum_rows<kSlots>(h, exec, [&](int y) {
    std::array<double, kSlots> acc{};
    const std::size_t base = frame.index(0, y);
    for (int x = 0; x < w; ++x) {
      const std::size_t i = base + x;
      const Rgb code = frame.pixel(i);
      const Rgb lin = pq_linear(code);
      const double yl = weighted_sum(kBt2020LumaCoeffs, lin);
      lum[i] = yl;
      luma[i] = weighted_sum(kBt2020LumaCoeffs, code);
      acc[kHl] += yl > kHighlightThreshold ? 1.0 : 0.0;
      acc[kEhl] += ehl_term(yl);
      acc[kWg] += is_wide_gamut(lin) ? 1.0 : 0.0;
      acc[kEwg] += ewg_term(lin);
      acc[kAsl] += hdr_asl_term(lin);
      acc[kY] += yl;
      acc[kRg] += opponent_rg(code);
      acc[kYb] += opponent_yb(code);
    }
    return acc;
  });
  const double mean_y = s[kY] / n, mu_rg = s[kRg] / n, mu_yb = s[kYb] / n;

  // Pass 2: second moments.
  const auto ss = sum_rows<3>(h, exec, [&](int y) {
    std::array<double, 3> acc{};
    const std::size_t base = frame.index(0, y);
    for (int x = 0; x < w; ++x) {
      const std::size_t i = base + x;
      const Rgb code = frame.pixel(i);
      const double dy = lum[i] - mean_y;
      const double a = opponent_rg(code) - mu_rg, b = opponent_yb(code) - mu_yb;
      acc[0] += dy * dy;
      acc[1] += a * a;
      acc[2] += b * b;
    }
    return acc;
  });

  mv.fhlp = 100.0 * s[kHl] / n;
  mv.ehl = 100.0 * s[kEhl] / n;
  mv.fwgp = 100.0 * s[kWg] / n;
  mv.ewg = 100.0 * s[kEwg] / n;
  mv.si = (w >= 3 && h >= 3) ? std::optional(sobel_std(luma, w, h, exec)) : std::nullopt;
  mv.cf = 100.0 * (std::sqrt(ss[1] / n + ss[2] / n) + 0.3 * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb));
  mv.stdl = 100.0 * std::sqrt(ss[0] / n);
  mv.asl = s[kAsl] / n;
  mv.all = 100.0 * mean_y;
  return mv;
}

MetricVector evaluate_sdr(const PixelFrame& frame, Exec exec) {
  MetricVector mv;
  const std::size_t count = frame.pixel_count();
  if (count == 0) return mv;
  const double n = static_cast<double>(count);
  const int w = frame.width(), h = frame.height();
  std::vector<double> luma(count);
  enum { kAsl, kAll, kFoep, kSlots };
  const auto s = sum_rows<kSlots>(h, exec, [&](int y) {
    std::array<double, kSlots> acc{};
    const std::size_t base = frame.index(0, y);
    for (int x = 0; x < w; ++x) {
      const std::size_t i = base + x;
      const Rgb code = frame.pixel(i);
      const double l = weighted_sum(kBt709LumaCoeffs, code);
      luma[i] = l;
      acc[kAsl] += sdr_asl_term(code);
      acc[kAll] += sdr_linear_luma(code);
      acc[kFoep] += l >= kOverExposedLuma ? 1.0 : 0.0;
    }
    return acc;
  });
  mv.si = (w >= 3 && h >= 3) ? std::optional(sobel_std(luma, w, h, exec)) : std::nullopt;
  mv.cf = colorfulness(frame, exec);
  mv.asl = s[kAsl] / n;
  mv.all = 100.0 * s[kAll] / n;
  mv.foep = 100.0 * s[kFoep] / n;
  return mv;
}

}  // namespace

MetricVector MetricVector::from_slots(const std::array<std::optional<double>, 10>& s) {
  return {s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7], s[8], s[9]};
}

MetricVector frame_average(std::span<const MetricVector> rows) {
  std::array<double, 10> sum{};
  std::array<int, 10> defined{};
  for (const auto& r : rows) {
    const auto slots = r.slots();
    for (std::size_t k = 0; k < slots.size(); ++k)
      if (slots[k]) {
        sum[k] += *slots[k];
        ++defined[k];
      }
  }
  std::array<std::optional<double>, 10> out;
  for (std::size_t k = 0; k < out.size(); ++k)
    if (defined[k] > 0) out[k] = sum[k] / defined[k];
  return MetricVector::from_slots(out);
}

double saturation_level(double c1, double c2) {
  return 100.0 * std::numbers::sqrt2 * std::sqrt(c1 * c1 + c2 * c2);
}

double fhlp(const PixelFrame& hdr, Exec exec) {
  require_hdr(hdr, "fhlp");
  return 100.0 * pixel_mean(hdr, exec, [](const Rgb& c) {
           return weighted_sum(kBt2020LumaCoeffs, pq_linear(c)) > kHighlightThreshold ? 1.0 : 0.0;
         });
}

double ehl(const PixelFrame& hdr, Exec exec) {
  require_hdr(hdr, "ehl");
  return 100.0 * pixel_mean(hdr, exec, [](const Rgb& c) {
           return ehl_term(weighted_sum(kBt2020LumaCoeffs, pq_linear(c)));
         });
}

double fwgp(const PixelFrame& hdr, Exec exec) {
  require_hdr(hdr, "fwgp");
  return 100.0 * pixel_mean(hdr, exec, [](const Rgb& c) { return is_wide_gamut(pq_linear(c)) ? 1.0 : 0.0; });
}

double ewg(const PixelFrame& hdr, Exec exec) {
  require_hdr(hdr, "ewg");
  return 100.0 * pixel_mean(hdr, exec, [](const Rgb& c) { return ewg_term(pq_linear(c)); });
}

double si(const PixelFrame& frame, Exec exec) {
  require_encoded(frame, "si");
  require_sobel_size(frame);
  return sobel_std(encoded_luma(frame, exec), frame.width(), frame.height(), exec);
}

double cf(const PixelFrame& frame, Exec exec) {
  require_encoded(frame, "cf");
  return colorfulness(frame, exec);
}

double stdl(const PixelFrame& hdr, Exec exec) {
  require_hdr(hdr, "stdl");
  if (hdr.empty()) return 0.0;
  std::vector<double> y(hdr.pixel_count());
  for_each_index(y.size(), exec, [&](std::size_t i) {
    y[i] = weighted_sum(kBt2020LumaCoeffs, pq_linear(hdr.pixel(i)));
  });
  const double mean = sum_rows<1>(hdr.height(), exec, [&](int r) {
                        double s = 0.0;
                        for (int x = 0; x < hdr.width(); ++x) s += y[hdr.index(x, r)];
                        return std::array<double, 1>{s};
                      })[0] / static_cast<double>(y.size());
  return 100.0 * population_std(y, hdr.width(), hdr.height(), mean, exec);
}

double asl(const PixelFrame& frame, Exec exec) {
  require_encoded(frame, "asl");
  if (frame.encoding().is_hdr_pq())
    return pixel_mean(frame, exec, [](const Rgb& c) { return hdr_asl_term(pq_linear(c)); });
  if (frame.encoding().is_sdr_gamma())
    return pixel_mean(frame, exec, [](const Rgb& c) { return sdr_asl_term(c); });
  throw ContractError("asl: expected a PQ HDR or gamma SDR frame");
}

double all(const PixelFrame& frame, Exec exec) {
  require_encoded(frame, "all");
  if (frame.encoding().is_hdr_pq())
    return 100.0 * pixel_mean(frame, exec, [](const Rgb& c) {
             return weighted_sum(kBt2020LumaCoeffs, pq_linear(c));
           });
  if (frame.encoding().is_sdr_gamma())
    return 100.0 * pixel_mean(frame, exec, [](const Rgb& c) { return sdr_linear_luma(c); });
  throw ContractError("all: expected a PQ HDR or gamma SDR frame");
}

double foep(const PixelFrame& sdr, Exec exec) {
  require_transfer(sdr, Transfer::gamma_sdr, "foep");
  require_unit_range(sdr, "foep");
  return 100.0 * pixel_mean(sdr, exec, [](const Rgb& c) {
           return weighted_sum(kBt709LumaCoeffs, c) >= kOverExposedLuma ? 1.0 : 0.0;
         });
}

MetricVector evaluate(const PixelFrame& frame, Exec exec) {
  require_encoded(frame, "evaluate");
  if (frame.encoding().is_hdr_pq()) return evaluate_hdr(frame, exec);
  if (frame.encoding().is_sdr_gamma()) return evaluate_sdr(frame, exec);
  throw ContractError("evaluate: expected a PQ HDR or gamma SDR frame");
}

double psnr(const PixelFrame& pred, const PixelFrame& gt, Exec exec) {
  require_hdr(pred, "psnr");
  require_hdr(gt, "psnr");
  require_same_shape(pred, gt, "psnr");
  if (gt.empty()) throw ContractError("psnr: empty frames");
  const int w = gt.width();
  const double se = sum_rows<1>(gt.height(), exec, [&](int y) {
    double s = 0.0;
    const std::size_t base = gt.index(0, y);
    for (int x = 0; x < w; ++x) {
      const Rgb a = pred.pixel(base + x), b = gt.pixel(base + x);
      for (int c = 0; c < 3; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    }
    return std::array<double, 1>{s};
  })[0];
  const double mse = se / (3.0 * static_cast<double>(gt.pixel_count()));
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double delta_e_itp(const PixelFrame& pred, const PixelFrame& gt, Exec exec) {
  require_hdr(pred, "delta_e_itp");
  require_hdr(gt, "delta_e_itp");
  require_same_shape(pred, gt, "delta_e_itp");
  if (gt.empty()) throw ContractError("delta_e_itp: empty frames");
  const int w = gt.width();
  const double total = sum_rows<1>(gt.height(), exec, [&](int y) {
    double s = 0.0;
    const std::size_t base = gt.index(0, y);
    for (int x = 0; x < w; ++x) {
      const Ictcp a = rgb_to_ictcp(pq_linear(pred.pixel(base + x)), kNominalHdrPeak);
      const Ictcp b = rgb_to_ictcp(pq_linear(gt.pixel(base + x)), kNominalHdrPeak);
      const double di = a.i - b.i, dt = 0.5 * (a.ct - b.ct), dp = a.cp - b.cp;
      s += 720.0 * std::sqrt(di * di + dt * dt + dp * dp);
    }
    return std::array<double, 1>{s};
  })[0];
  return total / static_cast<double>(gt.pixel_count());
}

std::optional<double> recovery_rate(double pred, double gt) {
  if (gt == 0.0) return std::nullopt;
  return 100.0 * pred / gt;
}

std::optional<double> shift_rate(double pred, double gt) {
  if (gt == 0.0) return std::nullopt;
  return 100.0 * (pred - gt) / gt;
}

ComparisonReport compare(const PixelFrame& pred, const PixelFrame& gt, Exec exec) {
  require_hdr(pred, "compare");
  require_hdr(gt, "compare");
  require_same_shape(pred, gt, "compare");
  if (gt.empty()) throw ContractError("compare: empty frames");
  ComparisonReport r;
  r.pred = evaluate_hdr(pred, exec);
  r.gt = evaluate_hdr(gt, exec);
  r.fhlp_recovery = recovery_rate(*r.pred.fhlp, *r.gt.fhlp);
  r.ehl_recovery = recovery_rate(*r.pred.ehl, *r.gt.ehl);
  r.fwgp_recovery = recovery_rate(*r.pred.fwgp, *r.gt.fwgp);
  r.ewg_recovery = recovery_rate(*r.pred.ewg, *r.gt.ewg);
  r.asl_shift = shift_rate(*r.pred.asl, *r.gt.asl);
  r.all_shift = shift_rate(*r.pred.all, *r.gt.all);
  r.psnr_db = psnr(pred, gt, exec);
  r.delta_e_itp = delta_e_itp(pred, gt, exec);
  return r;
}

}  // namespace hdrtv::metrics
