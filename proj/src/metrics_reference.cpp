#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hdrtv/color.hpp"
#include "hdrtv/error.hpp"
#include "hdrtv/metrics.hpp"

namespace hdrtv::metrics::reference {

namespace {

Rgb linear_of(const PixelFrame& f, std::size_t i) {
  const Rgb c = f.pixel(i);
  if (f.encoding().is_hdr_pq())
    return {pq_eotf(c[0]) / 1000.0, pq_eotf(c[1]) / 1000.0, pq_eotf(c[2]) / 1000.0};
  return {sdr_eotf(c[0]), sdr_eotf(c[1]), sdr_eotf(c[2])};
}

double luminance_of(const PixelFrame& f, std::size_t i) {
  return weighted_sum(luma_coeffs(f.encoding().primaries), linear_of(f, i));
}

void check_hdr(const PixelFrame& f, const char* op) {
  require_transfer(f, Transfer::pq, op);
  require_unit_range(f, op);
}

void check_encoded(const PixelFrame& f, const char* op) {
  if (f.encoding().is_linear()) throw ContractError(std::string(op) + ": linear frame");
  require_unit_range(f, op);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

double fhlp(const PixelFrame& hdr) {
  check_hdr(hdr, "fhlp");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < hdr.pixel_count(); ++i)
    if (luminance_of(hdr, i) > kHighlightThreshold) ++hits;
  return hdr.empty() ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(hdr.pixel_count());
}

double ehl(const PixelFrame& hdr) {
  check_hdr(hdr, "ehl");
  std::vector<double> d;
  for (std::size_t i = 0; i < hdr.pixel_count(); ++i) {
    const double y = luminance_of(hdr, i);
    const double clipped = std::clamp(y, 0.0, kHighlightThreshold);
    d.push_back(std::sqrt((y - clipped) * (y - clipped)));
  }
  return 100.0 * mean(d);
}

double fwgp(const PixelFrame& hdr) {
  check_hdr(hdr, "fwgp");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < hdr.pixel_count(); ++i) {
    const auto xy = xyz_to_xy(rgb_to_xyz_matrix(Primaries::bt2020) * linear_of(hdr, i));
    if (contains(kBt2020Gamut, xy) && !contains(kBt709Gamut, xy)) ++hits;
  }
  return hdr.empty() ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(hdr.pixel_count());
}

double ewg(const PixelFrame& hdr) {
  check_hdr(hdr, "ewg");
  const Mat3& to_xyz = rgb_to_xyz_matrix(Primaries::bt709);
  std::vector<double> d;
  for (std::size_t i = 0; i < hdr.pixel_count(); ++i) {
    const Rgb oog = kBt2020ToBt709 * linear_of(hdr, i);
    Rgb clipped;
    for (int c = 0; c < 3; ++c) clipped[c] = std::clamp(oog[c], 0.0, 1.0);
    const Xyz s = to_xyz * oog, hc = to_xyz * clipped;
    double sq = 0.0;
    for (int c = 0; c < 3; ++c) sq += (s[c] - hc[c]) * (s[c] - hc[c]);
    d.push_back(std::sqrt(sq));
  }
  return 100.0 * mean(d);
}

double si(const PixelFrame& frame) {
  check_encoded(frame, "si");
  if (frame.width() < 3 || frame.height() < 3) throw DomainError("si: frame must be at least 3x3");
  const auto& w = luma_coeffs(frame.encoding().primaries);
  auto luma = [&](int x, int y) { return weighted_sum(w, frame.pixel(x, y)); };
  std::vector<double> mag;
  for (int y = 1; y + 1 < frame.height(); ++y)
    for (int x = 1; x + 1 < frame.width(); ++x) {
      const double gx = -luma(x - 1, y - 1) - 2 * luma(x - 1, y) - luma(x - 1, y + 1) +
                        luma(x + 1, y - 1) + 2 * luma(x + 1, y) + luma(x + 1, y + 1);
      const double gy = -luma(x - 1, y - 1) - 2 * luma(x, y - 1) - luma(x + 1, y - 1) +
                        luma(x - 1, y + 1) + 2 * luma(x, y + 1) + luma(x + 1, y + 1);
      mag.push_back(std::hypot(gx, gy));
    }
  return 100.0 * pop_std(mag);
}

double cf(const PixelFrame& frame) {
  check_encoded(frame, "cf");
  std::vector<double> rg, yb;
  for (std::size_t i = 0; i < frame.pixel_count(); ++i) {
    const Rgb p = frame.pixel(i);
    rg.push_back(p[0] - p[1]);
    yb.push_back(0.5 * (p[0] + p[1]) - p[2]);
  }
  const double s_rg = pop_std(rg), s_yb = pop_std(yb), m_rg = mean(rg), m_yb = mean(yb);
  return 100.0 * (std::sqrt(s_rg * s_rg + s_yb * s_yb) + 0.3 * std::sqrt(m_rg * m_rg + m_yb * m_yb));
}

double stdl(const PixelFrame& hdr) {
  check_hdr(hdr, "stdl");
  std::vector<double> y;
  for (std::size_t i = 0; i < hdr.pixel_count(); ++i) y.push_back(luminance_of(hdr, i));
  return 100.0 * pop_std(y);
}

double asl(const PixelFrame& frame) {
  check_encoded(frame, "asl");
  std::vector<double> len;
  for (std::size_t i = 0; i < frame.pixel_count(); ++i) {
    double c1, c2;
    if (frame.encoding().is_hdr_pq()) {
      const Ictcp v = rgb_to_ictcp(linear_of(frame, i), 1000.0);
      c1 = v.ct;
      c2 = v.cp;
    } else {
      const YCbCr v = rgb_to_ycbcr709(frame.pixel(i));
      c1 = v.cb;
      c2 = v.cr;
    }
    len.push_back(std::hypot(c1, c2));
  }
  return 100.0 * std::numbers::sqrt2 * mean(len);
}

double all(const PixelFrame& frame) {
  check_encoded(frame, "all");
  std::vector<double> y;
  for (std::size_t i = 0; i < frame.pixel_count(); ++i) y.push_back(luminance_of(frame, i));
  return 100.0 * mean(y);
}

double foep(const PixelFrame& sdr) {
  require_transfer(sdr, Transfer::gamma_sdr, "foep");
  require_unit_range(sdr, "foep");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < sdr.pixel_count(); ++i)
    if (weighted_sum(kBt709LumaCoeffs, sdr.pixel(i)) >= kOverExposedLuma) ++hits;
  return sdr.empty() ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(sdr.pixel_count());
}

MetricVector evaluate(const PixelFrame& frame) {
  MetricVector mv;
  if (frame.empty()) return mv;
  const bool sobel = frame.width() >= 3 && frame.height() >= 3;
  if (frame.encoding().is_hdr_pq()) {
    mv.fhlp = fhlp(frame);
    mv.ehl = ehl(frame);
    mv.fwgp = fwgp(frame);
    mv.ewg = ewg(frame);
    mv.stdl = stdl(frame);
  } else if (frame.encoding().is_sdr_gamma()) {
    mv.foep = foep(frame);
  } else {
    throw ContractError("evaluate: expected a PQ HDR or gamma SDR frame");
  }
  if (sobel) mv.si = si(frame);
  mv.cf = cf(frame);
  mv.asl = asl(frame);
  mv.all = all(frame);
  return mv;
}

double psnr(const PixelFrame& pred, const PixelFrame& gt) {
  check_hdr(pred, "psnr");
  check_hdr(gt, "psnr");
  require_same_shape(pred, gt, "psnr");
  double se = 0.0;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    const Rgb a = pred.pixel(i), b = gt.pixel(i);
    for (int c = 0; c < 3; ++c) se += (a[c] - b[c]) * (a[c] - b[c]);
  }
  const double mse = se / (3.0 * static_cast<double>(gt.pixel_count()));
  return mse == 0.0 ? std::numeric_limits<double>::infinity() : -10.0 * std::log10(mse);
}

double delta_e_itp(const PixelFrame& pred, const PixelFrame& gt) {
  check_hdr(pred, "delta_e_itp");
  check_hdr(gt, "delta_e_itp");
  require_same_shape(pred, gt, "delta_e_itp");
  std::vector<double> d;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    const Ictcp a = rgb_to_ictcp(linear_of(pred, i), 1000.0);
    const Ictcp b = rgb_to_ictcp(linear_of(gt, i), 1000.0);
    const double di = a.i - b.i, dt = 0.5 * (a.ct - b.ct), dp = a.cp - b.cp;
    d.push_back(720.0 * std::sqrt(di * di + dt * dt + dp * dp));
  }
  return mean(d);
}

}  // namespace hdrtv::metrics::reference
