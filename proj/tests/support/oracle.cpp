#include "oracle.hpp"

#include <cmath>

namespace oracle {

namespace {

constexpr double kM1 = 0.1593017578125;
constexpr double kM2 = 78.84375;
constexpr double kC1 = 0.8359375;
constexpr double kC2 = 18.8515625;
constexpr double kC3 = 18.6875;

double sq(double v) { return v * v; }

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

double det(const M3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Two-pass population standard deviation.
double pop_std(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += sq(x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

double mean(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

const std::array<double, 6> kTri2020{0.708, 0.292, 0.170, 0.797, 0.131, 0.046};
const std::array<double, 6> kTri709{0.640, 0.330, 0.300, 0.600, 0.150, 0.060};

}  // namespace

double pq_nits(double code) {
  const double p = std::pow(code, 1.0 / kM2);
  double num = p - kC1;
  if (num < 0.0) num = 0.0;
  return 10000.0 * std::pow(num / (kC2 - kC3 * p), 1.0 / kM1);
}

double pq_code(double nits) {
  const double y = std::pow(nits / 10000.0, kM1);
  return std::pow((kC1 + kC2 * y) / (1.0 + kC3 * y), kM2);
}

double sdr_linear(double code) { return std::pow(code, 2.22); }
double sdr_code(double linear) { return std::pow(linear, 1.0 / 2.22); }

V3 mul(const M3& m, const V3& v) {
  V3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i] += m[i][j] * v[j];
  return r;
}

M3 mul(const M3& a, const M3& b) {
  M3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

M3 inverse(const M3& m) {
  const double d = det(m);
  M3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      r[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
    }
  return r;
}

M3 rgb_to_xyz(double xr, double yr, double xg, double yg, double xb, double yb, double xw,
              double yw) {
  const M3 p{{{xr / yr, xg / yg, xb / yb}, {1.0, 1.0, 1.0},
              {(1 - xr - yr) / yr, (1 - xg - yg) / yg, (1 - xb - yb) / yb}}};
  const V3 w{xw / yw, 1.0, (1 - xw - yw) / yw};
  // Solve p * s = w column by column with Cramer's rule.
  const double d = det(p);
  V3 s{};
  for (int c = 0; c < 3; ++c) {
    M3 q = p;
    for (int r = 0; r < 3; ++r) q[r][c] = w[r];
    s[c] = det(q) / d;
  }
  M3 out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[r][c] = p[r][c] * s[c];
  return out;
}

M3 bt2020_to_xyz() { return rgb_to_xyz(0.708, 0.292, 0.170, 0.797, 0.131, 0.046, 0.3127, 0.3290); }
M3 bt709_to_xyz() { return rgb_to_xyz(0.640, 0.330, 0.300, 0.600, 0.150, 0.060, 0.3127, 0.3290); }

M3 gm_matrix() {
  return {{{1.6605, -0.5876, -0.0728}, {-0.1246, 1.1329, -0.0083}, {-0.0182, -0.1006, 1.1187}}};
}

Ictcp ictcp(const V3& linear_1000) {
  const double l = (1688 * linear_1000[0] + 2146 * linear_1000[1] + 262 * linear_1000[2]) / 4096;
  const double m = (683 * linear_1000[0] + 2951 * linear_1000[1] + 462 * linear_1000[2]) / 4096;
  const double s = (99 * linear_1000[0] + 309 * linear_1000[1] + 3688 * linear_1000[2]) / 4096;
  // Scale to absolute nits, clip to the PQ range, encode.
  const double lp = pq_code(std::fmin(std::fmax(l * 1000.0, 0.0), 10000.0));
  const double mp = pq_code(std::fmin(std::fmax(m * 1000.0, 0.0), 10000.0));
  const double sp = pq_code(std::fmin(std::fmax(s * 1000.0, 0.0), 10000.0));
  return {0.5 * lp + 0.5 * mp, (6610 * lp - 13613 * mp + 7003 * sp) / 4096,
          (17933 * lp - 17390 * mp - 543 * sp) / 4096};
}

bool in_triangle(double x, double y, const std::array<double, 6>& t, double tol) {
  auto side = [&](int a, int b) {
    return (t[2 * b] - t[2 * a]) * (y - t[2 * a + 1]) - (t[2 * b + 1] - t[2 * a + 1]) * (x - t[2 * a]);
  };
  const double d0 = side(0, 1), d1 = side(1, 2), d2 = side(2, 0);
  const bool neg = d0 < -tol || d1 < -tol || d2 < -tol;
  const bool pos = d0 > tol || d1 > tol || d2 > tol;
  return !(neg && pos);
}

V3 linear_of(const hdrtv::PixelFrame& f, int x, int y) {
  const auto c = f.pixel(x, y);
  if (f.encoding().is_hdr_pq())
    return {pq_nits(c[0]) / 1000.0, pq_nits(c[1]) / 1000.0, pq_nits(c[2]) / 1000.0};
  return {sdr_linear(c[0]), sdr_linear(c[1]), sdr_linear(c[2])};
}

double luminance(const hdrtv::PixelFrame& f, int x, int y) {
  const V3 l = linear_of(f, x, y);
  if (f.encoding().is_hdr_pq()) return 0.2627 * l[0] + 0.6780 * l[1] + 0.0593 * l[2];
  return 0.2126 * l[0] + 0.7152 * l[1] + 0.0722 * l[2];
}

double fhlp(const hdrtv::PixelFrame& f) {
  long hits = 0;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x)
      if (luminance(f, x, y) > 0.1) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(f.pixel_count());
}

double ehl(const hdrtv::PixelFrame& f) {
  std::vector<double> d;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) {
      const double l = luminance(f, x, y);
      d.push_back(l > 0.1 ? l - 0.1 : 0.0);
    }
  return 100.0 * mean(d);
}

double fwgp(const hdrtv::PixelFrame& f) {
  const M3 to_xyz = bt2020_to_xyz();
  long hits = 0;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) {
      const V3 xyz = mul(to_xyz, linear_of(f, x, y));
      const double s = xyz[0] + xyz[1] + xyz[2];
      if (s <= 0.0) continue;  // black: white point, inside
      const double cx = xyz[0] / s, cy = xyz[1] / s;
      if (in_triangle(cx, cy, kTri2020, 1e-9) && !in_triangle(cx, cy, kTri709, 1e-9)) ++hits;
    }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(f.pixel_count());
}

double ewg(const hdrtv::PixelFrame& f) {
  const M3 m = gm_matrix(), to_xyz = bt709_to_xyz();
  std::vector<double> d;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) {
      const V3 oog = mul(m, linear_of(f, x, y));
      const V3 a = mul(to_xyz, oog);
      const V3 b = mul(to_xyz, V3{clamp01(oog[0]), clamp01(oog[1]), clamp01(oog[2])});
      d.push_back(std::sqrt(sq(a[0] - b[0]) + sq(a[1] - b[1]) + sq(a[2] - b[2])));
    }
  return 100.0 * mean(d);
}

double si(const hdrtv::PixelFrame& f) {
  const bool hdr = f.encoding().is_hdr_pq();
  auto luma = [&](int x, int y) {
    const auto c = f.pixel(x, y);
    return hdr ? 0.2627 * c[0] + 0.6780 * c[1] + 0.0593 * c[2]
               : 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2];
  };
  static const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static const int ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  std::vector<double> mag;
  for (int y = 1; y < f.height() - 1; ++y)
    for (int x = 1; x < f.width() - 1; ++x) {
      double gx = 0.0, gy = 0.0;
      for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i) {
          gx += kx[j + 1][i + 1] * luma(x + i, y + j);
          gy += ky[j + 1][i + 1] * luma(x + i, y + j);
        }
      mag.push_back(std::sqrt(gx * gx + gy * gy));
    }
  return 100.0 * pop_std(mag);
}

double cf(const hdrtv::PixelFrame& f) {
  std::vector<double> rg, yb;
  for (std::size_t i = 0; i < f.pixel_count(); ++i) {
    const auto c = f.pixel(i);
    rg.push_back(c[0] - c[1]);
    yb.push_back((c[0] + c[1]) / 2.0 - c[2]);
  }
  return 100.0 * (std::sqrt(sq(pop_std(rg)) + sq(pop_std(yb))) +
                  0.3 * std::sqrt(sq(mean(rg)) + sq(mean(yb))));
}

double stdl(const hdrtv::PixelFrame& f) {
  std::vector<double> l;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) l.push_back(luminance(f, x, y));
  return 100.0 * pop_std(l);
}

double asl(const hdrtv::PixelFrame& f) {
  std::vector<double> len;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) {
      if (f.encoding().is_hdr_pq()) {
        const Ictcp v = ictcp(linear_of(f, x, y));
        len.push_back(std::sqrt(v.ct * v.ct + v.cp * v.cp));
      } else {
        const auto c = f.pixel(x, y);
        const double yy = 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2];
        const double cb = (c[2] - yy) / 1.8556, cr = (c[0] - yy) / 1.5748;
        len.push_back(std::sqrt(cb * cb + cr * cr));
      }
    }
  return 100.0 * std::sqrt(2.0) * mean(len);
}

double all(const hdrtv::PixelFrame& f) {
  std::vector<double> l;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) l.push_back(luminance(f, x, y));
  return 100.0 * mean(l);
}

double foep(const hdrtv::PixelFrame& f) {
  long hits = 0;
  for (std::size_t i = 0; i < f.pixel_count(); ++i) {
    const auto c = f.pixel(i);
    const double luma = 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2];
    if (luma * 512.0 >= 511.0) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(f.pixel_count());
}

double psnr(const hdrtv::PixelFrame& a, const hdrtv::PixelFrame& b) {
  double se = 0.0;
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    const auto p = a.pixel(i), q = b.pixel(i);
    for (int c = 0; c < 3; ++c) se += sq(p[c] - q[c]);
  }
  return 10.0 * std::log10(1.0 / (se / (3.0 * static_cast<double>(a.pixel_count()))));
}

double delta_e_itp(const hdrtv::PixelFrame& a, const hdrtv::PixelFrame& b) {
  std::vector<double> d;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      const Ictcp p = ictcp(linear_of(a, x, y)), q = ictcp(linear_of(b, x, y));
      d.push_back(720.0 * std::sqrt(sq(p.i - q.i) + sq(0.5 * (p.ct - q.ct)) + sq(p.cp - q.cp)));
    }
  return mean(d);
}

}  // namespace oracle
