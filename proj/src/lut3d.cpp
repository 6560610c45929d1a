#include "hdrtv/lut3d.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "hdrtv/error.hpp"
#include "hdrtv/image_io.hpp"

namespace hdrtv {

namespace {

constexpr int kMaxLutSize = 256;

struct Axis {
  int lo, hi;
  double f;
};

// Lattice cell and fraction along one axis. Exact lattice coordinates give
// f == 0 so lookups there return the stored entry unchanged.
Axis locate(double v, double lo, double hi, int n) {
  const double pos = (std::clamp(v, lo, hi) - lo) / (hi - lo) * (n - 1);
  const int i0 = std::clamp(static_cast<int>(std::floor(pos)), 0, n - 1);
  return {i0, std::min(i0 + 1, n - 1), pos - i0};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_floats(const std::string& text, double* out, int count) {
  std::istringstream ss(text);
  ss.imbue(std::locale::classic());
  for (int i = 0; i < count; ++i)
    if (!(ss >> out[i])) return false;
  std::string rest;
  return !(ss >> rest);
}

}  // namespace

Lut3D::Lut3D(int size, std::vector<float> rgb, std::array<double, 3> domain_min,
             std::array<double, 3> domain_max, LutInterpolation interpolation)
    : size_(size),
      rgb_(std::move(rgb)),
      domain_min_(domain_min),
      domain_max_(domain_max),
      interpolation_(interpolation) {
  if (size < 2 || size > kMaxLutSize) throw DomainError("LUT size must be in [2, 256]");
  const std::size_t expected = 3 * static_cast<std::size_t>(size) * size * size;
  if (rgb_.size() != expected)
    throw DomainError("LUT holds " + std::to_string(rgb_.size() / 3) + " entries, expected " +
                      std::to_string(expected / 3));
  for (int c = 0; c < 3; ++c)
    if (!(domain_min_[c] < domain_max_[c])) throw DomainError("LUT domain_min must be < domain_max");
}

Lut3D Lut3D::identity(int size, LutInterpolation interpolation) {
  std::vector<float> rgb;
  rgb.reserve(3 * static_cast<std::size_t>(size) * size * size);
  const double step = 1.0 / (size - 1);
  for (int b = 0; b < size; ++b)
    for (int g = 0; g < size; ++g)
      for (int r = 0; r < size; ++r) {
        rgb.push_back(static_cast<float>(r * step));
        rgb.push_back(static_cast<float>(g * step));
        rgb.push_back(static_cast<float>(b * step));
      }
  Lut3D lut(size, std::move(rgb), {0, 0, 0}, {1, 1, 1}, interpolation);
  lut.title = "identity";
  return lut;
}

bool Lut3D::in_domain(const Rgb& v) const {
  for (int c = 0; c < 3; ++c)
    if (!(v[c] >= domain_min_[c] && v[c] <= domain_max_[c])) return false;
  return true;
}

Rgb Lut3D::sample(const Rgb& v) const {
  const Axis r = locate(v[0], domain_min_[0], domain_max_[0], size_);
  const Axis g = locate(v[1], domain_min_[1], domain_max_[1], size_);
  const Axis b = locate(v[2], domain_min_[2], domain_max_[2], size_);
  const Rgb c000 = entry(r.lo, g.lo, b.lo), c111 = entry(r.hi, g.hi, b.hi);
  Rgb out;
  if (interpolation_ == LutInterpolation::trilinear) {
    const Rgb c100 = entry(r.hi, g.lo, b.lo), c010 = entry(r.lo, g.hi, b.lo);
    const Rgb c110 = entry(r.hi, g.hi, b.lo), c001 = entry(r.lo, g.lo, b.hi);
    const Rgb c101 = entry(r.hi, g.lo, b.hi), c011 = entry(r.lo, g.hi, b.hi);
    for (int k = 0; k < 3; ++k) {
      const double c00 = c000[k] * (1 - r.f) + c100[k] * r.f;
      const double c10 = c010[k] * (1 - r.f) + c110[k] * r.f;
      const double c01 = c001[k] * (1 - r.f) + c101[k] * r.f;
      const double c11 = c011[k] * (1 - r.f) + c111[k] * r.f;
      const double c0 = c00 * (1 - g.f) + c10 * g.f;
      const double c1 = c01 * (1 - g.f) + c11 * g.f;
      out[k] = c0 * (1 - b.f) + c1 * b.f;
    }
    return out;
  }
  // Tetrahedral: pick the simplex of the unit cube containing the fraction
  // triple and blend its four corners with barycentric weights.
  Rgb c1, c2;
  double w0, w1, w2, w3;
  if (r.f >= g.f) {
    if (g.f >= b.f) {
      c1 = entry(r.hi, g.lo, b.lo), c2 = entry(r.hi, g.hi, b.lo);
      w0 = 1 - r.f, w1 = r.f - g.f, w2 = g.f - b.f, w3 = b.f;
    } else if (r.f >= b.f) {
      c1 = entry(r.hi, g.lo, b.lo), c2 = entry(r.hi, g.lo, b.hi);
      w0 = 1 - r.f, w1 = r.f - b.f, w2 = b.f - g.f, w3 = g.f;
    } else {
      c1 = entry(r.lo, g.lo, b.hi), c2 = entry(r.hi, g.lo, b.hi);
      w0 = 1 - b.f, w1 = b.f - r.f, w2 = r.f - g.f, w3 = g.f;
    }
  } else {
    if (b.f >= g.f) {
      c1 = entry(r.lo, g.lo, b.hi), c2 = entry(r.lo, g.hi, b.hi);
      w0 = 1 - b.f, w1 = b.f - g.f, w2 = g.f - r.f, w3 = r.f;
    } else if (b.f >= r.f) {
      c1 = entry(r.lo, g.hi, b.lo), c2 = entry(r.lo, g.hi, b.hi);
      w0 = 1 - g.f, w1 = g.f - b.f, w2 = b.f - r.f, w3 = r.f;
    } else {
      c1 = entry(r.lo, g.hi, b.lo), c2 = entry(r.hi, g.hi, b.lo);
      w0 = 1 - g.f, w1 = g.f - r.f, w2 = r.f - b.f, w3 = b.f;
    }
  }
  for (int k = 0; k < 3; ++k) out[k] = w0 * c000[k] + w1 * c1[k] + w2 * c2[k] + w3 * c111[k];
  return out;
}

Lut3D parse_cube(std::istream& in, const std::string& source_name) {
  int size = 0;
  std::array<double, 3> dmin{0, 0, 0}, dmax{1, 1, 1};
  std::string title;
  std::vector<float> rgb;
  std::size_t expected = 0;
  int line_no = 0;
  int last_data_line = 0;
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto sp = line.find_first_of(" \t");
    const std::string key = line.substr(0, sp);
    const std::string rest = sp == std::string::npos ? std::string{} : trim(line.substr(sp));

    if (std::isalpha(static_cast<unsigned char>(key[0]))) {
      if (!rgb.empty()) throw ParseError(source_name, line_no, "keyword after LUT data: " + key);
      if (key == "TITLE") {
        title = rest;
        if (title.size() >= 2 && title.front() == '"' && title.back() == '"')
          title = title.substr(1, title.size() - 2);
      } else if (key == "LUT_3D_SIZE") {
        double n = 0;
        if (!parse_floats(rest, &n, 1) || n != std::floor(n) || n < 2 || n > kMaxLutSize)
          throw ParseError(source_name, line_no, "LUT_3D_SIZE must be an integer in [2, 256]");
        size = static_cast<int>(n);
        expected = static_cast<std::size_t>(size) * size * size;
        rgb.reserve(3 * expected);
      } else if (key == "DOMAIN_MIN") {
        if (!parse_floats(rest, dmin.data(), 3))
          throw ParseError(source_name, line_no, "DOMAIN_MIN needs three numbers");
      } else if (key == "DOMAIN_MAX") {
        if (!parse_floats(rest, dmax.data(), 3))
          throw ParseError(source_name, line_no, "DOMAIN_MAX needs three numbers");
      } else if (key == "LUT_3D_INPUT_RANGE") {
        double range[2];
        if (!parse_floats(rest, range, 2))
          throw ParseError(source_name, line_no, "LUT_3D_INPUT_RANGE needs two numbers");
        dmin = {range[0], range[0], range[0]};
        dmax = {range[1], range[1], range[1]};
      } else if (key == "LUT_1D_SIZE" || key == "LUT_1D_INPUT_RANGE") {
        throw ParseError(source_name, line_no, "1D LUTs are not supported");
      } else {
        throw ParseError(source_name, line_no, "unknown keyword " + key);
      }
      continue;
    }

    if (size == 0) throw ParseError(source_name, line_no, "LUT data before LUT_3D_SIZE");
    double v[3];
    if (!parse_floats(line, v, 3))
      throw ParseError(source_name, line_no, "expected three numbers \"r g b\"");
    if (rgb.size() / 3 >= expected)
      throw ParseError(source_name, line_no, "more than " + std::to_string(expected) + " entries");
    for (double c : v) {
      if (!(c >= 0.0 && c <= 1.0))
        throw ParseError(source_name, line_no, "LUT entry outside [0,1]");
      rgb.push_back(static_cast<float>(c));
    }
    last_data_line = line_no;
  }
  if (size == 0) throw ParseError(source_name, line_no, "missing LUT_3D_SIZE");
  if (rgb.size() / 3 != expected)
    throw ParseError(source_name, std::max(last_data_line, line_no),
                     "found " + std::to_string(rgb.size() / 3) + " entries, expected " +
                         std::to_string(expected));
  for (int c = 0; c < 3; ++c)
    if (!(dmin[c] < dmax[c]))
      throw ParseError(source_name, line_no, "DOMAIN_MIN must be below DOMAIN_MAX");
  Lut3D lut(size, std::move(rgb), dmin, dmax);
  lut.title = title;
  return lut;
}

Lut3D load_cube(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open LUT " + path.string());
  return parse_cube(in, path.string());
}

void write_cube(std::ostream& out, const Lut3D& lut) {
  out.imbue(std::locale::classic());
  if (!lut.title.empty()) out << "TITLE \"" << lut.title << "\"\n";
  out << "LUT_3D_SIZE " << lut.size() << "\n";
  out << std::setprecision(std::numeric_limits<float>::max_digits10);
  out << "DOMAIN_MIN " << lut.domain_min()[0] << ' ' << lut.domain_min()[1] << ' '
      << lut.domain_min()[2] << "\n";
  out << "DOMAIN_MAX " << lut.domain_max()[0] << ' ' << lut.domain_max()[1] << ' '
      << lut.domain_max()[2] << "\n";
  const auto& d = lut.data();
  for (std::size_t i = 0; i < d.size(); i += 3)
    out << d[i] << ' ' << d[i + 1] << ' ' << d[i + 2] << "\n";
}

void save_cube(const std::filesystem::path& path, const Lut3D& lut) {
  std::ostringstream ss;
  write_cube(ss, lut);
  const std::string text = ss.str();
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

LutApplyResult lut_apply(const PixelFrame& frame, const Lut3D& lut, ColorEncoding output,
                         Exec exec) {
  LutApplyResult result{PixelFrame(frame.width(), frame.height(), output), 0};
  const int w = frame.width();
  const auto clamped = sum_rows<1>(frame.height(), exec, [&](int y) {
    double count = 0;
    const std::size_t base = frame.index(0, y);
    for (int x = 0; x < w; ++x) {
      const Rgb v = frame.pixel(base + x);
      if (!lut.in_domain(v)) ++count;
      result.frame.set_pixel(base + x, lut.sample(v));
    }
    return std::array<double, 1>{count};
  });
  result.clamped_pixels = static_cast<std::size_t>(clamped[0]);
  return result;
}

}  // namespace hdrtv
