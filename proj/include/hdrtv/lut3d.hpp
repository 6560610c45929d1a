#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hdrtv/frame.hpp"
#include "hdrtv/parallel.hpp"

namespace hdrtv {

enum class LutInterpolation { trilinear, tetrahedral };

// Cubic lattice of RGB outputs. Entries are stored in .cube order: red
// varies fastest, then green, then blue.
class Lut3D {
 public:
  Lut3D(int size, std::vector<float> rgb, std::array<double, 3> domain_min = {0, 0, 0},
        std::array<double, 3> domain_max = {1, 1, 1},
        LutInterpolation interpolation = LutInterpolation::tetrahedral);

  static Lut3D identity(int size, LutInterpolation interpolation = LutInterpolation::tetrahedral);

  int size() const { return size_; }
  const std::array<double, 3>& domain_min() const { return domain_min_; }
  const std::array<double, 3>& domain_max() const { return domain_max_; }
  LutInterpolation interpolation() const { return interpolation_; }
  void set_interpolation(LutInterpolation mode) { interpolation_ = mode; }
  const std::vector<float>& data() const { return rgb_; }

  Rgb entry(int r, int g, int b) const {
    const std::size_t i = 3 * (static_cast<std::size_t>(b) * size_ * size_ +
                               static_cast<std::size_t>(g) * size_ + r);
    return {rgb_[i], rgb_[i + 1], rgb_[i + 2]};
  }

  bool in_domain(const Rgb& v) const;
  // Interpolated lookup. Inputs outside the domain are clamped onto it.
  Rgb sample(const Rgb& v) const;

  std::string title;

 private:
  int size_;
  std::vector<float> rgb_;
  std::array<double, 3> domain_min_, domain_max_;
  LutInterpolation interpolation_;
};

// .cube text format. Errors raise ParseError carrying the 1-based line.
Lut3D parse_cube(std::istream& in, const std::string& source_name = "<cube>");
Lut3D load_cube(const std::filesystem::path& path);
void write_cube(std::ostream& out, const Lut3D& lut);
void save_cube(const std::filesystem::path& path, const Lut3D& lut);

struct LutApplyResult {
  PixelFrame frame;
  // Number of pixels whose input fell outside the LUT domain and was clamped.
  std::size_t clamped_pixels = 0;
};

LutApplyResult lut_apply(const PixelFrame& frame, const Lut3D& lut, ColorEncoding output,
                         Exec exec = Exec::parallel);

}  // namespace hdrtv
