#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hdrtv {

using Rgb = std::array<double, 3>;

enum class Primaries { bt2020, bt709 };
enum class Transfer { pq, gamma_sdr, linear };

struct ColorEncoding {
  Primaries primaries = Primaries::bt2020;
  Transfer transfer = Transfer::pq;
  // Luminance in nits that a normalized value of 1.0 represents.
  double nominal_peak = 1000.0;

  static constexpr ColorEncoding hdr_pq() { return {Primaries::bt2020, Transfer::pq, 1000.0}; }
  static constexpr ColorEncoding sdr_gamma() {
    return {Primaries::bt709, Transfer::gamma_sdr, 100.0};
  }
  static constexpr ColorEncoding linear(Primaries p, double peak) {
    return {p, Transfer::linear, peak};
  }

  bool is_linear() const { return transfer == Transfer::linear; }
  bool is_hdr_pq() const { return transfer == Transfer::pq; }
  bool is_sdr_gamma() const { return transfer == Transfer::gamma_sdr; }

  // Throws ContractError when the tag combination is not one this library supports.
  void validate() const;

  friend bool operator==(const ColorEncoding&, const ColorEncoding&) = default;
};

std::string to_string(const ColorEncoding& enc);

// Planar three-channel image. Samples are stored single precision; all
// arithmetic on them is done in double.
class PixelFrame {
 public:
  PixelFrame() = default;
  PixelFrame(int width, int height, ColorEncoding encoding);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return pixel_count() == 0; }
  const ColorEncoding& encoding() const { return encoding_; }

  // Retag without touching samples.
  void set_encoding(ColorEncoding encoding);

  std::span<float> plane(int c) {
    return {data_.data() + c * pixel_count(), pixel_count()};
  }
  std::span<const float> plane(int c) const {
    return {data_.data() + c * pixel_count(), pixel_count()};
  }

  Rgb pixel(std::size_t i) const {
    const std::size_t n = pixel_count();
    return {data_[i], data_[n + i], data_[2 * n + i]};
  }
  Rgb pixel(int x, int y) const { return pixel(index(x, y)); }

  void set_pixel(std::size_t i, const Rgb& v) {
    const std::size_t n = pixel_count();
    data_[i] = static_cast<float>(v[0]);
    data_[n + i] = static_cast<float>(v[1]);
    data_[2 * n + i] = static_cast<float>(v[2]);
  }
  void set_pixel(int x, int y, const Rgb& v) { set_pixel(index(x, y), v); }

  void fill(const Rgb& v);

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  bool same_shape(const PixelFrame& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  // Sub-rectangle copy; throws ContractError if it leaves the frame.
  PixelFrame crop(int x0, int y0, int w, int h) const;

  friend bool operator==(const PixelFrame&, const PixelFrame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  ColorEncoding encoding_{};
  std::vector<float> data_;
};

// Throws ContractError unless `frame` carries the expected transfer.
void require_transfer(const PixelFrame& frame, Transfer expected, const char* op);
void require_same_shape(const PixelFrame& a, const PixelFrame& b, const char* op);
// Throws DomainError if any sample lies outside [0,1] (encoded frames).
void require_unit_range(const PixelFrame& frame, const char* op);

}  // namespace hdrtv
