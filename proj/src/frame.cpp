#include "hdrtv/frame.hpp"

#include <algorithm>

#include "hdrtv/error.hpp"

namespace hdrtv {

void ColorEncoding::validate() const {
  if (transfer == Transfer::pq &&
      (primaries != Primaries::bt2020 || nominal_peak != 1000.0))
    throw ContractError("PQ encoding must be BT.2020 with a 1000 nit peak");
  if (transfer == Transfer::gamma_sdr &&
      (primaries != Primaries::bt709 || nominal_peak != 100.0))
    throw ContractError("gamma SDR encoding must be BT.709 with a 100 nit peak");
  if (!(nominal_peak > 0.0)) throw ContractError("nominal peak must be positive");
}

std::string to_string(const ColorEncoding& enc) {
  std::string s = enc.primaries == Primaries::bt2020 ? "BT2020" : "BT709";
  switch (enc.transfer) {
    case Transfer::pq: s += "/PQ"; break;
    case Transfer::gamma_sdr: s += "/GAMMA_SDR"; break;
    case Transfer::linear: s += "/LINEAR"; break;
  }
  return s + "/" + std::to_string(static_cast<int>(enc.nominal_peak)) + "nit";
}

PixelFrame::PixelFrame(int width, int height, ColorEncoding encoding)
    : width_(width), height_(height), encoding_(encoding) {
  if (width < 0 || height < 0) throw ContractError("negative frame dimensions");
  encoding.validate();
  data_.assign(3 * pixel_count(), 0.0f);
}

void PixelFrame::set_encoding(ColorEncoding encoding) {
  encoding.validate();
  encoding_ = encoding;
}

void PixelFrame::fill(const Rgb& v) {
  for (int c = 0; c < 3; ++c) {
    auto p = plane(c);
    std::fill(p.begin(), p.end(), static_cast<float>(v[c]));
  }
}

PixelFrame PixelFrame::crop(int x0, int y0, int w, int h) const {
  if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > width_ || y0 + h > height_)
    throw ContractError("crop rectangle leaves the frame");
  PixelFrame out(w, h, encoding_);
  for (int c = 0; c < 3; ++c) {
    auto src = plane(c);
    auto dst = out.plane(c);
    for (int y = 0; y < h; ++y) {
      auto row = src.subspan(index(x0, y0 + y), w);
      std::copy(row.begin(), row.end(), dst.begin() + static_cast<std::ptrdiff_t>(y) * w);
    }
  }
  return out;
}

void require_transfer(const PixelFrame& frame, Transfer expected, const char* op) {
  if (frame.encoding().transfer != expected)
    throw ContractError(std::string(op) + ": unexpected frame encoding " +
                        to_string(frame.encoding()));
}

void require_same_shape(const PixelFrame& a, const PixelFrame& b, const char* op) {
  if (!a.same_shape(b))
    throw ContractError(std::string(op) + ": frame dimensions differ (" +
                        std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                        std::to_string(b.width()) + "x" + std::to_string(b.height()) + ")");
}

void require_unit_range(const PixelFrame& frame, const char* op) {
  for (int c = 0; c < 3; ++c) {
    auto p = frame.plane(c);
    if (p.empty()) continue;
    auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    if (!(*lo >= 0.0f && *hi <= 1.0f))
      throw DomainError(std::string(op) + ": encoded sample outside [0,1]");
  }
}

}  // namespace hdrtv
