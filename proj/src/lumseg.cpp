#include "hdrtv/lumseg.hpp"

#include <algorithm>

#include "hdrtv/error.hpp"

namespace hdrtv {

SegMaskPair segment(const PixelFrame& sdr, double t, Exec exec) {
  if (!(t > 0.0 && t < 0.5)) throw DomainError("segment: threshold must lie in (0, 0.5)");
  if (sdr.encoding().is_linear()) throw ContractError("segment: expected an encoded SDR frame");
  require_unit_range(sdr, "segment");
  SegMaskPair out{PixelFrame(sdr.width(), sdr.height(), sdr.encoding()),
                  PixelFrame(sdr.width(), sdr.height(), sdr.encoding()), t};
  for (int c = 0; c < 3; ++c) {
    auto src = sdr.plane(c);
    auto lo = out.low.plane(c);
    auto hi = out.high.plane(c);
    for_each_index(src.size(), exec, [&](std::size_t i) {
      lo[i] = static_cast<float>(segment_low(src[i], t));
      hi[i] = static_cast<float>(segment_high(src[i], t));
    });
  }
  return out;
}

}  // namespace hdrtv
