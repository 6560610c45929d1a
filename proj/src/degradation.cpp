#include "hdrtv/degradation.hpp"

#include <algorithm>
#include <cmath>

#include "hdrtv/error.hpp"
#include "hdrtv/image_io.hpp"

namespace hdrtv {

namespace {

constexpr double kHdrPeak = 1000.0;
constexpr double kSdrPeak = 100.0;

Rgb pq_linear(const Rgb& code) {
  return {pq::to_nits(code[0]) / kHdrPeak, pq::to_nits(code[1]) / kHdrPeak,
          pq::to_nits(code[2]) / kHdrPeak};
}

// Replace the luminance of a linear BT.2020 pixel, keeping its xy.
Rgb recompose_luminance(const Rgb& linear2020, double (*map)(double, const void*), const void* ctx) {
  const Xyz xyz = rgb_to_xyz_matrix(Primaries::bt2020) * linear2020;
  const double y_out = map(xyz[1], ctx);
  const Xyz out = xy_to_xyz(xyz_to_xy(xyz), y_out);
  return xyz_to_rgb_matrix(Primaries::bt2020) * out;
}

Rgb sdr_encode(const Rgb& linear709) {
  return {std::pow(linear709[0], 1.0 / kSdrGamma), std::pow(linear709[1], 1.0 / kSdrGamma),
          std::pow(linear709[2], 1.0 / kSdrGamma)};
}

void require_hdr_input(const PixelFrame& hdr, const char* op) {
  require_transfer(hdr, Transfer::pq, op);
  require_unit_range(hdr, op);
}

template <class PixelFn>
PixelFrame map_to_sdr(const PixelFrame& hdr, Exec exec, PixelFn&& fn) {
  PixelFrame out(hdr.width(), hdr.height(), ColorEncoding::sdr_gamma());
  for_each_index(hdr.pixel_count(), exec,
                 [&](std::size_t i) { out.set_pixel(i, sdr_encode(fn(hdr.pixel(i)))); });
  return out;
}

}  // namespace

std::string_view to_string(DmKind kind) {
  switch (kind) {
    case DmKind::hc_gm: return "hc_gm";
    case DmKind::tm2446c_gm: return "2446c_gm";
    case DmKind::lut3d: return "lut";
    case DmKind::reinhard_gm: return "reinhard_gm";
  }
  return "unknown";
}

std::optional<DmKind> parse_dm_kind(std::string_view name) {
  for (DmKind k : {DmKind::hc_gm, DmKind::tm2446c_gm, DmKind::lut3d, DmKind::reinhard_gm})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

void DegradationSpec::validate() const {
  if (jpeg_qf < 1 || jpeg_qf > 100) throw DomainError("JPEG quality factor must be in [1,100]");
  if (kind == DmKind::lut3d && !lut) throw ContractError("LUT degradation requires a LUT");
}

double ToneCurve2446C::unclipped(double nits) const {
  if (!(nits >= 0.0)) throw DomainError("tm_2446c: negative luminance");
  if (nits < y_ip) return k1 * nits;
  return k2 * std::log(nits / y_ip - k3) + k4;
}

double ToneCurve2446C::operator()(double nits) const {
  return std::clamp(unclipped(nits), 0.0, out_clip);
}

double tm_2446c(double nits) { return ToneCurve2446C{}(nits); }

Rgb hc_gm_linear(const Rgb& pq_code) {
  return gamut_map_hard(hard_clip_luminance(pq_linear(pq_code)));
}

Rgb tm2446c_gm_linear(const Rgb& pq_code, const ToneCurve2446C& curve) {
  auto map = [](double y, const void* c) {
    return static_cast<const ToneCurve2446C*>(c)->operator()(y * kHdrPeak) / kSdrPeak;
  };
  return gamut_map_hard(recompose_luminance(pq_linear(pq_code), map, &curve));
}

Rgb reinhard_gm_linear(const Rgb& pq_code) {
  // Y / (1 + Y), scaled by 2 so a 1000 nit input lands on the SDR peak.
  auto map = [](double y, const void*) { return 2.0 * y / (1.0 + y); };
  return gamut_map_hard(recompose_luminance(pq_linear(pq_code), map, nullptr));
}

PixelFrame gamut_clip(const PixelFrame& linear709, Exec exec) {
  require_transfer(linear709, Transfer::linear, "gamut_clip");
  if (linear709.encoding().primaries != Primaries::bt709)
    throw ContractError("gamut_clip: input primaries must be BT.709");
  PixelFrame out(linear709.width(), linear709.height(), linear709.encoding());
  for_each_index(linear709.pixel_count(), exec,
                 [&](std::size_t i) { out.set_pixel(i, gamut_clip(linear709.pixel(i))); });
  return out;
}

PixelFrame gamut_map_hard(const PixelFrame& linear2020, Exec exec) {
  require_transfer(linear2020, Transfer::linear, "gamut_map_hard");
  if (linear2020.encoding().primaries != Primaries::bt2020)
    throw ContractError("gamut_map_hard: input primaries must be BT.2020");
  PixelFrame out(linear2020.width(), linear2020.height(),
                 ColorEncoding::linear(Primaries::bt709, linear2020.encoding().nominal_peak));
  for_each_index(linear2020.pixel_count(), exec,
                 [&](std::size_t i) { out.set_pixel(i, gamut_map_hard(linear2020.pixel(i))); });
  return out;
}

PixelFrame degrade_encoded(const PixelFrame& hdr, const DegradationSpec& spec, Exec exec) {
  spec.validate();
  require_hdr_input(hdr, to_string(spec.kind).data());
  switch (spec.kind) {
    case DmKind::hc_gm:
      return map_to_sdr(hdr, exec, [](const Rgb& c) { return hc_gm_linear(c); });
    case DmKind::tm2446c_gm: {
      const ToneCurve2446C curve;
      return map_to_sdr(hdr, exec, [&](const Rgb& c) { return tm2446c_gm_linear(c, curve); });
    }
    case DmKind::reinhard_gm:
      return map_to_sdr(hdr, exec, [](const Rgb& c) { return reinhard_gm_linear(c); });
    case DmKind::lut3d:
      return lut_apply(hdr, *spec.lut, ColorEncoding::sdr_gamma(), exec).frame;
  }
  throw ContractError("unknown degradation kind");
}

DegradedImage degrade(const PixelFrame& hdr, const DegradationSpec& spec, Exec exec) {
  spec.validate();
  require_hdr_input(hdr, to_string(spec.kind).data());
  DegradedImage out;
  PixelFrame sdr;
  if (spec.kind == DmKind::lut3d) {
    auto applied = lut_apply(hdr, *spec.lut, ColorEncoding::sdr_gamma(), exec);
    out.lut_clamped_pixels = applied.clamped_pixels;
    sdr = std::move(applied.frame);
  } else {
    sdr = degrade_encoded(hdr, spec, exec);
  }
  out.jpeg = encode_jpeg(sdr, spec.jpeg_qf);
  out.frame = decode_image(out.jpeg, ColorEncoding::sdr_gamma(), "degraded");
  return out;
}

PixelFrame dm_hc_gm(const PixelFrame& hdr, int qf, Exec exec) {
  return degrade(hdr, {DmKind::hc_gm, qf, nullptr, 0}, exec).frame;
}

PixelFrame dm_2446c_gm(const PixelFrame& hdr, int qf, Exec exec) {
  return degrade(hdr, {DmKind::tm2446c_gm, qf, nullptr, 0}, exec).frame;
}

PixelFrame dm_reinhard(const PixelFrame& hdr, int qf, Exec exec) {
  return degrade(hdr, {DmKind::reinhard_gm, qf, nullptr, 0}, exec).frame;
}

PixelFrame jpeg_roundtrip(const PixelFrame& sdr, int qf) {
  if (qf < 1 || qf > 100) throw DomainError("JPEG quality factor must be in [1,100]");
  require_unit_range(sdr, "jpeg_roundtrip");
  return decode_image(encode_jpeg(sdr, qf), sdr.encoding(), "roundtrip");
}

}  // namespace hdrtv
