#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdrtv/frame.hpp"

namespace hdrtv {

enum class ImageFormat { tiff16, png8, png16, jpeg };

std::string to_string(ImageFormat f);
// .tif/.tiff -> tiff16, .png -> png8, .jpg/.jpeg -> jpeg.
std::optional<ImageFormat> format_from_extension(const std::filesystem::path& path);
// .tif/.tiff files are taken as PQ HDR, everything else as gamma SDR.
ColorEncoding default_encoding_for(const std::filesystem::path& path);

// Integer codes map to [0,1] by code / (2^bits - 1). `encoding` is attached
// as given; file metadata is not consulted.
PixelFrame decode_image(const std::filesystem::path& path, ColorEncoding encoding);
PixelFrame decode_image(std::span<const std::uint8_t> bytes, ColorEncoding encoding,
                        const std::string& name = "<memory>");

std::vector<std::uint8_t> encode_image(const PixelFrame& frame, ImageFormat format,
                                       int jpeg_quality = 95);
// Writes to a sibling temp file and renames into place.
void encode_image(const PixelFrame& frame, const std::filesystem::path& path, ImageFormat format,
                  int jpeg_quality = 95);

std::vector<std::uint8_t> encode_jpeg(const PixelFrame& frame, int quality);
std::vector<std::uint8_t> encode_png(const PixelFrame& frame, int bit_depth);
std::vector<std::uint8_t> encode_tiff16(const PixelFrame& frame);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Round to the nearest integer code of the given depth.
inline std::uint16_t quantize_code(double v, int bits) {
  const double max = static_cast<double>((1u << bits) - 1u);
  const double c = v <= 0.0 ? 0.0 : (v >= 1.0 ? 1.0 : v);
  return static_cast<std::uint16_t>(c * max + 0.5);
}

// Snap every sample to the nearest code of the given depth.
PixelFrame quantize(const PixelFrame& frame, int bits);

}  // namespace hdrtv
