#include "hdrtv/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>

#include <jpeglib.h>
#include <png.h>
#include <tiffio.h>
#include <tiffio.hxx>

#include "hdrtv/error.hpp"

namespace hdrtv {

namespace {

// Raw interleaved decode result shared by all codecs.
struct RawImage {
  int width = 0, height = 0, channels = 0, bits = 0;
  std::vector<std::uint16_t> samples;  // width * height * channels
};

PixelFrame to_frame(const RawImage& raw, ColorEncoding encoding) {
  PixelFrame frame(raw.width, raw.height, encoding);
  const double scale = 1.0 / static_cast<double>((1u << raw.bits) - 1u);
  auto r = frame.plane(0), g = frame.plane(1), b = frame.plane(2);
  const std::size_t n = frame.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint16_t* s = &raw.samples[i * raw.channels];
    if (raw.channels >= 3) {
      r[i] = static_cast<float>(s[0] * scale);
      g[i] = static_cast<float>(s[1] * scale);
      b[i] = static_cast<float>(s[2] * scale);
    } else {
      r[i] = g[i] = b[i] = static_cast<float>(s[0] * scale);
    }
  }
  return frame;
}

std::string lower_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

// ----- JPEG ----------------------------------------------------------------

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silent(j_common_ptr, int) {}

// Only trivially destructible locals live in the setjmp frames below.
bool jpeg_encode_raw(const std::uint8_t* rgb, int width, int height, int quality,
                     unsigned char** out, unsigned long* out_size, char* message) {
  jpeg_compress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    std::strncpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, out, out_size);
  cinfo.image_width = static_cast<JDIMENSION>(width);
  cinfo.image_height = static_cast<JDIMENSION>(height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(rgb + static_cast<std::size_t>(cinfo.next_scanline) * width * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

bool jpeg_decode_raw(const std::uint8_t* data, std::size_t size, RawImage* raw,
                     std::vector<std::uint8_t>* rgb8, char* message) {
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  err.mgr.emit_message = jpeg_silent;
  if (setjmp(err.jump)) {
    std::strncpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, const_cast<unsigned char*>(data), static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_decompress(&cinfo);
  raw->width = static_cast<int>(cinfo.output_width);
  raw->height = static_cast<int>(cinfo.output_height);
  raw->channels = 3;
  raw->bits = 8;
  const std::size_t stride = static_cast<std::size_t>(raw->width) * 3;
  rgb8->resize(stride * raw->height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = rgb8->data() + cinfo.output_scanline * stride;
    if (jpeg_read_scanlines(&cinfo, &row, 1) != 1) break;
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

// ----- PNG -----------------------------------------------------------------

struct PngReader {
  const std::uint8_t* data;
  std::size_t size, pos;
};

void png_read_mem(png_structp png, png_bytep out, png_size_t len) {
  auto* r = static_cast<PngReader*>(png_get_io_ptr(png));
  if (r->pos + len > r->size) png_error(png, "truncated PNG stream");
  std::memcpy(out, r->data + r->pos, len);
  r->pos += len;
}

void png_write_mem(png_structp png, png_bytep in, png_size_t len) {
  auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  v->insert(v->end(), in, in + len);
}

void png_flush_mem(png_structp) {}

struct PngErrorBuf {
  char message[256];
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* e = static_cast<PngErrorBuf*>(png_get_error_ptr(png));
  std::snprintf(e->message, sizeof e->message, "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

bool png_decode_raw(PngReader* reader, RawImage* raw, std::vector<std::uint8_t>* buf,
                    std::vector<png_bytep>* rows, PngErrorBuf* err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, err, png_error_fn, png_warning_fn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, reader, png_read_mem);
  png_read_info(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // native little-endian samples
  png_read_update_info(png, info);
  raw->width = static_cast<int>(png_get_image_width(png, info));
  raw->height = static_cast<int>(png_get_image_height(png, info));
  raw->channels = 3;
  raw->bits = bit_depth == 16 ? 16 : 8;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buf->resize(rowbytes * raw->height);
  rows->resize(raw->height);
  for (int y = 0; y < raw->height; ++y) (*rows)[y] = buf->data() + y * rowbytes;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

// Tightly packed 8- or 16-bit RGB rows into RawImage samples.
void unpack_rgb(const std::vector<std::uint8_t>& buf, std::size_t rowbytes, RawImage* raw) {
  const std::size_t row_samples = static_cast<std::size_t>(raw->width) * 3;
  raw->samples.resize(row_samples * raw->height);
  for (int y = 0; y < raw->height; ++y) {
    const std::uint8_t* src = buf.data() + y * rowbytes;
    std::uint16_t* dst = raw->samples.data() + y * row_samples;
    if (raw->bits == 16)
      std::memcpy(dst, src, row_samples * 2);
    else
      std::copy(src, src + row_samples, dst);
  }
}

bool png_encode_raw(const std::uint8_t* pixels, int width, int height, int bit_depth,
                    std::vector<std::uint8_t>* out, std::vector<png_bytep>* rows, PngErrorBuf* err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err, png_error_fn, png_warning_fn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, png_write_mem, png_flush_mem);
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);
  const std::size_t rowbytes = static_cast<std::size_t>(width) * 3 * (bit_depth / 8);
  rows->resize(height);
  for (int y = 0; y < height; ++y) (*rows)[y] = const_cast<png_bytep>(pixels + y * rowbytes);
  png_write_image(png, rows->data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

// ----- TIFF ----------------------------------------------------------------

thread_local std::string tiff_last_error;

void tiff_error_handler(const char* module, const char* fmt, va_list ap) {
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  tiff_last_error = std::string(module ? module : "tiff") + ": " + buf;
}

void tiff_warning_handler(const char*, const char*, va_list) {}

void install_tiff_handlers() {
  static std::once_flag once;
  std::call_once(once, [] {
    TIFFSetErrorHandler(tiff_error_handler);
    TIFFSetWarningHandler(tiff_warning_handler);
  });
}

RawImage tiff_decode(std::span<const std::uint8_t> bytes, const std::string& name) {
  install_tiff_handlers();
  std::istringstream in(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  tiff_last_error.clear();
  TIFF* tif = TIFFStreamOpen(name.c_str(), &in);
  if (!tif) throw IoError(name + ": cannot decode TIFF " + tiff_last_error);
  struct Closer {
    TIFF* t;
    ~Closer() { TIFFClose(t); }
  } closer{tif};
  std::uint32_t w = 0, h = 0;
  std::uint16_t spp = 1, bps = 8, planar = PLANARCONFIG_CONTIG, fmt = SAMPLEFORMAT_UINT;
  TIFFGetField(tif, TIFFTAG_IMAGEWIDTH, &w);
  TIFFGetField(tif, TIFFTAG_IMAGELENGTH, &h);
  TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLESPERPIXEL, &spp);
  TIFFGetFieldDefaulted(tif, TIFFTAG_BITSPERSAMPLE, &bps);
  TIFFGetFieldDefaulted(tif, TIFFTAG_PLANARCONFIG, &planar);
  TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLEFORMAT, &fmt);
  if ((bps != 8 && bps != 16) || fmt != SAMPLEFORMAT_UINT || (spp != 1 && spp != 3 && spp != 4) ||
      planar != PLANARCONFIG_CONTIG)
    throw IoError(name + ": unsupported TIFF layout (" + std::to_string(spp) + " samples, " +
                  std::to_string(bps) + " bits)");
  RawImage raw;
  raw.width = static_cast<int>(w);
  raw.height = static_cast<int>(h);
  raw.channels = 3;
  raw.bits = bps;
  raw.samples.resize(static_cast<std::size_t>(w) * h * 3);
  std::vector<std::uint8_t> line(TIFFScanlineSize(tif));
  for (std::uint32_t y = 0; y < h; ++y) {
    if (TIFFReadScanline(tif, line.data(), y, 0) < 0)
      throw IoError(name + ": corrupt TIFF scanline " + std::to_string(y) + " " + tiff_last_error);
    for (std::uint32_t x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        const std::size_t src = static_cast<std::size_t>(x) * spp + (spp == 1 ? 0 : c);
        std::uint16_t v;
        if (bps == 16)
          std::memcpy(&v, line.data() + 2 * src, 2);
        else
          v = line[src];
        raw.samples[(static_cast<std::size_t>(y) * w + x) * 3 + c] = v;
      }
  }
  return raw;
}

}  // namespace

std::string to_string(ImageFormat f) {
  switch (f) {
    case ImageFormat::tiff16: return "TIFF16";
    case ImageFormat::png8: return "PNG8";
    case ImageFormat::png16: return "PNG16";
    case ImageFormat::jpeg: return "JPEG";
  }
  return "unknown";
}

std::optional<ImageFormat> format_from_extension(const std::filesystem::path& path) {
  const std::string e = lower_ext(path);
  if (e == ".tif" || e == ".tiff") return ImageFormat::tiff16;
  if (e == ".png") return ImageFormat::png8;
  if (e == ".jpg" || e == ".jpeg") return ImageFormat::jpeg;
  return std::nullopt;
}

ColorEncoding default_encoding_for(const std::filesystem::path& path) {
  const std::string e = lower_ext(path);
  return (e == ".tif" || e == ".tiff") ? ColorEncoding::hdr_pq() : ColorEncoding::sdr_gamma();
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  thread_local std::mt19937_64 salt{std::random_device{}()};
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(salt() & 0xffffff);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw IoError("write failed: " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename into " + path.string() + ": " + ec.message());
  }
}

PixelFrame decode_image(std::span<const std::uint8_t> bytes, ColorEncoding encoding,
                        const std::string& name) {
  encoding.validate();
  if (encoding.is_linear()) throw ContractError("decode_image: files hold encoded values");
  RawImage raw;
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), "\x89PNG", 4) == 0) {
    PngReader reader{bytes.data(), bytes.size(), 0};
    PngErrorBuf err{};
    std::vector<png_bytep> rows;
    std::vector<std::uint8_t> buf;
    if (!png_decode_raw(&reader, &raw, &buf, &rows, &err))
      throw IoError(name + ": cannot decode PNG: " + err.message);
    unpack_rgb(buf, buf.size() / raw.height, &raw);
  } else if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8) {
    char message[JMSG_LENGTH_MAX] = {};
    std::vector<std::uint8_t> rgb8;
    if (!jpeg_decode_raw(bytes.data(), bytes.size(), &raw, &rgb8, message))
      throw IoError(name + ": cannot decode JPEG: " + message);
    unpack_rgb(rgb8, static_cast<std::size_t>(raw.width) * 3, &raw);
  } else if (bytes.size() >= 4 && (std::memcmp(bytes.data(), "II*\0", 4) == 0 ||
                                   std::memcmp(bytes.data(), "MM\0*", 4) == 0)) {
    raw = tiff_decode(bytes, name);
  } else {
    throw IoError(name + ": unsupported image format (expected TIFF, PNG or JPEG)");
  }
  if (raw.width <= 0 || raw.height <= 0) throw IoError(name + ": empty image");
  return to_frame(raw, encoding);
}

PixelFrame decode_image(const std::filesystem::path& path, ColorEncoding encoding) {
  return decode_image(read_file(path), encoding, path.string());
}

std::vector<std::uint8_t> encode_jpeg(const PixelFrame& frame, int quality) {
  if (quality < 1 || quality > 100) throw DomainError("JPEG quality must be in [1,100]");
  if (frame.empty()) throw ContractError("encode_jpeg: empty frame");
  std::vector<std::uint8_t> rgb(frame.pixel_count() * 3);
  for (std::size_t i = 0; i < frame.pixel_count(); ++i) {
    const Rgb p = frame.pixel(i);
    for (int c = 0; c < 3; ++c) rgb[i * 3 + c] = static_cast<std::uint8_t>(quantize_code(p[c], 8));
  }
  unsigned char* out = nullptr;
  unsigned long out_size = 0;
  char message[JMSG_LENGTH_MAX] = {};
  const bool ok = jpeg_encode_raw(rgb.data(), frame.width(), frame.height(), quality, &out, &out_size, message);
  std::vector<std::uint8_t> bytes;
  if (ok) bytes.assign(out, out + out_size);
  std::free(out);
  if (!ok) throw IoError(std::string("JPEG encode failed: ") + message);
  return bytes;
}

std::vector<std::uint8_t> encode_png(const PixelFrame& frame, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw DomainError("PNG bit depth must be 8 or 16");
  if (frame.empty()) throw ContractError("encode_png: empty frame");
  const std::size_t n = frame.pixel_count();
  std::vector<std::uint8_t> pixels(n * 3 * (bit_depth / 8));
  for (std::size_t i = 0; i < n; ++i) {
    const Rgb p = frame.pixel(i);
    for (int c = 0; c < 3; ++c) {
      const std::uint16_t v = quantize_code(p[c], bit_depth);
      if (bit_depth == 8)
        pixels[i * 3 + c] = static_cast<std::uint8_t>(v);
      else
        std::memcpy(&pixels[(i * 3 + c) * 2], &v, 2);
    }
  }
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows;
  PngErrorBuf err{};
  if (!png_encode_raw(pixels.data(), frame.width(), frame.height(), bit_depth, &out, &rows, &err))
    throw IoError(std::string("PNG encode failed: ") + err.message);
  return out;
}

std::vector<std::uint8_t> encode_tiff16(const PixelFrame& frame) {
  if (frame.empty()) throw ContractError("encode_tiff16: empty frame");
  install_tiff_handlers();
  std::ostringstream os;
  {
    tiff_last_error.clear();
    TIFF* tif = TIFFStreamOpen("memory", &os);
    if (!tif) throw IoError("TIFF encode failed: " + tiff_last_error);
    struct Closer {
      TIFF* t;
      ~Closer() { TIFFClose(t); }
    } closer{tif};
    const auto w = static_cast<std::uint32_t>(frame.width());
    const auto h = static_cast<std::uint32_t>(frame.height());
    TIFFSetField(tif, TIFFTAG_IMAGEWIDTH, w);
    TIFFSetField(tif, TIFFTAG_IMAGELENGTH, h);
    TIFFSetField(tif, TIFFTAG_SAMPLESPERPIXEL, 3);
    TIFFSetField(tif, TIFFTAG_BITSPERSAMPLE, 16);
    TIFFSetField(tif, TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_RGB);
    TIFFSetField(tif, TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(tif, TIFFTAG_SAMPLEFORMAT, SAMPLEFORMAT_UINT);
    TIFFSetField(tif, TIFFTAG_COMPRESSION, COMPRESSION_ADOBE_DEFLATE);
    TIFFSetField(tif, TIFFTAG_PREDICTOR, PREDICTOR_HORIZONTAL);
    TIFFSetField(tif, TIFFTAG_ROWSPERSTRIP, TIFFDefaultStripSize(tif, 0));
    std::vector<std::uint16_t> line(static_cast<std::size_t>(w) * 3);
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t x = 0; x < w; ++x) {
        const Rgb p = frame.pixel(static_cast<int>(x), static_cast<int>(y));
        for (int c = 0; c < 3; ++c) line[x * 3 + c] = quantize_code(p[c], 16);
      }
      if (TIFFWriteScanline(tif, line.data(), y, 0) < 0)
        throw IoError("TIFF encode failed: " + tiff_last_error);
    }
  }
  const std::string s = os.str();
  return {s.begin(), s.end()};
}

std::vector<std::uint8_t> encode_image(const PixelFrame& frame, ImageFormat format, int jpeg_quality) {
  require_unit_range(frame, "encode_image");
  switch (format) {
    case ImageFormat::tiff16: return encode_tiff16(frame);
    case ImageFormat::png8: return encode_png(frame, 8);
    case ImageFormat::png16: return encode_png(frame, 16);
    case ImageFormat::jpeg: return encode_jpeg(frame, jpeg_quality);
  }
  throw ContractError("unsupported image format");
}

void encode_image(const PixelFrame& frame, const std::filesystem::path& path, ImageFormat format,
                  int jpeg_quality) {
  const auto bytes = encode_image(frame, format, jpeg_quality);
  write_file_atomic(path, bytes);
}

PixelFrame quantize(const PixelFrame& frame, int bits) {
  PixelFrame out = frame;
  const double max = static_cast<double>((1u << bits) - 1u);
  for (int c = 0; c < 3; ++c)
    for (float& v : out.plane(c)) v = static_cast<float>(quantize_code(v, bits) / max);
  return out;
}

}  // namespace hdrtv
