#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hdrtv/degradation.hpp"
#include "hdrtv/frame.hpp"
#include "hdrtv/parallel.hpp"

namespace hdrtv {

inline constexpr std::string_view kToolName = "hdrtv";
inline constexpr std::string_view kToolVersion = "0.1.0";

struct PipelineConfig {
  std::uint64_t master_seed = 0;
  int patches_per_frame = 6;
  int patch_size = 600;
  std::array<double, 2> scale_range{0.25, 1.0};
  std::vector<DegradationSpec> dm_set = default_dm_set();
  int store_qf = 75;
  // Re-encode the model's own JPEG at store_qf (two lossy passes). When off,
  // the uncompressed model output is encoded once at store_qf.
  bool double_compress = true;
  // Worker threads for frame-level parallelism; <= 0 uses the OpenMP default.
  // Does not affect any output byte.
  int jobs = 0;

  void validate() const;

  // HC+GM and 2446c+GM, plus the LUT model when a LUT is supplied.
  static std::vector<DegradationSpec> default_dm_set(std::shared_ptr<const Lut3D> lut = nullptr);
};

struct PairRecord {
  std::string id;
  std::string source;
  int frame_index = 0;
  int patch_index = 0;
  double scale = 1.0;
  int scaled_width = 0;
  int scaled_height = 0;
  int crop_x = 0;
  int crop_y = 0;
  DmKind dm = DmKind::hc_gm;
  int dm_qf = 0;
  std::uint64_t seed = 0;
  std::string hdr_path;  // relative to the output directory
  std::string sdr_path;
  std::string hdr_sha256;
  std::string sdr_sha256;
};

struct SkippedFrame {
  std::string source;
  int frame_index = 0;
  std::string reason;
};

struct PairManifest {
  std::vector<PairRecord> pairs;
  std::vector<SkippedFrame> skipped;
};

// Splittable per-patch seed; any argument change yields a different seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t frame_index,
                          std::uint64_t patch_index);

// Stream index reserved for per-frame draws (the resize factor).
inline constexpr std::uint64_t kFrameStream = ~std::uint64_t{0};

// Portable bounded draws (the std distributions are implementation-defined).
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);
double uniform_real(std::mt19937_64& rng, double lo, double hi);

// Random choices for one frame and one patch. Both are pure functions of
// their arguments, so results do not depend on processing order.
double draw_scale(std::uint64_t master_seed, int frame_index, double low, double high);

struct PatchDraw {
  std::uint64_t seed = 0;
  int crop_x = 0;
  int crop_y = 0;
  std::size_t dm_index = 0;
};
PatchDraw draw_patch(std::uint64_t master_seed, int frame_index, int patch_index, int scaled_width,
                     int scaled_height, int patch_size, std::size_t dm_count);

// Box-filter resampling: every output pixel is the coverage-weighted mean of
// the source pixels under its footprint.
PixelFrame resize_area(const PixelFrame& frame, int width, int height, Exec exec = Exec::parallel);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

// Builds out_dir/hdr/NNNNNN.tif, out_dir/sdr/NNNNNN.jpg and
// out_dir/manifest.jsonl from the frames in hdr_dir (sorted by name).
PairManifest prepare(const std::filesystem::path& hdr_dir, const std::filesystem::path& out_dir,
                     const PipelineConfig& config);

}  // namespace hdrtv
