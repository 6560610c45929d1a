#include "hdrtv/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include <openssl/evp.h>

#include "hdrtv/error.hpp"
#include "hdrtv/image_io.hpp"
#include "hdrtv/log.hpp"
#include "json.hpp"

namespace hdrtv {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct Tap {
  std::size_t src;
  double weight;
};

// For each output index, the source indices and coverage weights (sum 1).
std::vector<std::vector<Tap>> box_taps(int src_len, int dst_len) {
  std::vector<std::vector<Tap>> taps(dst_len);
  const double ratio = static_cast<double>(src_len) / dst_len;
  for (int o = 0; o < dst_len; ++o) {
    const double lo = o * ratio, hi = (o + 1) * ratio;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(src_len - 1, static_cast<int>(std::ceil(hi)) - 1);
    double total = 0.0;
    for (int s = first; s <= last; ++s) {
      const double cover = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      if (cover > 0.0) {
        taps[o].push_back({static_cast<std::size_t>(s), cover});
        total += cover;
      }
    }
    for (auto& t : taps[o]) t.weight /= total;
  }
  return taps;
}

std::string zero_pad(std::size_t v, int width) {
  std::string s = std::to_string(v);
  return std::string(std::max(0, width - static_cast<int>(s.size())), '0') + s;
}

nlohmann::json config_json(const PipelineConfig& c) {
  nlohmann::json dms = nlohmann::json::array();
  for (const auto& d : c.dm_set) {
    nlohmann::json j{{"kind", std::string(to_string(d.kind))}, {"jpeg_qf", d.jpeg_qf}};
    if (d.lut) {
      j["lut_size"] = d.lut->size();
      j["lut_title"] = d.lut->title;
      j["lut_interpolation"] =
          d.lut->interpolation() == LutInterpolation::trilinear ? "trilinear" : "tetrahedral";
    }
    dms.push_back(std::move(j));
  }
  return {{"master_seed", c.master_seed},
          {"patches_per_frame", c.patches_per_frame},
          {"patch_size", c.patch_size},
          {"scale_range", {c.scale_range[0], c.scale_range[1]}},
          {"dm_set", std::move(dms)},
          {"store_qf", c.store_qf},
          {"double_compress", c.double_compress}};
}

struct StagedPatch {
  PairRecord record;  // id and final paths are assigned later
  fs::path hdr_stage, sdr_stage;
};

struct FrameOutcome {
  std::vector<StagedPatch> patches;
  std::optional<std::string> skip_reason;
  std::optional<std::string> fatal;
};

bool is_frame_file(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ".tif" || e == ".tiff" || e == ".png";
}

FrameOutcome process_frame(const fs::path& path, int frame_index, const PipelineConfig& cfg,
                           const fs::path& staging) {
  FrameOutcome out;
  PixelFrame frame;
  try {
    frame = decode_image(path, ColorEncoding::hdr_pq());
  } catch (const std::exception& e) {
    out.skip_reason = e.what();
    return out;
  }
  const std::string source = path.filename().generic_string();
  const int w = frame.width(), h = frame.height();
  const int p = cfg.patch_size;
  // Smallest factor that still leaves room for one patch.
  const double fit = static_cast<double>(p) / std::min(w, h);
  if (fit > cfg.scale_range[1]) {
    out.skip_reason = "frame " + std::to_string(w) + "x" + std::to_string(h) +
                      " is smaller than the patch size at the largest scale";
    return out;
  }
  double lo = cfg.scale_range[0];
  if (fit > lo) {
    log_info(source + ": raising scale lower bound from " + std::to_string(lo) + " to " +
             std::to_string(fit) + " to fit " + std::to_string(p) + "px patches");
    lo = fit;
  }
  const double scale = draw_scale(cfg.master_seed, frame_index, lo, cfg.scale_range[1]);
  const int sw = std::clamp(static_cast<int>(std::lround(w * scale)), p, w);
  const int sh = std::clamp(static_cast<int>(std::lround(h * scale)), p, h);
  const PixelFrame scaled = (sw == w && sh == h) ? frame : resize_area(frame, sw, sh, Exec::serial);

  try {
    for (int j = 0; j < cfg.patches_per_frame; ++j) {
      const PatchDraw draw = draw_patch(cfg.master_seed, frame_index, j, sw, sh, p, cfg.dm_set.size());
      const int cx = draw.crop_x, cy = draw.crop_y;
      const std::uint64_t seed = draw.seed;
      DegradationSpec spec = cfg.dm_set[draw.dm_index];
      spec.seed = seed;

      // The label is what gets stored; the SDR input is degraded from exactly it.
      const PixelFrame label = quantize(scaled.crop(cx, cy, p, p), 16);
      const auto hdr_bytes = encode_tiff16(label);
      std::vector<std::uint8_t> sdr_bytes;
      if (cfg.double_compress) {
        const DegradedImage d = degrade(label, spec, Exec::serial);
        sdr_bytes = encode_jpeg(d.frame, cfg.store_qf);
      } else {
        sdr_bytes = encode_jpeg(degrade_encoded(label, spec, Exec::serial), cfg.store_qf);
      }

      StagedPatch sp;
      const std::string stem = "f" + std::to_string(frame_index) + "_p" + std::to_string(j);
      sp.hdr_stage = staging / (stem + ".tif");
      sp.sdr_stage = staging / (stem + ".jpg");
      write_file_atomic(sp.hdr_stage, hdr_bytes);
      write_file_atomic(sp.sdr_stage, sdr_bytes);
      auto& r = sp.record;
      r.source = source;
      r.frame_index = frame_index;
      r.patch_index = j;
      r.scale = scale;
      r.scaled_width = sw;
      r.scaled_height = sh;
      r.crop_x = cx;
      r.crop_y = cy;
      r.dm = spec.kind;
      r.dm_qf = spec.jpeg_qf;
      r.seed = seed;
      r.hdr_sha256 = sha256_hex(hdr_bytes);
      r.sdr_sha256 = sha256_hex(sdr_bytes);
      out.patches.push_back(std::move(sp));
    }
  } catch (const std::exception& e) {
    out.fatal = source + ": " + e.what();
  }
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (patches_per_frame < 1) throw DomainError("patches_per_frame must be positive");
  if (patch_size < 1) throw DomainError("patch_size must be positive");
  if (!(scale_range[0] > 0.0 && scale_range[0] <= scale_range[1] && scale_range[1] <= 1.0))
    throw DomainError("scale_range must satisfy 0 < low <= high <= 1");
  if (dm_set.empty()) throw DomainError("dm_set must not be empty");
  for (const auto& d : dm_set) d.validate();
  if (store_qf < 1 || store_qf > 100) throw DomainError("store_qf must be in [1,100]");
}

std::vector<DegradationSpec> PipelineConfig::default_dm_set(std::shared_ptr<const Lut3D> lut) {
  std::vector<DegradationSpec> set{{DmKind::hc_gm, kDmJpegQuality, nullptr, 0},
                                   {DmKind::tm2446c_gm, kDmJpegQuality, nullptr, 0}};
  if (lut) set.insert(set.begin(), DegradationSpec{DmKind::lut3d, kDmJpegQuality, std::move(lut), 0});
  return set;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t frame_index,
                          std::uint64_t patch_index) {
  std::uint64_t h = splitmix(master_seed);
  h = splitmix(h ^ splitmix(frame_index + 0x6a09e667f3bcc909ull));
  h = splitmix(h ^ splitmix(patch_index + 0xbb67ae8584caa73bull));
  return h;
}

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw DomainError("uniform_index: empty range");
  // Reject the top partial bucket so every index is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do v = rng();
  while (v >= limit);
  return v % n;
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

double draw_scale(std::uint64_t master_seed, int frame_index, double low, double high) {
  std::mt19937_64 rng(derive_seed(master_seed, static_cast<std::uint64_t>(frame_index), kFrameStream));
  return uniform_real(rng, low, high);
}

PatchDraw draw_patch(std::uint64_t master_seed, int frame_index, int patch_index, int scaled_width,
                     int scaled_height, int patch_size, std::size_t dm_count) {
  if (patch_size > scaled_width || patch_size > scaled_height)
    throw DomainError("draw_patch: patch larger than the scaled frame");
  PatchDraw d;
  d.seed = derive_seed(master_seed, static_cast<std::uint64_t>(frame_index),
                       static_cast<std::uint64_t>(patch_index));
  std::mt19937_64 rng(d.seed);
  d.crop_x = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(scaled_width - patch_size) + 1));
  d.crop_y = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(scaled_height - patch_size) + 1));
  d.dm_index = static_cast<std::size_t>(uniform_index(rng, dm_count));
  return d;
}

PixelFrame resize_area(const PixelFrame& frame, int width, int height, Exec exec) {
  if (width < 1 || height < 1) throw DomainError("resize_area: target must be non-empty");
  if (frame.empty()) throw ContractError("resize_area: empty frame");
  const auto tx = box_taps(frame.width(), width);
  const auto ty = box_taps(frame.height(), height);
  PixelFrame out(width, height, frame.encoding());
  const std::size_t sw = static_cast<std::size_t>(frame.width());
  for (int c = 0; c < 3; ++c) {
    auto src = frame.plane(c);
    auto dst = out.plane(c);
    for_each_row(height, exec, [&](int y) {
      std::vector<double> row(sw, 0.0);
      for (const Tap& t : ty[y])
        for (std::size_t x = 0; x < sw; ++x) row[x] += t.weight * src[t.src * sw + x];
      for (int x = 0; x < width; ++x) {
        double v = 0.0;
        for (const Tap& t : tx[x]) v += t.weight * row[t.src];
        dst[static_cast<std::size_t>(y) * width + x] = static_cast<float>(v);
      }
    });
  }
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

PairManifest prepare(const fs::path& hdr_dir, const fs::path& out_dir, const PipelineConfig& cfg) {
  cfg.validate();
  if (!fs::is_directory(hdr_dir)) throw IoError("input directory not found: " + hdr_dir.string());
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(hdr_dir))
    if (e.is_regular_file() && is_frame_file(e.path())) inputs.push_back(e.path());
  std::sort(inputs.begin(), inputs.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  if (inputs.empty()) throw IoError("no .tif/.png frames in " + hdr_dir.string());

  const fs::path staging = out_dir / ".staging";
  fs::remove_all(staging);
  fs::create_directories(staging);

  const int n = static_cast<int>(inputs.size());
  std::vector<FrameOutcome> outcomes(n);
  const int threads = cfg.jobs > 0 ? cfg.jobs : max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int i = 0; i < n; ++i) outcomes[i] = process_frame(inputs[i], i, cfg, staging);

  for (const auto& o : outcomes)
    if (o.fatal) {
      fs::remove_all(staging);
      throw IoError(*o.fatal);
    }

  fs::create_directories(out_dir / "hdr");
  fs::create_directories(out_dir / "sdr");

  // Serialized sink: sequential ids in frame order.
  PairManifest manifest;
  std::string lines = nlohmann::json{{"type", "header"},
                                     {"tool", kToolName},
                                     {"version", kToolVersion},
                                     {"input_frames", n},
                                     {"config", config_json(cfg)}}
                          .dump() +
                      "\n";
  std::size_t next_id = 0;
  for (int i = 0; i < n; ++i) {
    auto& o = outcomes[i];
    if (o.skip_reason) {
      log_error(inputs[i].filename().string() + ": skipped: " + *o.skip_reason);
      SkippedFrame s{inputs[i].filename().generic_string(), i, *o.skip_reason};
      lines += nlohmann::json{{"type", "skipped"},
                              {"source", s.source},
                              {"frame_index", s.frame_index},
                              {"reason", s.reason}}
                   .dump() +
               "\n";
      manifest.skipped.push_back(std::move(s));
      continue;
    }
    for (auto& sp : o.patches) {
      auto& r = sp.record;
      r.id = zero_pad(next_id++, 6);
      r.hdr_path = "hdr/" + r.id + ".tif";
      r.sdr_path = "sdr/" + r.id + ".jpg";
      fs::rename(sp.hdr_stage, out_dir / r.hdr_path);
      fs::rename(sp.sdr_stage, out_dir / r.sdr_path);
      lines += nlohmann::json{{"type", "pair"},
                              {"id", r.id},
                              {"source", r.source},
                              {"frame_index", r.frame_index},
                              {"patch_index", r.patch_index},
                              {"scale", r.scale},
                              {"scaled_width", r.scaled_width},
                              {"scaled_height", r.scaled_height},
                              {"crop_x", r.crop_x},
                              {"crop_y", r.crop_y},
                              {"dm", std::string(to_string(r.dm))},
                              {"dm_qf", r.dm_qf},
                              {"store_qf", cfg.store_qf},
                              {"seed", r.seed},
                              {"hdr_path", r.hdr_path},
                              {"sdr_path", r.sdr_path},
                              {"hdr_sha256", r.hdr_sha256},
                              {"sdr_sha256", r.sdr_sha256}}
                   .dump() +
               "\n";
      manifest.pairs.push_back(std::move(r));
    }
  }
  fs::remove_all(staging);
  write_file_atomic(out_dir / "manifest.jsonl",
                    std::span(reinterpret_cast<const std::uint8_t*>(lines.data()), lines.size()));
  log_info("prepared " + std::to_string(manifest.pairs.size()) + " pairs from " +
           std::to_string(n - static_cast<int>(manifest.skipped.size())) + " frames into " +
           out_dir.string());
  return manifest;
}

}  // namespace hdrtv
