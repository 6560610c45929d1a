#include <algorithm>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hdrtv/degradation.hpp"
#include "hdrtv/error.hpp"
#include "hdrtv/image_io.hpp"
#include "hdrtv/log.hpp"
#include "hdrtv/lumseg.hpp"
#include "hdrtv/lut3d.hpp"
#include "hdrtv/metrics.hpp"
#include "hdrtv/pipeline.hpp"
#include "hdrtv/report.hpp"

namespace fs = std::filesystem;
using namespace hdrtv;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AssumeFlags {
  bool hdr = false;
  bool sdr = false;

  void add_to(CLI::App* app) {
    auto* h = app->add_flag("--assume-hdr", hdr, "Treat inputs as PQ BT.2020 (1000 nit)");
    auto* s = app->add_flag("--assume-sdr", sdr, "Treat inputs as gamma 2.22 BT.709 (100 nit)");
    h->excludes(s);
  }
  ColorEncoding resolve(const fs::path& path) const {
    if (hdr) return ColorEncoding::hdr_pq();
    if (sdr) return ColorEncoding::sdr_gamma();
    return default_encoding_for(path);
  }
  ColorEncoding resolve(ColorEncoding fallback) const {
    if (hdr) return ColorEncoding::hdr_pq();
    if (sdr) return ColorEncoding::sdr_gamma();
    return fallback;
  }
};

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

// Output format chosen from the extension; PNG outputs are 16-bit.
ImageFormat output_format(const fs::path& p) {
  const std::string e = lower_ext(p);
  if (e == ".tif" || e == ".tiff") return ImageFormat::tiff16;
  if (e == ".png") return ImageFormat::png16;
  if (e == ".jpg" || e == ".jpeg") return ImageFormat::jpeg;
  throw UsageError("unsupported output format '" + e + "' for " + p.string());
}

PixelFrame load(const fs::path& path, ColorEncoding enc) {
  if (!fs::exists(path)) throw IoError("no such file: " + path.string());
  return decode_image(path, enc);
}

std::shared_ptr<const Lut3D> load_lut(const std::string& path, const std::string& interp) {
  auto lut = load_cube(path);
  lut.set_interpolation(interp == "trilinear" ? LutInterpolation::trilinear
                                              : LutInterpolation::tetrahedral);
  return std::make_shared<const Lut3D>(std::move(lut));
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path,
                    std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string x = lower_ext(e.path());
    if (x == ".tif" || x == ".tiff" || x == ".png" || x == ".jpg" || x == ".jpeg")
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ----- degrade ---------------------------------------------------------------

struct DegradeArgs {
  std::string in, out, dm = "hc_gm", lut, interp = "tetrahedral";
  int qf = kDmJpegQuality;
  bool lossless = false;
  AssumeFlags assume;
};

int run_degrade(const DegradeArgs& a) {
  const auto kind = parse_dm_kind(a.dm);
  if (!kind) throw UsageError("unknown --dm '" + a.dm + "'");
  if (*kind == DmKind::lut3d && a.lut.empty()) throw UsageError("--dm lut requires --lut PATH");
  const ImageFormat fmt = output_format(a.out);
  if (a.lossless && fmt != ImageFormat::png16)
    throw UsageError("--lossless writes PNG; output must end in .png");
  if (!a.lossless && fmt != ImageFormat::jpeg)
    throw UsageError("output must end in .jpg (or pass --lossless with .png)");

  DegradationSpec spec{*kind, a.qf, nullptr, 0};
  if (*kind == DmKind::lut3d) spec.lut = load_lut(a.lut, a.interp);
  spec.validate();

  const PixelFrame hdr = load(a.in, a.assume.resolve(ColorEncoding::hdr_pq()));
  std::string params = "degrade: dm=" + std::string(to_string(spec.kind));
  if (spec.lut)
    params += " lut=" + a.lut + " size=" + std::to_string(spec.lut->size()) + " interp=" + a.interp;
  if (a.lossless) {
    log_info(params + " output=png16 (no JPEG stage)");
    encode_image(degrade_encoded(hdr, spec), fs::path(a.out), ImageFormat::png16);
  } else {
    log_info(params + " qf=" + std::to_string(spec.jpeg_qf));
    const DegradedImage d = degrade(hdr, spec);
    if (d.lut_clamped_pixels)
      log_warn(std::to_string(d.lut_clamped_pixels) + " pixels fell outside the LUT domain");
    write_file_atomic(a.out, d.jpeg);
  }
  return 0;
}

// ----- metrics ---------------------------------------------------------------

struct MetricsArgs {
  std::string in_dir, out_csv, json, mode = "hdr";
  int jobs = 0;
};

int run_metrics(const MetricsArgs& a) {
  const ColorEncoding enc = a.mode == "hdr" ? ColorEncoding::hdr_pq() : ColorEncoding::sdr_gamma();
  const auto files = list_frames(a.in_dir);
  if (files.empty()) throw IoError("no image frames in " + a.in_dir);
  const int n = static_cast<int>(files.size());
  std::vector<MetricRow> rows(n);
  std::vector<std::string> errors(n);
  const Exec inner = n == 1 ? Exec::parallel : Exec::serial;
  const int threads = a.jobs > 0 ? a.jobs : max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (n > 1)
  for (int i = 0; i < n; ++i) {
    try {
      rows[i].path = fs::relative(files[i], a.in_dir).generic_string();
      rows[i].values = metrics::evaluate(decode_image(files[i], enc), inner);
    } catch (const std::exception& e) {
      errors[i] = files[i].string() + ": " + e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw IoError(e);
  const std::string csv = metrics_csv(rows);
  const std::string json = a.json.empty() ? std::string() : metrics_json(rows, a.mode);
  write_text_atomic(a.out_csv, csv);
  if (!a.json.empty()) write_text_atomic(a.json, json);
  log_info("metrics: " + std::to_string(n) + " frames -> " + a.out_csv);
  return 0;
}

// ----- prepare ---------------------------------------------------------------

struct PrepareArgs {
  std::string hdr_dir, out_dir, lut, interp = "tetrahedral";
  std::vector<std::string> dms;
  std::uint64_t seed = 0;
  int patch_size = 600, patches = 6, qf = 75, dm_qf = kDmJpegQuality, jobs = 0;
  double scale_min = 0.25, scale_max = 1.0;
  bool single_compress = false;
};

int run_prepare(const PrepareArgs& a) {
  PipelineConfig cfg;
  cfg.master_seed = a.seed;
  cfg.patch_size = a.patch_size;
  cfg.patches_per_frame = a.patches;
  cfg.scale_range = {a.scale_min, a.scale_max};
  cfg.store_qf = a.qf;
  cfg.double_compress = !a.single_compress;
  cfg.jobs = a.jobs;
  std::shared_ptr<const Lut3D> lut;
  if (!a.lut.empty()) lut = load_lut(a.lut, a.interp);
  if (a.dms.empty()) {
    if (!lut) log_warn("prepare: no --lut given; sampling from hc_gm and 2446c_gm only");
    cfg.dm_set = PipelineConfig::default_dm_set(lut);
  } else {
    cfg.dm_set.clear();
    for (const auto& name : a.dms) {
      const auto kind = parse_dm_kind(name);
      if (!kind) throw UsageError("unknown --dm '" + name + "'");
      if (*kind == DmKind::lut3d && !lut) throw UsageError("--dm lut requires --lut PATH");
      cfg.dm_set.push_back({*kind, kDmJpegQuality, *kind == DmKind::lut3d ? lut : nullptr, 0});
    }
  }
  for (auto& d : cfg.dm_set) d.jpeg_qf = a.dm_qf;
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const PairManifest m = prepare(a.hdr_dir, a.out_dir, cfg);
  if (m.pairs.empty()) {
    log_error("prepare: every frame was skipped");
    return kExitRuntime;
  }
  return 0;
}

// ----- segment ---------------------------------------------------------------

struct SegmentArgs {
  std::string in, out_low, out_high;
  double t = kDefaultSegmentThreshold;
  AssumeFlags assume;
};

int run_segment(const SegmentArgs& a) {
  if (!(a.t > 0.0 && a.t < 0.5)) throw UsageError("--t must lie in (0, 0.5)");
  const ImageFormat lf = output_format(a.out_low), hf = output_format(a.out_high);
  const PixelFrame sdr = load(a.in, a.assume.resolve(ColorEncoding::sdr_gamma()));
  const SegMaskPair seg = segment(sdr, a.t);
  const auto low = encode_image(seg.low, lf), high = encode_image(seg.high, hf);
  write_file_atomic(a.out_low, low);
  try {
    write_file_atomic(a.out_high, high);
  } catch (...) {
    fs::remove(a.out_low);
    throw;
  }
  return 0;
}

// ----- compare ---------------------------------------------------------------

struct CompareArgs {
  std::string gt, pred, out;
};

int run_compare(const CompareArgs& a) {
  const PixelFrame gt = load(a.gt, ColorEncoding::hdr_pq());
  const PixelFrame pred = load(a.pred, ColorEncoding::hdr_pq());
  if (!gt.same_shape(pred))
    throw ContractError("size mismatch: " + a.gt + " is " + std::to_string(gt.width()) + "x" +
                        std::to_string(gt.height()) + ", " + a.pred + " is " +
                        std::to_string(pred.width()) + "x" + std::to_string(pred.height()));
  write_text_atomic(a.out, comparison_json(metrics::compare(pred, gt)));
  return 0;
}

// ----- lut-apply -------------------------------------------------------------

struct LutApplyArgs {
  std::string in, out, lut, interp = "tetrahedral", out_encoding = "sdr";
  int qf = 95;
  AssumeFlags assume;
};

int run_lut_apply(const LutApplyArgs& a) {
  const ImageFormat fmt = output_format(a.out);
  const auto lut = load_lut(a.lut, a.interp);
  const PixelFrame in = load(a.in, a.assume.resolve(fs::path(a.in)));
  const ColorEncoding enc =
      a.out_encoding == "hdr" ? ColorEncoding::hdr_pq() : ColorEncoding::sdr_gamma();
  const LutApplyResult r = lut_apply(in, *lut, enc);
  if (r.clamped_pixels)
    log_warn(std::to_string(r.clamped_pixels) + " pixels fell outside the LUT domain");
  encode_image(r.frame, fs::path(a.out), fmt, a.qf);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HDR/SDR dataset tools: degradation models, metrics, pair preparation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  bool quiet = false, verbose = false;
  app.add_flag("-q,--quiet", quiet, "Only log errors");
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  const std::vector<std::string> dm_names{"hc_gm", "2446c_gm", "reinhard_gm", "lut"};
  const std::vector<std::string> interps{"tetrahedral", "trilinear"};

  DegradeArgs dg;
  auto* degrade_cmd = app.add_subcommand("degrade", "HDR frame to SDR through a degradation model");
  degrade_cmd->add_option("in", dg.in, "HDR input (16-bit TIFF or PNG)")->required();
  degrade_cmd->add_option("out", dg.out, "SDR output (.jpg, or .png with --lossless)")->required();
  degrade_cmd->add_option("--dm", dg.dm, "Degradation model")->check(CLI::IsMember(dm_names))
      ->capture_default_str();
  degrade_cmd->add_option("--lut", dg.lut, ".cube file for --dm lut");
  degrade_cmd->add_option("--interp", dg.interp, "LUT interpolation")
      ->check(CLI::IsMember(interps))->capture_default_str();
  degrade_cmd->add_option("--qf", dg.qf, "JPEG quality")->check(CLI::Range(1, 100))
      ->capture_default_str();
  degrade_cmd->add_flag("--lossless", dg.lossless, "Skip the JPEG stage and write 16-bit PNG");
  dg.assume.add_to(degrade_cmd);

  MetricsArgs mt;
  auto* metrics_cmd = app.add_subcommand("metrics", "Per-frame and frame-average statistics");
  metrics_cmd->add_option("in_dir", mt.in_dir, "Directory of frames")->required();
  metrics_cmd->add_option("out_csv", mt.out_csv, "CSV report")->required();
  metrics_cmd->add_option("--mode", mt.mode, "Input container")
      ->check(CLI::IsMember({"hdr", "sdr"}))->capture_default_str();
  metrics_cmd->add_option("--json", mt.json, "Also write a JSON report");
  metrics_cmd->add_option("--jobs", mt.jobs, "Concurrent frames (0: all cores)")
      ->check(CLI::NonNegativeNumber);

  PrepareArgs pr;
  auto* prepare_cmd = app.add_subcommand("prepare", "Build seeded HDR/SDR training pairs");
  prepare_cmd->add_option("hdr_dir", pr.hdr_dir, "Directory of 16-bit PQ frames")->required();
  prepare_cmd->add_option("out_dir", pr.out_dir, "Output directory")->required();
  prepare_cmd->add_option("--seed", pr.seed, "Master seed")->capture_default_str();
  prepare_cmd->add_option("--patch-size", pr.patch_size, "Patch edge in pixels")
      ->check(CLI::PositiveNumber)->capture_default_str();
  prepare_cmd->add_option("--patches", pr.patches, "Patches per frame")
      ->check(CLI::PositiveNumber)->capture_default_str();
  prepare_cmd->add_option("--scale-min", pr.scale_min, "Lower resize bound")
      ->capture_default_str();
  prepare_cmd->add_option("--scale-max", pr.scale_max, "Upper resize bound")
      ->capture_default_str();
  prepare_cmd->add_option("--dm", pr.dms, "Restrict the model set (repeatable)")
      ->check(CLI::IsMember(dm_names));
  prepare_cmd->add_option("--lut", pr.lut, ".cube file; adds the LUT model to the default set");
  prepare_cmd->add_option("--interp", pr.interp, "LUT interpolation")
      ->check(CLI::IsMember(interps))->capture_default_str();
  prepare_cmd->add_option("--qf", pr.qf, "Stored JPEG quality")->check(CLI::Range(1, 100))
      ->capture_default_str();
  prepare_cmd->add_option("--dm-qf", pr.dm_qf, "JPEG quality inside the models")
      ->check(CLI::Range(1, 100))->capture_default_str();
  prepare_cmd->add_flag("--single-compress", pr.single_compress,
                        "Encode the model output once at --qf");
  prepare_cmd->add_option("--jobs", pr.jobs, "Concurrent frames (0: all cores)")
      ->check(CLI::NonNegativeNumber);

  SegmentArgs sg;
  auto* segment_cmd = app.add_subcommand("segment", "Split an SDR image into dark/bright ranges");
  segment_cmd->add_option("in", sg.in, "SDR input")->required();
  segment_cmd->add_option("out_low", sg.out_low, "Dark-range output")->required();
  segment_cmd->add_option("out_high", sg.out_high, "Bright-range output")->required();
  segment_cmd->add_option("--t", sg.t, "Range width")->capture_default_str();
  sg.assume.add_to(segment_cmd);

  CompareArgs cp;
  auto* compare_cmd = app.add_subcommand("compare", "Volume recovery and fidelity of an HDR result");
  compare_cmd->add_option("gt", cp.gt, "Ground-truth HDR")->required();
  compare_cmd->add_option("pred", cp.pred, "Predicted HDR")->required();
  compare_cmd->add_option("out", cp.out, "JSON report")->required();

  LutApplyArgs la;
  auto* lut_cmd = app.add_subcommand("lut-apply", "Apply a 3D LUT");
  lut_cmd->add_option("in", la.in, "Input image")->required();
  lut_cmd->add_option("out", la.out, "Output image (.tif, .png, .jpg)")->required();
  lut_cmd->add_option("--lut", la.lut, ".cube file")->required();
  lut_cmd->add_option("--interp", la.interp, "Interpolation")->check(CLI::IsMember(interps))
      ->capture_default_str();
  lut_cmd->add_option("--out-encoding", la.out_encoding, "Container of the LUT output")
      ->check(CLI::IsMember({"hdr", "sdr"}))->capture_default_str();
  lut_cmd->add_option("--qf", la.qf, "JPEG quality for .jpg output")->check(CLI::Range(1, 100))
      ->capture_default_str();
  la.assume.add_to(lut_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  set_log_level(quiet ? LogLevel::error : verbose ? LogLevel::debug : LogLevel::info);

  try {
    if (*degrade_cmd) return run_degrade(dg);
    if (*metrics_cmd) return run_metrics(mt);
    if (*prepare_cmd) return run_prepare(pr);
    if (*segment_cmd) return run_segment(sg);
    if (*compare_cmd) return run_compare(cp);
    if (*lut_cmd) return run_lut_apply(la);
  } catch (const UsageError& e) {
    log_error(e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log_error(e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
