#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <unordered_set>

#include "hdrtv/error.hpp"
#include "hdrtv/image_io.hpp"
#include "hdrtv/log.hpp"
#include "hdrtv/lut3d.hpp"
#include "hdrtv/pipeline.hpp"
#include "json.hpp"
#include "support/synthetic.hpp"

using namespace hdrtv;
namespace fs = std::filesystem;

namespace {

// Upper 0.1% point of chi-square with 9 degrees of freedom.
constexpr double kChi2Dof9 = 27.877;

double chi_square(const std::vector<long>& counts) {
  long total = 0;
  for (long c : counts) total += c;
  const double expected = static_cast<double>(total) / counts.size();
  double x = 0.0;
  for (long c : counts) x += (c - expected) * (c - expected) / expected;
  return x;
}

void write_corpus(const fs::path& dir, int n, int w, int h) {
  fs::create_directories(dir);
  for (int i = 0; i < n; ++i)
    encode_image(synth::highlight_scene(w, h, 100 + i), dir / ("frame_" + std::to_string(i) + ".tif"),
                 ImageFormat::tiff16);
}

PipelineConfig small_config() {
  PipelineConfig c;
  c.master_seed = 42;
  c.patch_size = 32;
  c.patches_per_frame = 6;
  c.scale_range = {0.5, 1.0};
  c.dm_set = {{DmKind::hc_gm, 80, nullptr, 0},
              {DmKind::tm2446c_gm, 80, nullptr, 0},
              {DmKind::reinhard_gm, 80, nullptr, 0}};
  return c;
}

std::vector<nlohmann::json> read_manifest(const fs::path& p) {
  std::ifstream in(p);
  std::vector<nlohmann::json> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(nlohmann::json::parse(line));
  return lines;
}

std::map<std::string, std::vector<std::uint8_t>> tree(const fs::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = synth::slurp(e.path());
  return out;
}

class Prepare : public ::testing::Test {
 protected:
  void SetUp() override { set_log_level(LogLevel::off); }
  void TearDown() override { set_log_level(LogLevel::info); }
};

}  // namespace

// ----- seeds and draws -------------------------------------------------------

TEST(DeriveSeed, Deterministic) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(2, 2, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
  // Swapping frame and patch index is a different stream.
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
  EXPECT_NE(derive_seed(0, 0, 0), derive_seed(0, 0, kFrameStream));
}

TEST(DeriveSeed, NoAdjacentPatchCollisionsOverAMillionSeeds) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000000; ++i) {
    const std::uint64_t s = rng();
    ASSERT_NE(derive_seed(s, 0, 0), derive_seed(s, 0, 1)) << s;
  }
}

TEST(DeriveSeed, DistinctAcrossAGrid) {
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t f = 0; f < 300; ++f)
    for (std::uint64_t p = 0; p < 300; ++p) seen.insert(derive_seed(7, f, p));
  EXPECT_EQ(seen.size(), 90000u);
}

TEST(DeriveSeed, StreamPassesChiSquare) {
  // Seeds themselves, bucketed by their low digits.
  std::vector<long> by_seed(10, 0);
  for (int j = 0; j < 100000; ++j) ++by_seed[derive_seed(12345, 3, j) % 10];
  EXPECT_LT(chi_square(by_seed), kChi2Dof9);
  // Draws from one derived stream.
  std::mt19937_64 rng(derive_seed(12345, 3, 4));
  std::vector<long> draws(10, 0);
  for (int j = 0; j < 100000; ++j) ++draws[uniform_index(rng, 10)];
  EXPECT_LT(chi_square(draws), kChi2Dof9);
}

TEST(Draws, Bounds) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_LT(uniform_index(rng, 7), 7u);
    const double r = uniform_real(rng, 0.25, 1.0);
    EXPECT_GE(r, 0.25);
    EXPECT_LT(r, 1.0);
  }
  EXPECT_EQ(uniform_index(rng, 1), 0u);
  EXPECT_THROW(uniform_index(rng, 0), DomainError);
}

TEST(Draws, PatchesStayInsideTheFrame) {
  for (int j = 0; j < 5000; ++j) {
    const PatchDraw d = draw_patch(3, j / 6, j % 6, 640, 400, 300, 3);
    EXPECT_GE(d.crop_x, 0);
    EXPECT_GE(d.crop_y, 0);
    EXPECT_LE(d.crop_x + 300, 640);
    EXPECT_LE(d.crop_y + 300, 400);
    EXPECT_LT(d.dm_index, 3u);
  }
  const PatchDraw exact = draw_patch(3, 0, 0, 300, 300, 300, 3);
  EXPECT_EQ(exact.crop_x, 0);
  EXPECT_EQ(exact.crop_y, 0);
  EXPECT_THROW(draw_patch(3, 0, 0, 299, 400, 300, 3), DomainError);
}

TEST(Draws, ModelChoiceIsUniformAtDatasetScale) {
  // 3878 frames x 6 patches over three models: 7756 each, 3 sigma = 215.
  const int frames = 3878, patches = 6;
  const double n = frames * patches, p = 1.0 / 3.0;
  const double sigma3 = 3.0 * std::sqrt(n * p * (1 - p));
  EXPECT_NEAR(sigma3, 215.0, 1.0);
  std::vector<long> counts(3, 0);
  for (int f = 0; f < frames; ++f)
    for (int j = 0; j < patches; ++j) ++counts[draw_patch(2024, f, j, 1920, 1080, 600, 3).dm_index];
  for (long c : counts) {
    EXPECT_NEAR(c, n * p, sigma3);
    EXPECT_NEAR(c, 7756, 260);
  }
}

TEST(Draws, ScaleIsPerFrameAndInRange) {
  std::set<double> values;
  for (int f = 0; f < 100; ++f) {
    const double s = draw_scale(5, f, 0.25, 1.0);
    EXPECT_GE(s, 0.25);
    EXPECT_LT(s, 1.0);
    EXPECT_EQ(s, draw_scale(5, f, 0.25, 1.0));
    values.insert(s);
  }
  EXPECT_EQ(values.size(), 100u);
}

// ----- resize ----------------------------------------------------------------

TEST(ResizeArea, PreservesMeanAndConstants) {
  const PixelFrame f = synth::metric_suite(60, 40)[12].frame;  // gradient
  const PixelFrame r = resize_area(f, 23, 17);
  EXPECT_EQ(r.width(), 23);
  EXPECT_EQ(r.height(), 17);
  for (int c = 0; c < 3; ++c) {
    double a = 0, b = 0;
    for (float v : f.plane(c)) a += v;
    for (float v : r.plane(c)) b += v;
    EXPECT_NEAR(a / f.pixel_count(), b / r.pixel_count(), 1e-5);
  }
  const PixelFrame flat = synth::flat_hdr(50, 30, {120, 40, 3});
  const PixelFrame fr = resize_area(flat, 21, 11);
  for (std::size_t i = 0; i < fr.pixel_count(); ++i)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(fr.pixel(i)[c], flat.pixel(0)[c], 1e-6);
}

TEST(ResizeArea, IntegerFactorIsBlockMean) {
  const PixelFrame f = synth::codes(4, 2, ColorEncoding::hdr_pq(), [](int x, int y) {
    return Rgb{0.1 * x + 0.05 * y, 0, 0};
  });
  const PixelFrame r = resize_area(f, 2, 1);
  EXPECT_NEAR(r.pixel(0, 0)[0], (0.0 + 0.1 + 0.05 + 0.15) / 4, 1e-7);
  EXPECT_NEAR(r.pixel(1, 0)[0], (0.2 + 0.3 + 0.25 + 0.35) / 4, 1e-7);
  EXPECT_EQ(resize_area(f, 4, 2), f);
  EXPECT_EQ(resize_area(f, 3, 2, Exec::serial), resize_area(f, 3, 2, Exec::parallel));
}

TEST(Sha256, KnownVector) {
  const std::string abc = "abc";
  EXPECT_EQ(sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size())),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

// ----- prepare ---------------------------------------------------------------

TEST_F(Prepare, PrepareCountsAndLayout) {
  synth::TempDir tmp("prep");
  write_corpus(tmp.path / "in", 2, 96, 64);
  const PairManifest m = prepare(tmp.path / "in", tmp.path / "out", small_config());
  ASSERT_EQ(m.pairs.size(), 12u);
  EXPECT_TRUE(m.skipped.empty());
  for (std::size_t i = 0; i < m.pairs.size(); ++i) {
    const auto& r = m.pairs[i];
    char id[8];
    std::snprintf(id, sizeof id, "%06zu", i);
    EXPECT_EQ(r.id, id);
    EXPECT_EQ(r.hdr_path, std::string("hdr/") + id + ".tif");
    EXPECT_EQ(r.sdr_path, std::string("sdr/") + id + ".jpg");
    EXPECT_EQ(sha256_hex(synth::slurp(tmp.path / "out" / r.hdr_path)), r.hdr_sha256);
    EXPECT_EQ(sha256_hex(synth::slurp(tmp.path / "out" / r.sdr_path)), r.sdr_sha256);
    EXPECT_EQ(r.frame_index, static_cast<int>(i / 6));
    EXPECT_EQ(r.source, "frame_" + std::to_string(i / 6) + ".tif");
  }
  EXPECT_FALSE(fs::exists(tmp.path / "out" / ".staging"));
  const auto lines = read_manifest(tmp.path / "out" / "manifest.jsonl");
  ASSERT_EQ(lines.size(), 13u);
  EXPECT_EQ(lines[0]["type"], "header");
  EXPECT_EQ(lines[0]["tool"], "hdrtv");
  EXPECT_FALSE(lines[0]["config"].contains("jobs"));
  EXPECT_EQ(lines[0]["config"]["master_seed"], 42);
  EXPECT_EQ(lines[1]["type"], "pair");
  EXPECT_EQ(lines[1]["id"], "000000");
}

TEST_F(Prepare, PatchesAreAlignedWithTheirLabels) {
  synth::TempDir tmp("align");
  write_corpus(tmp.path / "in", 1, 120, 80);
  const PipelineConfig cfg = small_config();
  const PairManifest m = prepare(tmp.path / "in", tmp.path / "out", cfg);
  const PixelFrame src = decode_image(tmp.path / "in" / "frame_0.tif", ColorEncoding::hdr_pq());
  for (const auto& r : m.pairs) {
    const PixelFrame scaled = resize_area(src, r.scaled_width, r.scaled_height);
    const PixelFrame want = quantize(scaled.crop(r.crop_x, r.crop_y, 32, 32), 16);
    const PixelFrame label = decode_image(tmp.path / "out" / r.hdr_path, ColorEncoding::hdr_pq());
    EXPECT_EQ(label, want) << r.id;
    // SDR input reproduced from the stored label with the recorded model.
    const DegradedImage d = degrade(label, {r.dm, r.dm_qf, nullptr, 0});
    EXPECT_EQ(encode_jpeg(d.frame, cfg.store_qf), synth::slurp(tmp.path / "out" / r.sdr_path)) << r.id;
    EXPECT_NEAR(r.scaled_width, std::lround(120 * r.scale), 1);
  }
}

TEST_F(Prepare, SingleCompressionEncodesOnce) {
  synth::TempDir tmp("single");
  write_corpus(tmp.path / "in", 1, 64, 64);
  PipelineConfig cfg = small_config();
  cfg.double_compress = false;
  cfg.patches_per_frame = 2;
  const PairManifest m = prepare(tmp.path / "in", tmp.path / "out", cfg);
  for (const auto& r : m.pairs) {
    const PixelFrame label = decode_image(tmp.path / "out" / r.hdr_path, ColorEncoding::hdr_pq());
    const auto want = encode_jpeg(degrade_encoded(label, {r.dm, r.dm_qf, nullptr, 0}), cfg.store_qf);
    EXPECT_EQ(want, synth::slurp(tmp.path / "out" / r.sdr_path));
  }
}

TEST_F(Prepare, DeterministicAcrossRunsAndThreadCounts) {
  synth::TempDir tmp("det");
  write_corpus(tmp.path / "in", 3, 80, 60);
  PipelineConfig cfg = small_config();
  cfg.jobs = 1;
  prepare(tmp.path / "in", tmp.path / "a", cfg);
  prepare(tmp.path / "in", tmp.path / "b", cfg);
  cfg.jobs = 4;
  prepare(tmp.path / "in", tmp.path / "c", cfg);
  const auto a = tree(tmp.path / "a");
  EXPECT_EQ(a.size(), 3u * 6 * 2 + 1);
  EXPECT_EQ(a, tree(tmp.path / "b"));
  EXPECT_EQ(a, tree(tmp.path / "c"));
  cfg.master_seed = 43;
  prepare(tmp.path / "in", tmp.path / "d", cfg);
  EXPECT_NE(a.at("manifest.jsonl"), tree(tmp.path / "d").at("manifest.jsonl"));
}

TEST_F(Prepare, UnreadableAndTooSmallFramesAreSkipped) {
  synth::TempDir tmp("skip");
  write_corpus(tmp.path / "in", 1, 64, 48);
  {
    std::ofstream bad(tmp.path / "in" / "broken.tif", std::ios::binary);
    bad << "II*\0garbage";
  }
  encode_image(synth::flat_hdr(20, 20, {1, 1, 1}), tmp.path / "in" / "tiny.png", ImageFormat::png16);
  const PairManifest m = prepare(tmp.path / "in", tmp.path / "out", small_config());
  EXPECT_EQ(m.pairs.size(), 6u);
  ASSERT_EQ(m.skipped.size(), 2u);
  EXPECT_EQ(m.skipped[0].source, "broken.tif");
  EXPECT_EQ(m.skipped[1].source, "tiny.png");
  const auto lines = read_manifest(tmp.path / "out" / "manifest.jsonl");
  int skipped = 0;
  for (const auto& l : lines) skipped += l["type"] == "skipped";
  EXPECT_EQ(skipped, 2);
}

TEST_F(Prepare, LowerScaleBoundIsRaisedToFitThePatch) {
  synth::TempDir tmp("raise");
  write_corpus(tmp.path / "in", 1, 80, 40);
  PipelineConfig cfg = small_config();
  cfg.scale_range = {0.25, 1.0};
  cfg.patches_per_frame = 20;
  const PairManifest m = prepare(tmp.path / "in", tmp.path / "out", cfg);
  ASSERT_EQ(m.pairs.size(), 20u);
  for (const auto& r : m.pairs) {
    EXPECT_GE(r.scale, 32.0 / 40.0);
    EXPECT_GE(r.scaled_height, 32);
    EXPECT_LE(r.crop_y + 32, r.scaled_height);
    EXPECT_LE(r.crop_x + 32, r.scaled_width);
  }
}

TEST_F(Prepare, ConfigAndInputErrors) {
  synth::TempDir tmp("err");
  PipelineConfig cfg = small_config();
  cfg.dm_set.clear();
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = small_config();
  cfg.scale_range = {0.0, 1.0};
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg.scale_range = {0.5, 1.5};
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = small_config();
  cfg.dm_set.push_back({DmKind::lut3d, 80, nullptr, 0});
  EXPECT_THROW(cfg.validate(), ContractError);
  fs::create_directories(tmp.path / "empty");
  EXPECT_THROW(prepare(tmp.path / "empty", tmp.path / "out", small_config()), IoError);
  EXPECT_THROW(prepare(tmp.path / "missing", tmp.path / "out", small_config()), IoError);
}

TEST(PipelineDefaults, MatchTheTrainingRecipe) {
  const PipelineConfig c;
  EXPECT_EQ(c.patches_per_frame, 6);
  EXPECT_EQ(c.patch_size, 600);
  EXPECT_EQ(c.store_qf, 75);
  EXPECT_TRUE(c.double_compress);
  EXPECT_EQ(c.scale_range[0], 0.25);
  EXPECT_EQ(c.scale_range[1], 1.0);
  EXPECT_EQ(c.dm_set.size(), 2u);
  auto lut = std::make_shared<const Lut3D>(Lut3D::identity(2));
  const auto with_lut = PipelineConfig::default_dm_set(lut);
  ASSERT_EQ(with_lut.size(), 3u);
  for (const auto& d : with_lut) EXPECT_EQ(d.jpeg_qf, 80);
}
