#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "hdrtv/image_io.hpp"
#include "hdrtv/lut3d.hpp"
#include "json.hpp"
#include "support/synthetic.hpp"

using namespace hdrtv;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + HDRTV_CLI_PATH + "\" -q " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> csv_row(const std::string& csv, int index) {
  std::istringstream in(csv);
  std::string line;
  for (int i = 0; i <= index; ++i) std::getline(in, line);
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ls(line);
  while (std::getline(ls, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

TEST(Cli, DegradeWritesJpeg) {
  synth::TempDir tmp("cli_dg");
  encode_image(synth::highlight_scene(48, 32, 1), tmp.path / "in.tif", ImageFormat::tiff16);
  for (const char* dm : {"hc_gm", "2446c_gm", "reinhard_gm"}) {
    const fs::path out = tmp.path / (std::string(dm) + ".jpg");
    ASSERT_EQ(run("degrade " + q(tmp.path / "in.tif") + " " + q(out) + " --dm " + dm), 0) << dm;
    const auto bytes = synth::slurp(out);
    ASSERT_GT(bytes.size(), 2u);
    EXPECT_EQ(bytes[0], 0xFF);
    EXPECT_EQ(bytes[1], 0xD8);
  }
  EXPECT_EQ(run("degrade " + q(tmp.path / "in.tif") + " " + q(tmp.path / "x.jpg") + " --dm lut"), 2);
  EXPECT_FALSE(fs::exists(tmp.path / "x.jpg"));
  EXPECT_EQ(run("degrade " + q(tmp.path / "in.tif") + " " + q(tmp.path / "x.bmp")), 2);
  EXPECT_EQ(run("degrade " + q(tmp.path / "missing.tif") + " " + q(tmp.path / "x.jpg")), 1);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Cli, IdentityLutIsLossless) {
  synth::TempDir tmp("cli_lut");
  const PixelFrame in = synth::metric_suite(24, 16)[13].frame;
  encode_image(in, tmp.path / "in.tif", ImageFormat::tiff16);
  save_cube(tmp.path / "id.cube", Lut3D::identity(33));
  ASSERT_EQ(run("degrade " + q(tmp.path / "in.tif") + " " + q(tmp.path / "out.png") +
                " --dm lut --lut " + q(tmp.path / "id.cube") + " --lossless"),
            0);
  const PixelFrame out = decode_image(tmp.path / "out.png", ColorEncoding::hdr_pq());
  ASSERT_TRUE(out.same_shape(in));
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < in.pixel_count(); ++i)
      ASSERT_EQ(quantize_code(out.plane(c)[i], 16), quantize_code(in.plane(c)[i], 16));
  ASSERT_EQ(run("lut-apply " + q(tmp.path / "in.tif") + " " + q(tmp.path / "la.tif") + " --lut " +
                q(tmp.path / "id.cube") + " --out-encoding hdr"),
            0);
  EXPECT_EQ(decode_image(tmp.path / "la.tif", ColorEncoding::hdr_pq()), quantize(in, 16));
}

TEST(Cli, MetricsCsv) {
  synth::TempDir tmp("cli_mt");
  fs::create_directories(tmp.path / "black");
  encode_image(PixelFrame(16, 16, ColorEncoding::hdr_pq()), tmp.path / "black" / "a.tif", ImageFormat::tiff16);
  ASSERT_EQ(run("metrics " + q(tmp.path / "black") + " " + q(tmp.path / "black.csv")), 0);
  const std::string csv = text(tmp.path / "black.csv");
  const auto header = csv_row(csv, 0);
  ASSERT_EQ(header.size(), 11u);
  EXPECT_EQ(header[0], "path");
  const auto row = csv_row(csv, 1);
  ASSERT_EQ(row.size(), 11u);
  EXPECT_EQ(row[0], "a.tif");
  for (int i = 1; i <= 9; ++i) EXPECT_NEAR(std::stod(row[i]), 0.0, 1e-12) << header[i];
  EXPECT_EQ(row[10], "");

  fs::create_directories(tmp.path / "two");
  encode_image(synth::flat_hdr(16, 16, {50, 50, 50}), tmp.path / "two" / "a.tif", ImageFormat::tiff16);
  encode_image(synth::flat_hdr(16, 16, {500, 500, 500}), tmp.path / "two" / "b.tif", ImageFormat::tiff16);
  ASSERT_EQ(run("metrics " + q(tmp.path / "two") + " " + q(tmp.path / "two.csv") + " --json " +
                q(tmp.path / "two.json")),
            0);
  const std::string two = text(tmp.path / "two.csv");
  const auto a = csv_row(two, 1), b = csv_row(two, 2), avg = csv_row(two, 3);
  EXPECT_EQ(avg[0], "frame-average");
  for (int i = 1; i <= 9; ++i)
    EXPECT_NEAR(std::stod(avg[i]), 0.5 * (std::stod(a[i]) + std::stod(b[i])), 1e-9) << header[i];
  EXPECT_NEAR(std::stod(b[1]), 100.0, 1e-9);  // every pixel above 100 nit
  const auto doc = nlohmann::json::parse(text(tmp.path / "two.json"));
  EXPECT_EQ(doc["frames"].size(), 2u);

  fs::create_directories(tmp.path / "empty");
  EXPECT_NE(run("metrics " + q(tmp.path / "empty") + " " + q(tmp.path / "e.csv")), 0);
  EXPECT_FALSE(fs::exists(tmp.path / "e.csv"));
  EXPECT_EQ(run("metrics " + q(tmp.path / "two") + " " + q(tmp.path / "m.csv") + " --mode xyz"), 2);
}

TEST(Cli, Compare) {
  synth::TempDir tmp("cli_cmp");
  const PixelFrame gt = synth::metric_suite(20, 20)[9].frame;
  encode_image(gt, tmp.path / "gt.tif", ImageFormat::tiff16);
  ASSERT_EQ(run("compare " + q(tmp.path / "gt.tif") + " " + q(tmp.path / "gt.tif") + " " +
                q(tmp.path / "same.json")),
            0);
  const auto doc = nlohmann::json::parse(text(tmp.path / "same.json"));
  for (const char* k : {"fhlp", "ehl", "fwgp", "ewg"}) EXPECT_NEAR(doc["recovery"][k].get<double>(), 100.0, 1e-9) << k;
  for (const char* k : {"asl", "all"}) EXPECT_NEAR(doc["shift"][k].get<double>(), 0.0, 1e-9) << k;
  EXPECT_EQ(doc["psnr_db"], "inf");
  EXPECT_EQ(doc["delta_e_itp"], 0.0);

  {
    std::ofstream bad(tmp.path / "bad.tif", std::ios::binary);
    bad << "not an image";
  }
  EXPECT_EQ(run("compare " + q(tmp.path / "gt.tif") + " " + q(tmp.path / "bad.tif") + " " +
                q(tmp.path / "bad.json")),
            1);
  EXPECT_FALSE(fs::exists(tmp.path / "bad.json"));
  encode_image(synth::flat_hdr(10, 20, {1, 1, 1}), tmp.path / "small.tif", ImageFormat::tiff16);
  EXPECT_NE(run("compare " + q(tmp.path / "gt.tif") + " " + q(tmp.path / "small.tif") + " " +
                q(tmp.path / "size.json")),
            0);
  EXPECT_FALSE(fs::exists(tmp.path / "size.json"));
}

TEST(Cli, PrepareIsReproducible) {
  synth::TempDir tmp("cli_prep");
  fs::create_directories(tmp.path / "in");
  for (int i = 0; i < 2; ++i)
    encode_image(synth::highlight_scene(64, 48, 10 + i), tmp.path / "in" / ("f" + std::to_string(i) + ".tif"),
                 ImageFormat::tiff16);
  const std::string opts = " --seed 9 --patch-size 24 --patches 3 --scale-min 0.5";
  ASSERT_EQ(run("prepare " + q(tmp.path / "in") + " " + q(tmp.path / "a") + opts + " --jobs 1"), 0);
  ASSERT_EQ(run("prepare " + q(tmp.path / "in") + " " + q(tmp.path / "b") + opts + " --jobs 3"), 0);
  const std::string ma = text(tmp.path / "a" / "manifest.jsonl");
  EXPECT_EQ(ma, text(tmp.path / "b" / "manifest.jsonl"));
  std::istringstream lines(ma);
  int pairs = 0;
  for (std::string l; std::getline(lines, l);) pairs += nlohmann::json::parse(l)["type"] == "pair";
  EXPECT_EQ(pairs, 6);
  for (int i = 0; i < 6; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "%06d", i);
    EXPECT_EQ(synth::slurp(tmp.path / "a" / "sdr" / (std::string(id) + ".jpg")),
              synth::slurp(tmp.path / "b" / "sdr" / (std::string(id) + ".jpg")));
  }
  EXPECT_EQ(run("prepare " + q(tmp.path / "in") + " " + q(tmp.path / "c") + " --scale-min 0"), 2);
}

TEST(Cli, Segment) {
  synth::TempDir tmp("cli_seg");
  const PixelFrame sdr = synth::codes(16, 4, ColorEncoding::sdr_gamma(), [](int x, int) {
    return Rgb{x / 15.0, x / 15.0, x / 15.0};
  });
  encode_image(sdr, tmp.path / "in.png", ImageFormat::png8);
  ASSERT_EQ(run("segment " + q(tmp.path / "in.png") + " " + q(tmp.path / "lo.png") + " " +
                q(tmp.path / "hi.png")),
            0);
  const PixelFrame lo = decode_image(tmp.path / "lo.png", ColorEncoding::sdr_gamma());
  const PixelFrame hi = decode_image(tmp.path / "hi.png", ColorEncoding::sdr_gamma());
  EXPECT_EQ(lo.pixel(0, 0)[0], 1.0f);
  EXPECT_EQ(lo.pixel(15, 0)[0], 0.0f);
  EXPECT_EQ(hi.pixel(0, 0)[0], 0.0f);
  EXPECT_EQ(hi.pixel(15, 0)[0], 1.0f);
  EXPECT_EQ(run("segment " + q(tmp.path / "in.png") + " " + q(tmp.path / "a.png") + " " +
                q(tmp.path / "b.png") + " --t 0.7"),
            2);
  EXPECT_FALSE(fs::exists(tmp.path / "a.png"));
}
