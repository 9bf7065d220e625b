#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "ose/digest.hpp"
#include "ose/error.hpp"
#include "test_util.hpp"
#include "units.hpp"

using namespace ose;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const test::TempDir& d, const std::string& name) { return (d / name).string(); }

}  // namespace

TEST(Units, Lengths) {
  EXPECT_DOUBLE_EQ(cli::parse_length("650nm"), 650e-9);
  EXPECT_DOUBLE_EQ(cli::parse_length("5.9mm"), 5.9e-3);
  EXPECT_DOUBLE_EQ(cli::parse_length("2.2265625um"), 2.2265625e-6);
  EXPECT_DOUBLE_EQ(cli::parse_length("0.075m"), 0.075);
  EXPECT_DOUBLE_EQ(cli::parse_length("1cm"), 0.01);
  EXPECT_THROW(cli::parse_length("650"), InvalidArgument);
  EXPECT_THROW(cli::parse_length("650 nm"), InvalidArgument);
  EXPECT_THROW(cli::parse_length("nm"), InvalidArgument);
  EXPECT_THROW(cli::parse_length("5deg"), InvalidArgument);
  EXPECT_EQ(cli::format_length(650e-9, "nm"), "650nm");
}

TEST(Units, Angles) {
  EXPECT_DOUBLE_EQ(cli::parse_angle("180deg"), std::numbers::pi);
  EXPECT_DOUBLE_EQ(cli::parse_angle("0.5rad"), 0.5);
  EXPECT_DOUBLE_EQ(cli::parse_angle("4mrad"), 0.004);
  EXPECT_THROW(cli::parse_angle("5"), InvalidArgument);
  EXPECT_THROW(cli::parse_angle("5mm"), InvalidArgument);
}

TEST(Cli, NoArgumentsIsUsage) {
  const auto r = run({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Subcommands"), std::string::npos);
}

TEST(Cli, UnknownSubcommand) {
  const auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("gen-surface"), std::string::npos);
}

TEST(Cli, MissingUnitIsUsage) {
  test::TempDir d;
  EXPECT_EQ(run({"gen-surface", "--out", p(d, "m.oseh"), "--pitch", "1"}).code, 2);
}

TEST(Cli, HelpIsSuccess) { EXPECT_EQ(run({"verify", "--help"}).code, 0); }

TEST(Cli, ManifestAndDeterminism) {
  test::TempDir d;
  for (const char* name : {"a.oseh", "b.oseh"}) {
    const auto r = run({"gen-surface", "--out", p(d, name), "--size", "96", "--seed", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(sha256_file(d / "a.oseh"), sha256_file(d / "b.oseh"));
  std::ifstream is(d / "a.oseh.manifest.json");
  const auto m = nlohmann::json::parse(is);
  EXPECT_EQ(m.at("command"), "gen-surface");
  EXPECT_EQ(m.at("params").at("seed"), "5");
  EXPECT_EQ(m.at("params").at("pitch"), "1um");
  EXPECT_EQ(m.at("seeds").at("surface"), 5);
  EXPECT_EQ(m.at("outputs")[0].at("sha256"), sha256_file(d / "a.oseh"));
  EXPECT_TRUE(m.contains("version"));
  EXPECT_TRUE(m.contains("duration_s"));
}

class CliPipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    const std::string g = std::to_string(test::kSmallGrid);
    ASSERT_EQ(run({"gen-surface", "--out", p(dir, "m1.oseh"), "--size", g, "--seed", "1"}).code, 0);
    ASSERT_EQ(run({"gen-surface", "--out", p(dir, "m2.oseh"), "--size", g, "--seed", "2"}).code, 0);
    ASSERT_EQ(run({"replicate", "--in", p(dir, "m1.oseh"), "--out", p(dir, "r1a.oseh"), "--seed", "3"}).code, 0);
    ASSERT_EQ(run({"replicate", "--in", p(dir, "m1.oseh"), "--out", p(dir, "r1b.oseh"), "--seed", "4"}).code, 0);
    ASSERT_EQ(run({"replicate", "--in", p(dir, "m2.oseh"), "--out", p(dir, "r2c.oseh"), "--seed", "5"}).code, 0);
    for (const char* lam : {"650nm", "635nm"})
      for (const char* s : {"r1a", "r1b", "r2c"}) {
        const auto r = run({"simulate", "--in", p(dir, std::string(s) + ".oseh"), "--out",
                            p(dir, std::string(s) + "_" + lam + ".png"), "--lambda", lam, "--px-w", "256", "--px-h",
                            "256", "--seed", "7"});
        ASSERT_EQ(r.code, 0) << r.err;
      }
    ASSERT_EQ(run({"enroll", "--store", p(dir, "store"), "--id", "item", "--pattern", p(dir, "r1a_650nm.png"),
                   "--pattern", p(dir, "r1a_635nm.png"), "--created-at", "2026-01-01T00:00:00Z"})
                  .code,
              0);
  }

  test::TempDir dir;
};

TEST_F(CliPipeline, VerifyGenuine) {
  const auto r = run({"--json", "verify", "--store", p(dir, "store"), "--id", "item", "--pattern",
                      p(dir, "r1b_650nm.png"), "--max-shift", "16"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("verdict"), "genuine");
}

TEST_F(CliPipeline, VerifyDifferentMaster) {
  const auto r = run({"verify", "--store", p(dir, "store"), "--id", "item", "--pattern", p(dir, "r2c_650nm.png"),
                      "--max-shift", "16", "--report", p(dir, "decision.json")});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "decision.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "decision.json.manifest.json"));
}

TEST_F(CliPipeline, VerifyUnknownId) {
  EXPECT_EQ(run({"verify", "--store", p(dir, "store"), "--id", "nobody", "--pattern", p(dir, "r1b_650nm.png")}).code,
            2);
}

TEST_F(CliPipeline, ChallengeAndInconclusive) {
  EXPECT_EQ(run({"challenge", "--store", p(dir, "store"), "--id", "item", "--probe", p(dir, "r1b_650nm.png"),
                 "--probe", p(dir, "r1b_635nm.png"), "--max-shift", "16"})
                .code,
            0);
  EXPECT_EQ(run({"challenge", "--store", p(dir, "store"), "--id", "item", "--probe", p(dir, "r1b_650nm.png"),
                 "--max-shift", "16"})
                .code,
            2);
  // A threshold sitting on the genuine score lands inside the band.
  const auto r = run({"--json", "verify", "--store", p(dir, "store"), "--id", "item", "--pattern",
                      p(dir, "r1b_650nm.png"), "--max-shift", "16"});
  const double peak = nlohmann::json::parse(r.out).at("scores")[0].at("peak").get<double>();
  EXPECT_EQ(run({"verify", "--store", p(dir, "store"), "--id", "item", "--pattern", p(dir, "r1b_650nm.png"),
                 "--max-shift", "16", "--threshold", std::to_string(peak)})
                .code,
            4);
}

TEST_F(CliPipeline, CorrelateHeatmapAndSpeckleSize) {
  auto r = run({"--json", "correlate", "--a", p(dir, "r1a_650nm.png"), "--b", p(dir, "r1b_650nm.png"), "--max-shift",
                "16", "--heatmap", p(dir, "hm.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GE(nlohmann::json::parse(r.out).at("peak").get<double>(), 0.8);
  EXPECT_TRUE(std::filesystem::exists(dir / "hm.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "hm.json"));
  r = run({"heatmap", "--a", p(dir, "r1a_650nm.png"), "--b", p(dir, "r2c_650nm.png"), "--max-shift", "16", "--out",
           p(dir, "hm.png")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "hm.png.manifest.json"));
  r = run({"--json", "speckle-size", "--in", p(dir, "r1a_650nm.png")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out).at("expected_px").get<double>(), 5.342, 0.01);
}

TEST_F(CliPipeline, OccludeAndCalibrate) {
  EXPECT_EQ(run({"occlude", "--in", p(dir, "r1a.oseh"), "--out", p(dir, "o.oseh"), "--fraction", "0.3", "--fill",
                 "random", "--seed", "2"})
                .code,
            0);
  EXPECT_EQ(run({"occlude", "--in", p(dir, "r1a.oseh"), "--out", p(dir, "o.oseh"), "--fraction", "0.3", "--rect",
                 "0,0,4,4"})
                .code,
            2);
  std::ofstream(dir / "g.txt") << "0.9\n0.85 # second pair\n";
  std::ofstream(dir / "i.txt") << "0.06, 0.08\n";
  const auto r = run({"--json", "calibrate", "--genuine", p(dir, "g.txt"), "--impostor", p(dir, "i.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out).at("threshold").get<double>(), 0.465, 1e-12);
  std::ofstream(dir / "bad.txt") << "0.01\n";
  EXPECT_EQ(run({"calibrate", "--genuine", p(dir, "bad.txt"), "--impostor", p(dir, "i.txt")}).code, 2);
}
