#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "attfuse/config.hpp"
#include "attfuse/csv.hpp"
#include "attfuse/harness.hpp"

using namespace attfuse;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  EXPECT_TRUE(f.good()) << p;
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("attfuse_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ATTFUSE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST(Config, ParseSectionsAndTypes) {
  const Config c = Config::from_text(
      "# comment\n[scenario]\nduration = 12.5\nseed = 9\n\n[sensors]\neta = 0.1 0.2 0.3\n"
      "sigma_gyro = 0.05 # inline comment\n");
  EXPECT_DOUBLE_EQ(c.get_double("scenario", "duration", 0.0), 12.5);
  EXPECT_EQ(c.get_int("scenario", "seed", 0), 9);
  EXPECT_TRUE(c.get_vec3("sensors", "eta", Vec3::Zero()).isApprox(Vec3(0.1, 0.2, 0.3)));
  EXPECT_DOUBLE_EQ(c.get_double("sensors", "sigma_gyro", 0.0), 0.05);
  EXPECT_DOUBLE_EQ(c.get_double("sensors", "missing", 42.0), 42.0);
  EXPECT_THROW(Config::from_text("[bad\n"), ConfigError);
  EXPECT_THROW(Config::from_text("keyonly\n"), ConfigError);
}

TEST(ImuCsv, ParsesWellFormedFile) {
  const std::string text =
      "t,ax,ay,az,mx,my,mz,wx,wy,wz\n"
      "0.0,0.771,-0.796,9.652,0.049,0.016,-0.263,0.01,0.02,0.03\n"
      "0.01,0.770,-0.795,9.651,0.049,0.016,-0.263,0.01,0.02,0.03\n"
      "0.02,0.769,-0.794,9.650,0.049,0.016,-0.263,0.01,0.02,0.03\n";
  const auto records = parse_imu_csv_text(text);
  ASSERT_EQ(records.size(), 3u);
  // the bench's first sample normalizes to direction vectors
  EXPECT_NEAR(records[0].acc.norm(), 1.0, 1e-12);
  EXPECT_NEAR(records[0].mag.norm(), 1.0, 1e-12);
  const Vec3 a0 = Vec3(0.771, -0.796, 9.652).normalized();
  EXPECT_LT((records[0].acc - a0).norm(), 1e-12);
  EXPECT_LT((records[0].gyro - Vec3(0.01, 0.02, 0.03)).norm(), 1e-15);
}

TEST(ImuCsv, ErrorsCarryLineNumbers) {
  const std::string nan_row =
      "t,ax,ay,az,mx,my,mz,wx,wy,wz\n"
      "0.0,0.771,-0.796,9.652,0.049,0.016,-0.263,0.01,0.02,0.03\n"
      "0.01,NaN,-0.795,9.651,0.049,0.016,-0.263,0.01,0.02,0.03\n";
  try {
    parse_imu_csv_text(nan_row);
    FAIL() << "expected CsvParseError";
  } catch (const CsvParseError& e) {
    EXPECT_EQ(e.line, 3);
  }
  const std::string non_monotone =
      "t,ax,ay,az,mx,my,mz,wx,wy,wz\n"
      "0.1,1,0,0,0,1,0,0,0,0\n"
      "0.1,1,0,0,0,1,0,0,0,0\n";
  try {
    parse_imu_csv_text(non_monotone);
    FAIL() << "expected CsvParseError";
  } catch (const CsvParseError& e) {
    EXPECT_EQ(e.line, 3);
  }
  EXPECT_THROW(parse_imu_csv_text("wrong,header\n"), CsvParseError);
  EXPECT_THROW(parse_imu_csv_text("t,ax,ay,az,mx,my,mz,wx,wy,wz\n1,2,3\n"), CsvParseError);
}

TEST(ReplayPath, SharesTheFilterCodePathWithSimulation) {
  // Inject a simulated log through the replay path: the filter outputs must be
  // identical to the direct simulation, bit for bit.
  for (const FilterVariant variant : {FilterVariant::kDirect, FilterVariant::kPassive}) {
    SimEstimationScenario sc = acceptance_estimation_scenario(variant, 2, 0.5);
    sc.duration_s = 5.0;
    const EstimationOutput sim = run_estimation_sim(sc);

    TempDir tmp;
    const std::string log_path = (tmp.path / "imu.csv").string();
    write_imu_csv(log_path, simulate_imu_log(sc));
    const EstimationOutput replay = run_estimation_replay(sc.setup, parse_imu_csv(log_path));

    ASSERT_EQ(sim.filter_rows.size(), replay.filter_rows.size());
    for (size_t k = 0; k < sim.filter_rows.size(); ++k) {
      ASSERT_EQ(sim.filter_rows[k].size(), replay.filter_rows[k].size());
      for (size_t j = 0; j < sim.filter_rows[k].size(); ++j)
        ASSERT_EQ(sim.filter_rows[k][j], replay.filter_rows[k][j])
            << "k=" << k << " j=" << j;
    }
    EXPECT_FALSE(replay.metrics.has_truth);
  }
}

TEST(Determinism, RepeatedRunsProduceIdenticalCsv) {
  SimEstimationScenario sc = acceptance_estimation_scenario(FilterVariant::kDirect, 1, 0.003);
  sc.duration_s = 3.0;
  sc.sensors.sigma_gyro = 0.01;
  sc.sensors.sigma_acc = 0.02;
  const EstimationOutput a = run_estimation_sim(sc);
  const EstimationOutput b = run_estimation_sim(sc);
  EXPECT_EQ(a.csv, b.csv);
}

TEST(RunMetrics, TextFormat) {
  RunMetrics m;
  m.has_truth = true;
  m.samples = 10;
  m.final_eta_tilde = 0.5;
  const std::string text = m.to_text();
  EXPECT_NE(text.find("final_eta_tilde = 0.5"), std::string::npos);
  EXPECT_NE(text.find("settled = 0"), std::string::npos);
}

TEST(Cli, EstimateControlSweepDesignGains) {
  TempDir tmp;
  const std::string cfg_path = (tmp.path / "cfg.ini").string();
  {
    std::ofstream f(cfg_path);
    f << "[scenario]\nduration = 2\n[filter]\ndt = 0.01\n[sensors]\neta = 0.02 -0.01 0.03\n";
  }
  EXPECT_EQ(run_cli("estimate --config " + cfg_path + " --out " + tmp.path.string() +
                    " --variant both --order 1 --seed 5"),
            0);
  EXPECT_TRUE(fs::exists(tmp.path / "estimate_direct.csv"));
  EXPECT_TRUE(fs::exists(tmp.path / "estimate_passive.csv"));
  EXPECT_TRUE(fs::exists(tmp.path / "metrics_direct.txt"));
  // identical schemas for the two variants at n = 1
  const std::string hdr_d = slurp(tmp.path / "estimate_direct.csv").substr(0, 200);
  const std::string hdr_p = slurp(tmp.path / "estimate_passive.csv").substr(0, 200);
  EXPECT_EQ(hdr_d.substr(0, hdr_d.find('\n')), hdr_p.substr(0, hdr_p.find('\n')));

  const std::string ctl_cfg = (tmp.path / "ctl.ini").string();
  {
    std::ofstream f(ctl_cfg);
    f << "[scenario]\nduration = 2\n[initial]\neuler_deg = -18.478 41.192 2.847\n";
  }
  EXPECT_EQ(run_cli("control --config " + ctl_cfg + " --out " + tmp.path.string()), 0);
  EXPECT_TRUE(fs::exists(tmp.path / "control.csv"));

  const std::string swp_cfg = (tmp.path / "swp.ini").string();
  {
    std::ofstream f(swp_cfg);
    f << "[sweep]\ncount = 2\nhorizon = 5\n";
  }
  EXPECT_EQ(run_cli("sweep --config " + swp_cfg + " --out " + tmp.path.string()), 0);
  EXPECT_TRUE(fs::exists(tmp.path / "sweep.csv"));
  EXPECT_TRUE(fs::exists(tmp.path / "sweep_summary.txt"));

  EXPECT_EQ(run_cli("design-gains --order 2 --out " + tmp.path.string()), 0);
  EXPECT_TRUE(fs::exists(tmp.path / "gains.txt"));
  const GainFile gf = load_gain_file((tmp.path / "gains.txt").string());
  EXPECT_EQ(gf.order, 2);
}

TEST(Cli, ReplayModeAndExitCodes) {
  TempDir tmp;
  // generate a small log through the library, replay it through the CLI
  SimEstimationScenario sc = acceptance_estimation_scenario(FilterVariant::kDirect, 1, 0.003);
  sc.duration_s = 1.0;
  const std::string log_path = (tmp.path / "imu.csv").string();
  write_imu_csv(log_path, simulate_imu_log(sc));
  EXPECT_EQ(run_cli("estimate --input " + log_path + " --out " + tmp.path.string() +
                    " --variant direct"),
            0);
  // replay metrics carry no truth-based fields
  const std::string metrics = slurp(tmp.path / "metrics_direct.txt");
  EXPECT_EQ(metrics.find("final_eta_tilde"), std::string::npos);

  // missing input file: I/O error
  EXPECT_EQ(run_cli("estimate --input " + (tmp.path / "nope.csv").string() + " --out " +
                    tmp.path.string()),
            3);
  // malformed input: I/O error with line information
  const std::string bad_path = (tmp.path / "bad.csv").string();
  {
    std::ofstream f(bad_path);
    f << "t,ax,ay,az,mx,my,mz,wx,wy,wz\n0.0,NaN,0,1,0,1,0,0,0,0\n";
  }
  EXPECT_EQ(run_cli("estimate --input " + bad_path + " --out " + tmp.path.string()), 3);
  // bad config: config error
  const std::string bad_cfg = (tmp.path / "bad.ini").string();
  {
    std::ofstream f(bad_cfg);
    f << "[filter]\ngamma = -1\n";
  }
  EXPECT_EQ(run_cli("estimate --config " + bad_cfg + " --out " + tmp.path.string() +
                    " --variant direct --order 1"),
            1);
  // numerically unstable discrete loop (gamma*dt >> 2 under Euler): divergence
  const std::string div_cfg = (tmp.path / "div.ini").string();
  {
    std::ofstream f(div_cfg);
    f << "[scenario]\nduration = 2\n[filter]\ngamma = 1000000\ndt = 0.01\n";
  }
  EXPECT_EQ(run_cli("estimate --config " + div_cfg + " --out " + tmp.path.string() +
                    " --variant direct --order 1"),
            2);
}
