#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "trapscope/cli.hpp"
#include "trapscope/error.hpp"

namespace trapscope {
namespace {

namespace fs = std::filesystem;
using testing::kPi;

const char* kN3 =
    "N = 3\n"
    "a = 1\n"
    "b = 0\n"
    "v = 1, 1\n"
    "T = 2*pi\n"
    "lambda = 1, -1, 0\n"
    "M = 16\n"
    "directions = 2\n"
    "witness_budget = 40\n";

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("trapscope_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             std::to_string(counter++) + "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] fs::path file(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "trapscope");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

void expect_parse_error(const std::string& text, const std::string& fragment) {
  try {
    parse_config(text);
    FAIL() << "accepted:\n" << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(Config, ParsesReferenceFile) {
  const auto cfg = parse_config(kN3);
  EXPECT_EQ(cfg.levels, 3);
  EXPECT_DOUBLE_EQ(cfg.horizon, 2 * kPi);
  EXPECT_EQ(cfg.couplings, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(cfg.segments, 16);
  EXPECT_EQ(cfg.directions, 2);
  EXPECT_EQ(cfg.seed, 1u);
  EXPECT_EQ(cfg.out, "report.json");
  EXPECT_TRUE(cfg.witness_horizons.empty());
}

TEST(Config, PiSyntaxAndComments) {
  const auto cfg = parse_config(std::string(kN3) + "# comment line\nwitness_horizons = pi, 0.5 pi, 3*pi  # trailing\n");
  ASSERT_EQ(cfg.witness_horizons.size(), 3u);
  EXPECT_DOUBLE_EQ(cfg.witness_horizons[0], kPi);
  EXPECT_DOUBLE_EQ(cfg.witness_horizons[1], 0.5 * kPi);
  EXPECT_DOUBLE_EQ(cfg.witness_horizons[2], 3 * kPi);
}

TEST(Config, BundledFilesParse) {
  for (const char* name : {"n3.cfg", "n4.cfg"}) {
    const auto cfg = read_config_file(fs::path(TRAPSCOPE_CONFIG_DIR) / name);
    EXPECT_NO_THROW(cfg.instance(true)) << name;
  }
}

TEST(Config, ErrorsCarryLineNumbers) {
  expect_parse_error(std::string(kN3) + "colour = red\n", "line 10");
  expect_parse_error(std::string(kN3) + "N = 4\n", "duplicate");
  expect_parse_error("N = 3\na = one\nb = 0\nv = 1, 1\nT = 1\nlambda = 1, -1, 0\n", "line 2");
  expect_parse_error("N = 3\njust text\n", "line 2");
  expect_parse_error(std::string(kN3) + "seed = 1.5\n", "line 10");
  expect_parse_error("N = 3\na = 1\nb = 0\nv = 1, 1\nT = 1\n", "lambda");
  expect_parse_error(std::string(kN3) + "v2 = 1,\n", "line 10");
}

TEST(Config, RejectsBadSettings) {
  expect_parse_error("N = 3\na = 1\nb = 0\nv = 1, 1\nT = 1\nlambda = 1, -1, 0\nM = 4\n", "M");
  expect_parse_error("N = 3\na = 1\nb = 0\nv = 1, 1\nT = 1\nlambda = 1, -1, 0\ndirections = 1\n", "directions");
}

TEST(Config, ThreadsFromEnvironment) {
  ::unsetenv("TRAPSCOPE_THREADS");
  EXPECT_EQ(threads_from_environment(), 0);
  ::setenv("TRAPSCOPE_THREADS", "4", 1);
  EXPECT_EQ(threads_from_environment(), 4);
  for (const char* bad : {"0", "-2", "four", "3x"}) {
    ::setenv("TRAPSCOPE_THREADS", bad, 1);
    EXPECT_THROW(threads_from_environment(), Error) << bad;
  }
  ::unsetenv("TRAPSCOPE_THREADS");
}

TEST(Cli, CertifyReferenceConfig) {
  TempDir dir;
  const auto cfg = dir.file("n3.cfg", kN3);
  const auto report = dir.path() / "r.json";
  const auto r = run({"certify", cfg.string(), "--out", report.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(report));
  EXPECT_TRUE(fs::exists(dir.path() / "r.txt"));
  const auto doc = nlohmann::ordered_json::parse(slurp(report));
  EXPECT_EQ(doc["passed"], true);
  EXPECT_EQ(doc["claimed_order"], 3);
  EXPECT_EQ(slurp(dir.path() / "r.txt"), r.out);
}

TEST(Cli, CertifyReportsModelErrors) {
  TempDir dir;
  const auto degenerate = dir.file("deg.cfg", "N = 3\na = 1\nb = 1\nv = 1, 1\nT = 1\nlambda = 1, -1, 0\n");
  auto r = run({"certify", degenerate.string(), "--out", (dir.path() / "x.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("DegenerateSpectrum"), std::string::npos) << r.err;

  const auto ordering = dir.file("ord.cfg", "N = 3\na = 1\nb = 0\nv = 1, 1\nT = 1\nlambda = 0, -1, 0\n");
  r = run({"certify", ordering.string(), "--out", (dir.path() / "y.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("OrderingViolation"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir.path() / "y.json"));

  r = run({"certify", (dir.path() / "missing.cfg").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("IoError"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"certify"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, DifferentialOrders) {
  TempDir dir;
  const auto cfg = dir.file("unit.cfg", "N = 3\na = 1\nb = 0\nv = 1, 1\nT = 1\nlambda = 1, -1, 0\nM = 16\n");
  const auto ones = dir.path() / "ones.ctl";
  write_control_file(ones, PiecewiseControl::constant(1.0, 16, 1.0));
  const auto csv = dir.path() / "d.csv";

  auto r = run({"differential", cfg.string(), "--control", ones.string(), "--order", "2", "--csv", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("analytic     -1\n"), std::string::npos) << r.out;

  r = run({"differential", cfg.string(), "--control", ones.string(), "--order", "1", "--csv", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("analytic     0\n"), std::string::npos) << r.out;

  std::istringstream lines(slurp(csv));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "order,analytic,fitted,discrepancy");
  EXPECT_EQ(rows[1].rfind("2,-1,", 0), 0u) << rows[1];
  EXPECT_EQ(rows[2].rfind("1,0,", 0), 0u) << rows[2];

  r = run({"differential", cfg.string(), "--control", ones.string(), "--order", "5"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("InsufficientOrder"), std::string::npos) << r.err;
}

TEST(Cli, DifferentialRejectsGridMismatch) {
  TempDir dir;
  const auto cfg = dir.file("unit.cfg", "N = 3\na = 1\nb = 0\nv = 1, 1\nT = 1\nlambda = 1, -1, 0\n");
  const auto ctl = dir.path() / "wrong.ctl";
  write_control_file(ctl, PiecewiseControl::constant(2.0, 16, 1.0));
  const auto r = run({"differential", cfg.string(), "--control", ctl.string(), "--order", "2"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("GridMismatch"), std::string::npos) << r.err;
}

TEST(Cli, ControlFileRoundTrip) {
  TempDir dir;
  const auto f = random_direction(11, 24, 2 * kPi, true, 1.0);
  const auto p = dir.path() / "f.ctl";
  write_control_file(p, f);
  EXPECT_EQ(read_control_file(p), f);
  const auto cfg = dir.file("n3.cfg", std::string(kN3) + "");
  const auto r = run({"differential", cfg.string(), "--control", p.string(), "--order", "4"});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, ScanShapes) {
  TempDir dir;
  const auto cfg = dir.file("n3.cfg", kN3);
  const auto csv = dir.path() / "scan.csv";
  const auto r = run({"scan", cfg.string(), "--out", csv.string(), "--tmax", "0.2", "--points", "11"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(slurp(csv));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "seed,mean_zero,t,J");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string seed, mean_zero, t, j;
    std::getline(cells, seed, ',');
    std::getline(cells, mean_zero, ',');
    std::getline(cells, t, ',');
    std::getline(cells, j, ',');
    const double tv = std::stod(t);
    const double jv = std::stod(j);
    if (mean_zero == "1") {
      // Flat to second order, rising at fourth order.
      EXPECT_GE(jv, -1e-12) << line;
      EXPECT_LE(jv, 0.5 * tv * tv * tv * tv + 1e-15) << line;
    } else if (tv != 0.0) {
      EXPECT_LT(jv, 0.0) << line;
    }
  }
  EXPECT_EQ(rows, 22);
}

TEST(Cli, Controllability) {
  TempDir dir;
  auto r = run({"controllability", dir.file("n3.cfg", kN3).string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("saturated              yes"), std::string::npos) << r.out;

  r = run({"controllability",
           dir.file("n6.cfg", "N = 6\na = 1\nb = 0\nv = 1, 1, 1, 1, 1\nT = 1\nlambda = 1, -1, -1, -1, -1, 0\n")
               .string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto at = r.out.find("dimension  ");
  ASSERT_NE(at, std::string::npos) << r.out;
  EXPECT_GE(std::stoi(r.out.substr(at + 11)), 35) << r.out;

  r = run({"controllability", dir.file("bad.cfg", "N = 3\na = 1\n").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("ParseError"), std::string::npos) << r.err;
}

TEST(Cli, BinaryRuns) {
  const std::string cmd = std::string("\"") + TRAPSCOPE_BINARY + "\" --help > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
}

}  // namespace
}  // namespace trapscope
