#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "blaschke/cli.hpp"

namespace fs = std::filesystem;
using namespace blaschke;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("blaschke_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                         ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& content = {}) const {
    const fs::path p = path_ / name;
    if (!content.empty()) std::ofstream(p) << content;
    return p.string();
  }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// smallest grid whose x = n / (1 - r) spans the required factor of 32
const std::vector<std::string> kSmallGrid{"--n", "4,64", "--r", "0.5,0.75"};

}  // namespace

TEST(CliParsing, FunctionLiterals) {
  EXPECT_NEAR(std::abs(eval(cli::parse_function("poly:1,2,3"), 0.5) - 2.75), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(eval(cli::parse_function("rational:1|1,-0.5"), 0.5) - 1.0 / 0.75), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(eval(cli::parse_function("kernel:0.5,0"), 0.5) - 1.0 / 0.75), 0.0, 1e-14);
  const TestFunction tf = test_function(4, 0.5, 1);
  EXPECT_NEAR(std::abs(eval(cli::parse_function("qn:4,0.5,1"), 0.3) - eval(tf.expr, 0.3)), 0.0, 1e-12);
  for (const char* bad : {"poly:", "poly:1,x", "rational:1", "qn:4,0.5", "kernel:1", "sin:1", ""})
    EXPECT_THROW(cli::parse_function(bad), DomainError) << bad;
}

TEST(CliParsing, DoublesUseSeventeenDigits) {
  EXPECT_EQ(cli::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(cli::format_double(1.0), "1");
  EXPECT_EQ(std::stod(cli::format_double(std::numbers::pi)), std::numbers::pi);
}

TEST(CliQuotient, GoldenRatioOnADoubleZero) {
  TempDir dir;
  const std::string sigma = dir.file("sigma.txt", "0 0\n0 0\n");
  const Outcome o = run_cli({"quotient", "--sigma", sigma, "--f", "poly:1,1"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NEAR(std::stod(o.out), (1.0 + std::sqrt(5.0)) / 2.0, 1e-9);
  EXPECT_EQ(o.out.substr(0, 5), "1.618");

  const Outcome j = run_cli({"--format", "json", "quotient", "--sigma", sigma, "--f", "poly:1,1"});
  ASSERT_EQ(j.code, 0) << j.err;
  const auto parsed = nlohmann::json::parse(j.out);
  EXPECT_EQ(parsed["n"].get<int>(), 2);
  EXPECT_NEAR(parsed["quotient_norm"].get<double>(), (1.0 + std::sqrt(5.0)) / 2.0, 1e-9);
}

TEST(CliQuotient, PoleInsideTheDiskIsAValidationError) {
  TempDir dir;
  const std::string sigma = dir.file("sigma.txt", "0.5 0\n");
  const Outcome o = run_cli({"quotient", "--sigma", sigma, "--f", "rational:1|1,-2"});
  EXPECT_EQ(o.code, 2);
  EXPECT_FALSE(o.err.empty());
}

TEST(CliInterp, CsvHeaderRowsAndSummary) {
  TempDir dir;
  const std::string out = dir.file("out.csv");
  std::vector<std::string> args{"--out", out, "interp", "--space", "hardy", "--p", "2"};
  args.insert(args.end(), kSmallGrid.begin(), kSmallGrid.end());
  const Outcome o = run_cli(args);
  ASSERT_EQ(o.code, 0) << o.err;
  const auto lines = lines_of(slurp(out));
  ASSERT_EQ(lines.size(), 5U);
  EXPECT_EQ(lines[0], "n,r,x,lower,fejer,supnorm");
  EXPECT_EQ(lines[1].substr(0, 6), "4,0.5,");
  EXPECT_EQ(lines[4].substr(0, 8), "64,0.75,");
  EXPECT_FALSE(fs::exists(out + ".tmp"));

  // summary on stdout, and each row matches the library
  const auto summary = nlohmann::json::parse(o.out);
  EXPECT_EQ(summary["subcommand"], "interp");
  EXPECT_TRUE(summary["fit"].contains("slope"));
  const auto cells = cli::split(lines[1], ',');
  const InterpResult ref = interp_lower(4, 0.5, Space::hardy(2.0));
  EXPECT_EQ(cells[3], cli::format_double(ref.lower));
  EXPECT_EQ(cells[5], cli::format_double(ref.supnorm));
}

TEST(CliInterp, JsonFormat) {
  std::vector<std::string> args{"--format", "json", "interp", "--space", "bergman", "--p", "2", "--beta", "0"};
  args.insert(args.end(), kSmallGrid.begin(), kSmallGrid.end());
  const Outcome o = run_cli(args);
  ASSERT_EQ(o.code, 0) << o.err;
  const auto rows = nlohmann::json::parse(o.out);
  ASSERT_EQ(rows.size(), 4U);
  EXPECT_EQ(rows[0]["n"].get<int>(), 4);
  EXPECT_DOUBLE_EQ(rows[0]["lower"].get<double>(), interp_lower(4, 0.5, Space::bergman(2.0, 0.0)).lower);
}

TEST(CliEmbedAndKernels, HeadersAndValidation) {
  std::vector<std::string> embed{"embed", "--p", "2", "--beta", "0", "--n", "16,128", "--r", "0.5,0.9"};
  Outcome o = run_cli(embed);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(lines_of(o.out)[0], "n,r,x,m,N,lower,supnorm,bergman");

  o = run_cli({"kernel-norms", "--target", "hq", "--q", "inf", "--n", "4,64", "--r", "0.5,0.75"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(lines_of(o.out)[0], "n,r,x,value");

  // n <= 2N is rejected by the embedding estimator
  EXPECT_EQ(run_cli({"embed", "--p", "2", "--beta", "0", "--n", "4,128", "--r", "0.5,0.9"}).code, 2);
  // as is a grid whose x range is too narrow for a slope fit
  EXPECT_EQ(run_cli({"interp", "--n", "8,16", "--r", "0.5"}).code, 2);
  EXPECT_EQ(run_cli({"kernel-norms", "--target", "nope"}).code, 2);
  EXPECT_EQ(run_cli({"kernel-norms", "--target", "daq", "--q", "2", "--gamma", "1.5"}).code, 2);
}

TEST(CliFit, RecoversTheSlopeOfASquare) {
  TempDir dir;
  std::string csv = "x,lower\n";
  for (double x : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) csv += cli::format_double(x) + "," + cli::format_double(x * x) + "\n";
  const std::string in = dir.file("synthetic.csv", csv);
  const Outcome o = run_cli({"fit", "--input", in, "--x-col", "x", "--y-col", "lower"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto j = nlohmann::json::parse(o.out);
  EXPECT_NEAR(j["slope"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(j["intercept"].get<double>(), 0.0, 1e-12);
  EXPECT_LT(j["max_residual"].get<double>(), 1e-12);

  EXPECT_EQ(run_cli({"fit", "--input", in, "--y-col", "missing"}).code, 2);
  EXPECT_EQ(run_cli({"fit", "--input", dir.file("absent.csv")}).code, 2);
}

TEST(CliConfig, FileValuesAreOverriddenByFlags) {
  TempDir dir;
  const std::string cfg = dir.file("run.cfg", "# sweep manifest\nn = 4,64\nr = 0.5,0.75\np = 1\n");
  const Outcome from_file = run_cli({"interp", "--config", cfg});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  auto lines = lines_of(from_file.out);
  ASSERT_EQ(lines.size(), 5U);
  EXPECT_EQ(cli::split(lines[1], ',')[3], cli::format_double(interp_lower(4, 0.5, Space::hardy(1.0)).lower));

  const Outcome overridden = run_cli({"interp", "--config", cfg, "--p", "2"});
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  lines = lines_of(overridden.out);
  EXPECT_EQ(cli::split(lines[1], ',')[3], cli::format_double(interp_lower(4, 0.5, Space::hardy(2.0)).lower));

  EXPECT_EQ(run_cli({"interp", "--config", dir.file("nowhere.cfg")}).code, 2);
  EXPECT_EQ(run_cli({"interp", "--config", dir.file("bad.cfg", "n 8\n")}).code, 2);
}

TEST(CliConfig, ShippedSampleParses) {
  const auto kv = cli::read_config(std::string(SOURCE_DIR) + "/tools/samples/interp_hardy2.cfg");
  EXPECT_FALSE(kv.empty());
  const PointSequence s = read_sigma_file(std::string(SOURCE_DIR) + "/tools/samples/sigma_mixed.txt");
  EXPECT_GT(s.n(), 0);
}

TEST(CliErrors, ExitCodes) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"interp", "--p", "abc"}).code, 2);
  EXPECT_EQ(run_cli({"interp", "--p", "0.5"}).code, 2);
  EXPECT_EQ(run_cli({"interp", "--r", "1.0"}).code, 2);
  EXPECT_EQ(run_cli({"interp", "--space", "sobolev"}).code, 2);
  EXPECT_EQ(run_cli({"--format", "xml", "selftest"}).code, 2);
  EXPECT_EQ(run_cli({"quotient", "--f", "poly:1"}).code, 2);
  const Outcome o = run_cli({"interp", "--p", "0.5"});
  EXPECT_NE(o.err.find("invalid input"), std::string::npos);
}

TEST(CliSelftest, AllChecksPass) {
  const Outcome o = run_cli({"selftest"});
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_EQ(o.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(lines_of(o.out).size(), 8U);
}

TEST(CliDeterminism, ByteIdenticalAcrossRunsAndWorkerCounts) {
  TempDir dir;
  const std::string a = dir.file("a.csv"), b = dir.file("b.csv");
  std::vector<std::string> base{"interp", "--space", "bergman", "--p", "2", "--beta", "1"};
  base.insert(base.end(), kSmallGrid.begin(), kSmallGrid.end());
  auto with = [&](std::vector<std::string> head) {
    head.insert(head.end(), base.begin(), base.end());
    return head;
  };
  ASSERT_EQ(run_cli(with({"--seed", "5", "--jobs", "1", "--out", a})).code, 0);
  ASSERT_EQ(run_cli(with({"--seed", "5", "--jobs", "4", "--out", b})).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a).find('\r'), std::string::npos);
}

TEST(CliBinary, ExitCodesFromTheExecutable) {
  TempDir dir;
  const std::string sigma = dir.file("sigma.txt", "0 0\n0 0\n");
  const std::string out = dir.file("q.txt");
  const std::string bin = BLASCHKE_LAB_BINARY;
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(bin + " quotient --sigma " + sigma + " --f poly:1,1"), 0);
  EXPECT_EQ(status(bin + " quotient --sigma " + sigma + " --f poly:"), 2);
  EXPECT_EQ(status(bin + " nosuchcommand"), 2);
  EXPECT_EQ(std::system((bin + " quotient --sigma " + sigma + " --f poly:1,1 > " + out).c_str()), 0);
  EXPECT_NEAR(std::stod(slurp(out)), (1.0 + std::sqrt(5.0)) / 2.0, 1e-9);
}
