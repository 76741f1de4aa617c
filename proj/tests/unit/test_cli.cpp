#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include <qndcount/cli/commands.hpp>
#include <qndcount/errors.hpp>
#include <qndcount/serialization.hpp>

namespace qndcount::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "qndcount");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qndcount_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(CliLists, IntegerRangesAndReals) {
  EXPECT_EQ(parse_int_list("1..4"), (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(parse_int_list("2,5..6"), (std::vector<int>{2, 5, 6}));
  EXPECT_THROW(parse_int_list("4..1"), DomainError);
  EXPECT_THROW(parse_int_list("x"), DomainError);
  EXPECT_EQ(parse_real_list("0.5,1e-3"), (std::vector<double>{0.5, 1e-3}));
  EXPECT_THROW(parse_real_list("1,,2"), DomainError);
}

TEST(CliUnits, OrdinaryFrequenciesGetTwoPi) {
  EXPECT_DOUBLE_EQ(Units{false}.frequency(2.5), kTwoPi * 2.5e6);
  EXPECT_DOUBLE_EQ(Units{true}.frequency(2.5), 2.5e6);
  EXPECT_DOUBLE_EQ(Units::time(0.3), 0.3e-6);
}

TEST(CliExitCodes, UsageErrors) {
  EXPECT_EQ(invoke({}).code, kUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kUsage);
  EXPECT_EQ(invoke({"analyze"}).code, kUsage);
  EXPECT_EQ(invoke({"simulate", "--candidates", "1..4"}).code, kUsage);
  const auto r = invoke({"simulate", "--n-true", "2", "--threshold", "2"});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_NE(r.err.find("threshold"), std::string::npos);
  EXPECT_EQ(invoke({"--help"}).code, kOk);
}

TEST(CliExitCodes, OracleFailureAndResourceGuard) {
  EXPECT_EQ(invoke({"oracle-check", "--cells", "3:1", "--gamma-ratios", "0.1"}).code, kOk);
  const auto bad = invoke({"oracle-check", "--cells", "3:1,4:2", "--gamma-ratios", "0", "--corrupt-h", "4:2"});
  EXPECT_EQ(bad.code, kOracleFailure);
  EXPECT_NE(bad.out.find("FAIL  N=4 n=2"), std::string::npos);
  EXPECT_EQ(invoke({"oracle-check", "--cells", "6:2"}).code, kResourceGuard);
  EXPECT_EQ(invoke({"analyze", "optimize-schedule", "--toy", "two-candidate", "--cycles", "3",
                    "--strategy", "global", "--out", scratch("guard").string()})
                .code,
            kResourceGuard);
}

TEST(CliInfer, EmptyRecordEchoesPriorAndInconsistentRecordFails) {
  const fs::path dir = scratch("infer");
  write_text_file((dir / "empty.json").string(), "{\"entries\": []}");
  write_text_file((dir / "click.json").string(),
                  "{\"entries\": [{\"tau_s\": 1e-7, \"outcome\": \"Rydberg\"}]}");
  const std::string post = (dir / "post.json").string();
  auto r = invoke({"infer", "--record", (dir / "empty.json").string(), "--candidates", "1,2",
                   "--prior", "0.3,0.7", "--omega-mhz", "2.5", "--out", post});
  ASSERT_EQ(r.code, kOk) << r.err;
  const Json j = parse_json(read_text_file(post));
  EXPECT_EQ(j.at("weights"), Json({0.3, 0.7}));
  r = invoke({"infer", "--record", (dir / "click.json").string(), "--candidates", "0",
              "--omega-mhz", "2.5"});
  EXPECT_EQ(r.code, kInconsistentRecord);
  write_text_file((dir / "broken.json").string(), "{\n\"entries\": [\n{\"tau_s\": -1, \"outcome\": 0}\n]}");
  r = invoke({"infer", "--record", (dir / "broken.json").string(), "--candidates", "1",
              "--omega-mhz", "2.5"});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
}

TEST(CliSimulate, ConfigFileIsOverriddenByFlags) {
  const fs::path dir = scratch("config");
  write_text_file((dir / "cfg.json").string(),
                  "{\"n_true\": 2, \"candidates\": \"1..3\", \"seed\": 5, \"ejection\": true, "
                  "\"max_cycles\": 4, \"samples_per_window\": 0}");
  const auto r = invoke({"simulate", "--config", (dir / "cfg.json").string(), "--seed", "6",
                         "--no-ejection", "--out", dir.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  const Json s = parse_json(read_text_file((dir / "summary.json").string()));
  EXPECT_EQ(s.at("config").at("params").at("seed"), 6);
  EXPECT_EQ(s.at("config").at("params").at("ejection"), false);
  EXPECT_EQ(s.at("config").at("params").at("max_cycles"), 4);
}

TEST(CliSimulate, NoiselessFidelityColumnIsOne) {
  const fs::path dir = scratch("noiseless");
  ASSERT_EQ(invoke({"simulate", "--n-true", "3", "--gamma-mhz", "0", "--tau-eit-us", "0",
                    "--candidates", "1..4", "--out", dir.string()})
                .code,
            kOk);
  std::istringstream in(read_text_file((dir / "timeseries.csv").string()));
  std::string line;
  for (int i = 0; i < 3; ++i) std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    ASSERT_GE(cells.size(), 7u);
    EXPECT_EQ(cells[6], "1");
    ++rows;
  }
  EXPECT_GT(rows, 0);
}

TEST(CliAnalyze, TablesFromExamples) {
  const fs::path dir = scratch("analyze");
  auto r = invoke({"analyze", "steady-state", "--n", "5", "--out", dir.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("0.166667 / 0.833333"), std::string::npos);
  r = invoke({"analyze", "detection-time", "--regime", "noiseless", "--n", "1..20", "--out", dir.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  const Json j = parse_json(read_text_file((dir / "detection_time.json").string()));
  const auto t = j.at("regimes").at("noiseless").at("t_star_s").get<std::vector<double>>();
  ASSERT_EQ(t.size(), 20u);
  for (int n = 1; n <= 20; ++n) EXPECT_DOUBLE_EQ(t[n - 1], std::sqrt(n * 1.0) / (kTwoPi * 2.5e6));
  r = invoke({"analyze", "optimize-schedule", "--toy", "appendix-c", "--strategy", "local", "--out", dir.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("F1=96.59%"), std::string::npos);
  EXPECT_NE(r.out.find("F2=99.84%"), std::string::npos);
  EXPECT_EQ(invoke({"analyze", "fisher", "--regime", "sideways"}).code, kUsage);
}

}  // namespace
}  // namespace qndcount::cli
