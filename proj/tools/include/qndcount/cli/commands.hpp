#pragma once

// Command implementations behind the qndcount executable. Each command takes
// fully resolved options, writes its files, prints a short report to `out`
// and returns a process exit code.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <qndcount/analysis.hpp>
#include <qndcount/protocol.hpp>
#include <qndcount/serialization.hpp>

namespace qndcount::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kInconsistentRecord = 3,
  kOracleFailure = 4,
  kResourceGuard = 5,
};

// Maps a library exception onto an exit code and prints the diagnostic.
int report_error(const std::exception& e, std::ostream& err);

// Frequencies in MHz and times in us as typed by the user. Without `angular`
// the frequencies are ordinary and get multiplied by 2*pi.
struct Units {
  bool angular = false;

  double frequency(double mhz) const;  // -> rad/s
  static double time(double us) { return us * 1e-6; }
};

// "1..4", "1,3,5" or a mix such as "1..3,6".
std::vector<int> parse_int_list(const std::string& text);
// Comma-separated reals.
std::vector<double> parse_real_list(const std::string& text);

struct SimulateOptions {
  ProtocolParams params;
  InitialCondition initial;
  std::size_t trajectories = 1;
  std::string out_dir = ".";
  bool json = true;
  bool csv = true;
  Json config;  // resolved config echoed into every file
};

struct InferOptions {
  std::string record_path;
  std::vector<FockDistribution> candidates;
  std::optional<Posterior> prior;
  std::optional<double> omega;
  std::optional<double> gamma;
  std::optional<double> tau_eit;
  std::optional<int> atoms;
  bool ejection = false;
  std::string out_path;  // empty: stdout only
  Json config;
};

struct OracleCell {
  int atoms = 0;
  int n = 0;
  double gamma_over_omega = 0.0;
  double max_deviation = 0.0;
  bool pass = false;
};

// Fault injection: add delta * omega to H(row, col) of the j = 0 block of (n, N).
struct HCorruption {
  int n = 0;
  int atoms = 0;
  int row = 0;
  int col = 1;
  double delta = 0.25;
};

struct OracleOptions {
  std::vector<std::pair<int, int>> cells{{2, 1}, {3, 1}, {4, 2}, {5, 2}, {5, 3}};  // (N, n)
  std::vector<double> gamma_over_omega{0.0, 0.1, 1.0};
  int time_points = 50;
  double t_max_over_omega = 5.0;  // grid over [0, t_max / Omega]
  double omega = 1.0;
  double tolerance = 1e-6;
  int max_atoms = 5;
  std::optional<HCorruption> corrupt;
  std::string out_path;
  Json config;
};

std::vector<OracleCell> run_oracle_suite(const OracleOptions& opts);

struct FisherOptions {
  Regime regime = Regime::Noiseless;
  std::vector<int> n{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double omega = kTwoPi * 2.5e6;
  double gamma = kTwoPi * 0.3e6;
  std::vector<double> t;  // s; empty: a regime-appropriate time per n
};

struct DetectionOptions {
  std::vector<Regime> regimes{Regime::Noiseless, Regime::NoisyFrequency, Regime::SteadyState};
  std::vector<int> n;  // default 1..20
  double omega = kTwoPi * 2.5e6;
  double gamma = kTwoPi * 0.3e6;
};

struct SteadyStateOptions {
  std::vector<int> n{5};
  int atoms = 10;
  double omega = kTwoPi * 2.5e6;
  double gamma = kTwoPi * 0.3e6;
  double horizon_over_gamma = 30.0;  // propagate to horizon / gamma
  double alpha = 3.0;
  bool propagate = true;
};

struct OptimizeOptions {
  FidelityProblem problem;
  int cycles = 2;
  bool local = true;
  bool global = true;
  TauGrid grid;
  double max_tuples = 2.0e7;
};

struct AnalyzeOutput {
  std::string out_dir = ".";
  bool json = true;
  bool csv = true;
  Json config;
};

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_infer(const InferOptions& opts, std::ostream& out, std::ostream& err);
int cmd_oracle_check(const OracleOptions& opts, std::ostream& out, std::ostream& err);
int cmd_analyze_fisher(const FisherOptions& opts, const AnalyzeOutput& io, std::ostream& out,
                       std::ostream& err);
int cmd_analyze_detection(const DetectionOptions& opts, const AnalyzeOutput& io,
                          std::ostream& out, std::ostream& err);
int cmd_analyze_steady_state(const SteadyStateOptions& opts, const AnalyzeOutput& io,
                             std::ostream& out, std::ostream& err);
int cmd_analyze_optimize(const OptimizeOptions& opts, const AnalyzeOutput& io, std::ostream& out,
                         std::ostream& err);

// Full command line, including the --config merge. argv[0] is skipped.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qndcount::cli
