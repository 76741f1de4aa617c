// Command-line parsing for the qndcount executable. A JSON --config file is
// turned into flags and spliced in ahead of the user's own flags; every
// option keeps its last value, so the command line wins.

#include <algorithm>
#include <iostream>
#include <sstream>

#include <CLI/CLI.hpp>

#include "qndcount/cli/commands.hpp"
#include <qndcount/errors.hpp>

namespace qndcount::cli {
namespace {

struct Formats {
  std::string list = "json,csv";

  void apply(bool& json, bool& csv) const {
    json = csv = false;
    std::stringstream ss(list);
    std::string f;
    while (std::getline(ss, f, ',')) {
      if (f == "json") {
        json = true;
      } else if (f == "csv") {
        csv = true;
      } else {
        throw DomainError("formats: unknown format '" + f + "' (json, csv)");
      }
    }
  }
};

std::string scalar_token(const Json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_double(v.get<double>());
  throw ParseError("config key '" + key + "' must be a string, number, boolean or array", 0);
}

// {"omega_mhz": 2.5, "ejection": true, "n": [1, 2]} ->
// --omega-mhz 2.5 --ejection --n 1,2
std::vector<std::string> config_tokens(const Json& cfg) {
  if (!cfg.is_object()) throw ParseError("config file must hold a JSON object", 1);
  std::vector<std::string> tokens;
  for (const auto& [key, v] : cfg.items()) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (v.is_boolean()) {
      tokens.push_back(v.get<bool>() ? "--" + flag : "--no-" + flag);
      continue;
    }
    tokens.push_back("--" + flag);
    if (v.is_array()) {
      std::string joined;
      for (const auto& e : v) {
        if (!joined.empty()) joined += ",";
        joined += scalar_token(e, key);
      }
      tokens.push_back(joined);
    } else {
      tokens.push_back(scalar_token(v, key));
    }
  }
  return tokens;
}

// Pulls --config out of args and splices the file's flags in after the
// subcommand words. Returns the config path, empty when absent.
std::string merge_config(std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw DomainError("--config needs a file argument");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return path;
  const auto tokens = config_tokens(parse_json(read_text_file(path)));
  std::size_t at = 0;
  while (at < args.size() && at < 2 && !args[at].empty() && args[at][0] != '-') ++at;
  if (at == 2 && args[0] != "analyze") at = 1;
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), tokens.begin(), tokens.end());
  return path;
}

std::vector<FockDistribution> delta_candidates(const std::vector<int>& ns) {
  std::vector<FockDistribution> out;
  for (int n : ns) {
    if (n < 0) throw DomainError("candidates: photon numbers must be >= 0");
    out.push_back(FockDistribution::delta(n));
  }
  return out;
}

Posterior posterior_from_list(const std::string& text) {
  Posterior p;
  p.weights = parse_real_list(text);
  return p;
}

Regime regime_arg(const std::string& s) {
  try {
    return regime_from_string(s);
  } catch (const std::exception&) {
    throw DomainError("regime: unknown regime '" + s + "'");
  }
}

// Candidate set options, used by several commands.
struct CandidateArgs {
  std::string list;
  std::string file;
  std::string prior;

  void add(CLI::App* cmd) {
    cmd->add_option("--candidates", list, "Fock candidates as photon numbers, e.g. 1..4");
    cmd->add_option("--candidates-file", file, "JSON candidates file (distributions and prior)");
    cmd->add_option("--prior", prior, "Comma-separated prior weights");
  }

  bool given() const { return !list.empty() || !file.empty(); }

  CandidatesFile resolve() const {
    CandidatesFile c;
    if (!list.empty() && !file.empty()) {
      throw DomainError("candidates: give either --candidates or --candidates-file");
    }
    if (!file.empty()) c = candidates_from_text(read_text_file(file));
    if (!list.empty()) c.candidates = delta_candidates(parse_int_list(list));
    if (!prior.empty()) c.prior = posterior_from_list(prior);
    return c;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  std::string config_path;
  try {
    config_path = merge_config(args);
  } catch (const std::exception& e) {
    return report_error(e, err);
  }

  CLI::App app{"Photon counting by repeated Rydberg-blockade measurements", "qndcount"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  bool angular = false;
  const auto add_units = [&](CLI::App* cmd) {
    cmd->add_flag("--angular,!--no-angular", angular,
                  "Frequencies are already angular (2*pi*MHz); no 2*pi is applied");
  };

  // ---- simulate -----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Monte Carlo of observation sequences");
  add_units(sim);
  std::optional<int> n_true;
  std::string init_pops, init_amps;
  CandidateArgs sim_cand;
  double s_omega = 2.5, s_gamma = 0.3, s_tau_eit = 0.3;
  ProtocolParams defaults;
  int s_atoms = defaults.atoms;
  std::optional<int> s_nmax;
  bool s_ejection = false;
  std::string s_schedule = "greedy", s_taus, s_mode = "auto";
  std::optional<double> s_tau, s_tau_min, s_tau_max;
  int s_grid_points = defaults.schedule.grid.points;
  double s_grid_phase = defaults.schedule.grid.max_phase;
  std::uint64_t s_seed = defaults.seed;
  int s_max_cycles = defaults.max_cycles;
  double s_threshold = defaults.threshold;
  int s_samples = 8;
  std::size_t s_traj = 1;
  std::string s_out = ".";
  Formats s_formats;
  sim->add_option("--n-true", n_true, "True photon number (Fock initial state)");
  sim->add_option("--initial-populations", init_pops, "Photon-number populations p_0,p_1,...");
  sim->add_option("--initial-amplitudes", init_amps, "Real amplitudes c_0,c_1,... of a pure state");
  sim_cand.add(sim);
  sim->add_option("--omega-mhz", s_omega, "Single-atom Rabi frequency Omega / 2pi [MHz]")->capture_default_str();
  sim->add_option("--gamma-mhz", s_gamma, "Dephasing rate gamma / 2pi [MHz]")->capture_default_str();
  sim->add_option("--tau-eit-us", s_tau_eit, "Measurement window [us]")->capture_default_str();
  sim->add_option("--atoms", s_atoms, "Atom number N")->capture_default_str();
  sim->add_option("--n-max", s_nmax, "Photon-number cutoff (default: from candidates)");
  sim->add_flag("--ejection,!--no-ejection", s_ejection, "Eject the Rydberg atom after each Rydberg outcome");
  sim->add_option("--schedule", s_schedule, "fixed, uniform, precomputed or greedy")->capture_default_str();
  sim->add_option("--tau-us", s_tau, "Drive time of the fixed schedule [us]");
  sim->add_option("--tau-min-us", s_tau_min, "Lower bound of the uniform schedule [us]");
  sim->add_option("--tau-max-us", s_tau_max, "Upper bound of the uniform schedule [us]");
  sim->add_option("--taus-us", s_taus, "Drive times of the precomputed schedule [us]");
  sim->add_option("--grid-points", s_grid_points, "Greedy search grid size")->capture_default_str();
  sim->add_option("--grid-max-phase", s_grid_phase, "Greedy grid extent Omega*tau [rad]")->capture_default_str();
  sim->add_option("--seed", s_seed, "Master seed")->capture_default_str();
  sim->add_option("--max-cycles", s_max_cycles, "Cycle budget per trajectory")->capture_default_str();
  sim->add_option("--threshold", s_threshold, "Posterior threshold for convergence")->capture_default_str();
  sim->add_option("--samples-per-window", s_samples, "Time-series samples per window")->capture_default_str();
  sim->add_option("--mode", s_mode, "auto, noiseless or noisy")->capture_default_str();
  sim->add_option("--trajectories", s_traj, "Number of trajectories")->capture_default_str();
  sim->add_option("--out", s_out, "Output directory")->capture_default_str();
  sim->add_option("--formats", s_formats.list, "Comma-separated subset of json,csv")->capture_default_str();

  // ---- infer ----------------------------------------------------------------
  auto* inf = app.add_subcommand("infer", "Posterior over candidates from a measurement record");
  add_units(inf);
  std::string i_record, i_out;
  CandidateArgs inf_cand;
  std::optional<double> i_omega, i_gamma, i_tau_eit;
  std::optional<int> i_atoms;
  bool i_ejection = false;
  inf->add_option("--record", i_record, "Measurement record JSON")->required();
  inf_cand.add(inf);
  inf->add_option("--omega-mhz", i_omega, "Omega / 2pi [MHz] (default: from the record)");
  inf->add_option("--gamma-mhz", i_gamma, "gamma / 2pi [MHz] (default: from the record)");
  inf->add_option("--tau-eit-us", i_tau_eit, "Measurement window [us] (default: from the record)");
  inf->add_option("--atoms", i_atoms, "Atom number N (default: from the record)");
  inf->add_flag("--ejection,!--no-ejection", i_ejection, "Record was taken with ejection");
  inf->add_option("--out", i_out, "Posterior JSON output file");

  // ---- oracle-check ---------------------------------------------------------
  auto* orc = app.add_subcommand("oracle-check", "Compare block and dense solvers");
  OracleOptions oo;
  std::string o_cells, o_ratios, o_corrupt, o_entry = "0,1";
  double o_delta = 0.25;
  orc->add_option("--cells", o_cells, "Cells as N:n pairs, e.g. 2:1,5:3");
  orc->add_option("--gamma-ratios", o_ratios, "gamma/Omega values, e.g. 0,0.1,1");
  orc->add_option("--points", oo.time_points, "Time points per cell")->capture_default_str();
  orc->add_option("--t-max", oo.t_max_over_omega, "Time horizon in units of 1/Omega")->capture_default_str();
  orc->add_option("--omega", oo.omega, "Omega [rad/s]")->capture_default_str();
  orc->add_option("--tolerance", oo.tolerance, "Allowed |dp_R|")->capture_default_str();
  orc->add_option("--max-atoms", oo.max_atoms, "Largest N allowed (at most 5)")->capture_default_str();
  orc->add_option("--corrupt-h", o_corrupt, "Test hook: corrupt H of cell N:n");
  orc->add_option("--corrupt-entry", o_entry, "Corrupted H entry row,col")->capture_default_str();
  orc->add_option("--corrupt-delta", o_delta, "Added to the corrupted entry")->capture_default_str();
  orc->add_option("--out", oo.out_path, "Report JSON output file");

  // ---- analyze --------------------------------------------------------------
  auto* ana = app.add_subcommand("analyze", "Detection-time and schedule analyses");
  ana->require_subcommand(1);
  AnalyzeOutput aio;
  Formats a_formats;
  const auto add_io = [&](CLI::App* cmd) {
    add_units(cmd);
    cmd->add_option("--out", aio.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--formats", a_formats.list, "Comma-separated subset of json,csv")->capture_default_str();
  };

  auto* fis = ana->add_subcommand("fisher", "Fisher information per photon number");
  add_io(fis);
  std::string f_regime = "noiseless", f_n = "1..10", f_t;
  double f_omega = 2.5, f_gamma = 0.3;
  fis->add_option("--regime", f_regime, "noiseless, noisy-frequency or steady-state")->capture_default_str();
  fis->add_option("--n", f_n, "Photon numbers")->capture_default_str();
  fis->add_option("--t-us", f_t, "Evaluation times [us] (default: one per n)");
  fis->add_option("--omega-mhz", f_omega, "Omega / 2pi [MHz]")->capture_default_str();
  fis->add_option("--gamma-mhz", f_gamma, "gamma / 2pi [MHz]")->capture_default_str();

  auto* det = ana->add_subcommand("detection-time", "Time to resolve n from n+1");
  add_io(det);
  std::string d_regime = "noiseless,noisy-frequency,steady-state", d_n = "1..20";
  double d_omega = 2.5, d_gamma = 0.3;
  det->add_option("--regime,--regimes", d_regime, "Comma-separated regimes")->capture_default_str();
  det->add_option("--n", d_n, "Photon numbers")->capture_default_str();
  det->add_option("--omega-mhz", d_omega, "Omega / 2pi [MHz]")->capture_default_str();
  det->add_option("--gamma-mhz", d_gamma, "gamma / 2pi [MHz]")->capture_default_str();

  auto* sst = ana->add_subcommand("steady-state", "Long-time sector populations");
  add_io(sst);
  SteadyStateOptions so;
  std::string ss_n = "5";
  double ss_omega = 2.5, ss_gamma = 0.3;
  sst->add_option("--n", ss_n, "Photon numbers")->capture_default_str();
  sst->add_option("--atoms", so.atoms, "Atom number N (raised to n when smaller)")->capture_default_str();
  sst->add_option("--omega-mhz", ss_omega, "Omega / 2pi [MHz]")->capture_default_str();
  sst->add_option("--gamma-mhz", ss_gamma, "gamma / 2pi [MHz]")->capture_default_str();
  sst->add_option("--horizon", so.horizon_over_gamma, "Propagation time in units of 1/gamma")->capture_default_str();
  sst->add_option("--alpha", so.alpha, "Dwell time alpha/gamma between measurements")->capture_default_str();
  sst->add_flag("--propagate,!--no-propagate", so.propagate, "Check against block propagation");

  auto* opt = ana->add_subcommand("optimize-schedule", "Drive-time schedules maximizing fidelity");
  add_io(opt);
  std::string p_toy, p_strategy = "both";
  CandidateArgs opt_cand;
  std::optional<double> p_omega;
  double p_gamma = 0.0, p_tau_eit = 0.0;
  int p_atoms = 0;
  OptimizeOptions po;
  opt->add_option("--toy", p_toy, "Built-in problem: two-candidate");
  opt_cand.add(opt);
  opt->add_option("--omega-mhz", p_omega, "Omega / 2pi [MHz] (toy default: Omega = 1 rad/s)");
  opt->add_option("--gamma-mhz", p_gamma, "gamma / 2pi [MHz]")->capture_default_str();
  opt->add_option("--tau-eit-us", p_tau_eit, "Measurement window [us]")->capture_default_str();
  opt->add_option("--atoms", p_atoms, "Atom number N (noisy problems)")->capture_default_str();
  opt->add_option("--cycles", po.cycles, "Number of cycles T")->capture_default_str();
  opt->add_option("--strategy", p_strategy, "local, global or both")->capture_default_str();
  opt->add_option("--grid-points", po.grid.points, "Grid size")->capture_default_str();
  opt->add_option("--grid-max-phase", po.grid.max_phase, "Grid extent Omega*tau [rad]")->capture_default_str();
  opt->add_option("--max-tuples", po.max_tuples, "Resource guard for the global search")->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const Units units{angular};
    const Json meta{{"config_file", config_path},
                    {"units", "rad/s and s"}};

    if (sim->parsed()) {
      SimulateOptions so_;
      ProtocolParams& p = so_.params;
      p.omega = units.frequency(s_omega);
      p.gamma = units.frequency(s_gamma);
      p.tau_eit = Units::time(s_tau_eit);
      p.atoms = s_atoms;
      p.ejection = s_ejection;
      p.seed = s_seed;
      p.max_cycles = s_max_cycles;
      p.threshold = s_threshold;
      p.samples_per_window = s_samples;
      if (s_mode == "auto") {
        p.mode = SimulationMode::Auto;
      } else if (s_mode == "noiseless") {
        p.mode = SimulationMode::NoiselessPure;
      } else if (s_mode == "noisy") {
        p.mode = SimulationMode::NoisyFixedN;
      } else {
        throw DomainError("mode: expected auto, noiseless or noisy");
      }
      Schedule::Kind kind{};
      try {
        kind = schedule_kind_from_string(s_schedule);
      } catch (const std::exception&) {
        throw DomainError("schedule: unknown kind '" + s_schedule + "'");
      }
      switch (kind) {
        case Schedule::Kind::Fixed:
          if (!s_tau) throw DomainError("tau-us: required by the fixed schedule");
          p.schedule = Schedule::fixed(Units::time(*s_tau));
          break;
        case Schedule::Kind::UniformRandom:
          if (!s_tau_min || !s_tau_max) {
            throw DomainError("tau-min-us/tau-max-us: required by the uniform schedule");
          }
          p.schedule = Schedule::uniform(Units::time(*s_tau_min), Units::time(*s_tau_max));
          break;
        case Schedule::Kind::Precomputed: {
          if (s_taus.empty()) throw DomainError("taus-us: required by the precomputed schedule");
          auto taus = parse_real_list(s_taus);
          for (double& t : taus) t = Units::time(t);
          p.schedule = Schedule::precomputed(taus);
          break;
        }
        case Schedule::Kind::AdaptiveGreedy:
          p.schedule = Schedule::greedy(TauGrid{s_grid_points, s_grid_phase});
          break;
      }

      int top = 0;
      if (sim_cand.given() || !sim_cand.prior.empty()) {
        const auto c = sim_cand.resolve();
        p.candidates = c.candidates;
        p.prior = c.prior;
        for (const auto& d : p.candidates) top = std::max(top, d.n_max());
      }
      const int given = (n_true ? 1 : 0) + (init_pops.empty() ? 0 : 1) + (init_amps.empty() ? 0 : 1);
      if (given != 1) {
        throw DomainError(
            "initial state: give exactly one of --n-true, --initial-populations, "
            "--initial-amplitudes");
      }
      if (n_true) {
        if (*n_true < 0) throw DomainError("n-true: must be >= 0");
        so_.initial = InitialCondition::fock(*n_true);
        top = std::max(top, *n_true);
      } else if (!init_pops.empty()) {
        so_.initial.populations.p = parse_real_list(init_pops);
        top = std::max(top, so_.initial.populations.n_max());
      } else {
        for (double a : parse_real_list(init_amps)) so_.initial.amplitudes.emplace_back(a, 0.0);
        top = std::max(top, static_cast<int>(so_.initial.amplitudes.size()) - 1);
      }
      p.n_max = s_nmax ? *s_nmax : (p.candidates.empty() ? std::max(top, defaults.n_max) : std::max(top, 1));
      so_.trajectories = s_traj;
      so_.out_dir = s_out;
      s_formats.apply(so_.json, so_.csv);
      Json init;
      if (!so_.initial.amplitudes.empty()) {
        Json amps = Json::array();
        for (const auto& a : so_.initial.amplitudes) amps.push_back({a.real(), a.imag()});
        init["amplitudes"] = amps;
      } else {
        init["populations"] = so_.initial.populations.p;
      }
      so_.config = meta;
      so_.config["command"] = "simulate";
      so_.config["params"] = to_json(p);
      so_.config["initial"] = init;
      so_.config["trajectories"] = s_traj;
      return cmd_simulate(so_, out, err);
    }

    if (inf->parsed()) {
      InferOptions io;
      io.record_path = i_record;
      if (!inf_cand.given()) throw DomainError("candidates: --candidates or --candidates-file is required");
      const auto c = inf_cand.resolve();
      io.candidates = c.candidates;
      io.prior = c.prior;
      if (i_omega) io.omega = units.frequency(*i_omega);
      if (i_gamma) io.gamma = units.frequency(*i_gamma);
      if (i_tau_eit) io.tau_eit = Units::time(*i_tau_eit);
      io.atoms = i_atoms;
      io.ejection = i_ejection;
      io.out_path = i_out;
      io.config = meta;
      io.config["command"] = "infer";
      io.config["record"] = i_record;
      io.config["ejection"] = i_ejection;
      return cmd_infer(io, out, err);
    }

    if (orc->parsed()) {
      const auto pairs = [](const std::string& text, const char* what) {
        std::vector<std::pair<int, int>> cells;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string::npos) {
            throw DomainError(std::string(what) + ": expected N:n pairs, got '" + item + "'");
          }
          cells.emplace_back(parse_int_list(item.substr(0, colon)).front(),
                             parse_int_list(item.substr(colon + 1)).front());
        }
        return cells;
      };
      if (!o_cells.empty()) oo.cells = pairs(o_cells, "cells");
      if (!o_ratios.empty()) oo.gamma_over_omega = parse_real_list(o_ratios);
      if (!o_corrupt.empty()) {
        const auto cell = pairs(o_corrupt, "corrupt-h").front();
        const auto rc = parse_int_list(o_entry);
        if (rc.size() != 2) throw DomainError("corrupt-entry: expected row,col");
        oo.corrupt = HCorruption{cell.second, cell.first, rc[0], rc[1], o_delta};
      }
      Json cells = Json::array();
      for (const auto& [a, n] : oo.cells) cells.push_back({a, n});
      oo.config = meta;
      oo.config["command"] = "oracle-check";
      oo.config["cells"] = cells;
      oo.config["gamma_over_omega"] = oo.gamma_over_omega;
      oo.config["time_points"] = oo.time_points;
      oo.config["t_max_over_omega"] = oo.t_max_over_omega;
      oo.config["omega"] = oo.omega;
      oo.config["tolerance"] = oo.tolerance;
      if (oo.corrupt) {
        oo.config["corrupt"] = Json{{"N", oo.corrupt->atoms}, {"n", oo.corrupt->n},
                                    {"row", oo.corrupt->row}, {"col", oo.corrupt->col},
                                    {"delta", oo.corrupt->delta}};
      }
      return cmd_oracle_check(oo, out, err);
    }

    a_formats.apply(aio.json, aio.csv);
    aio.config = meta;

    if (fis->parsed()) {
      FisherOptions fo;
      fo.regime = regime_arg(f_regime);
      fo.n = parse_int_list(f_n);
      fo.omega = units.frequency(f_omega);
      fo.gamma = units.frequency(f_gamma);
      if (!f_t.empty()) {
        fo.t = parse_real_list(f_t);
        for (double& t : fo.t) t = Units::time(t);
      }
      aio.config["command"] = "analyze fisher";
      aio.config["regime"] = std::string(to_string(fo.regime));
      aio.config["n"] = fo.n;
      aio.config["omega"] = fo.omega;
      aio.config["gamma"] = fo.gamma;
      aio.config["t_s"] = fo.t;
      return cmd_analyze_fisher(fo, aio, out, err);
    }

    if (det->parsed()) {
      DetectionOptions dopt;
      dopt.regimes.clear();
      std::stringstream ss(d_regime);
      std::string r;
      while (std::getline(ss, r, ',')) dopt.regimes.push_back(regime_arg(r));
      dopt.n = parse_int_list(d_n);
      dopt.omega = units.frequency(d_omega);
      dopt.gamma = units.frequency(d_gamma);
      Json names = Json::array();
      for (Regime g : dopt.regimes) names.push_back(std::string(to_string(g)));
      aio.config["command"] = "analyze detection-time";
      aio.config["regimes"] = names;
      aio.config["n"] = dopt.n;
      aio.config["omega"] = dopt.omega;
      aio.config["gamma"] = dopt.gamma;
      return cmd_analyze_detection(dopt, aio, out, err);
    }

    if (sst->parsed()) {
      so.n = parse_int_list(ss_n);
      so.omega = units.frequency(ss_omega);
      so.gamma = units.frequency(ss_gamma);
      aio.config["command"] = "analyze steady-state";
      aio.config["n"] = so.n;
      aio.config["N"] = so.atoms;
      aio.config["omega"] = so.omega;
      aio.config["gamma"] = so.gamma;
      aio.config["horizon_over_gamma"] = so.horizon_over_gamma;
      aio.config["alpha"] = so.alpha;
      aio.config["propagate"] = so.propagate;
      return cmd_analyze_steady_state(so, aio, out, err);
    }

    if (opt->parsed()) {
      if (!p_toy.empty()) {
        if (p_toy != "two-candidate" && p_toy != "appendix-c") {
          throw DomainError("toy: unknown problem '" + p_toy + "'");
        }
        if (opt_cand.given()) throw DomainError("toy: cannot be combined with --candidates");
        po.problem = two_candidate_toy();
        if (!opt_cand.prior.empty()) po.problem.prior = posterior_from_list(opt_cand.prior);
      } else {
        if (!opt_cand.given()) throw DomainError("candidates: give --toy or a candidate set");
        const auto c = opt_cand.resolve();
        po.problem.candidates = c.candidates;
        po.problem.prior = c.prior ? *c.prior : Posterior::uniform(c.candidates.size());
        if (!p_omega) throw DomainError("omega-mhz: required for a custom problem");
      }
      if (p_omega) po.problem.omega = units.frequency(*p_omega);
      po.problem.noise.gamma = units.frequency(p_gamma);
      po.problem.noise.tau_eit = Units::time(p_tau_eit);
      po.problem.noise.atoms = p_atoms;
      if (p_strategy == "local") {
        po.global = false;
      } else if (p_strategy == "global") {
        po.local = false;
      } else if (p_strategy != "both") {
        throw DomainError("strategy: expected local, global or both");
      }
      Json cands = Json::array();
      for (const auto& c : po.problem.candidates) cands.push_back(c.p);
      aio.config["command"] = "analyze optimize-schedule";
      aio.config["candidates"] = cands;
      aio.config["prior"] = po.problem.prior.weights;
      aio.config["omega"] = po.problem.omega;
      aio.config["gamma"] = po.problem.noise.gamma;
      aio.config["tau_eit"] = po.problem.noise.tau_eit;
      aio.config["N"] = po.problem.noise.atoms;
      aio.config["cycles"] = po.cycles;
      aio.config["grid"] = Json{{"points", po.grid.points}, {"max_phase", po.grid.max_phase}};
      aio.config["max_tuples"] = po.max_tuples;
      return cmd_analyze_optimize(po, aio, out, err);
    }
    err << "no command given\n";
    return kUsage;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

}  // namespace qndcount::cli
