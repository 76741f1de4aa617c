#include "qndcount/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <qndcount/dense_oracle.hpp>
#include <qndcount/dynamics.hpp>
#include <qndcount/errors.hpp>

namespace qndcount::cli {
namespace {

namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write '" + path + "'");
  return f;
}

void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<std::string> weight_columns(std::size_t k) {
  std::vector<std::string> cols;
  for (std::size_t a = 0; a < k; ++a) cols.push_back("w" + std::to_string(a));
  return cols;
}

std::string percent(double f) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << 100.0 * f << "%";
  return ss.str();
}

// Least-squares slope of log t against log n.
double loglog_slope(const std::vector<int>& n, const std::vector<double>& t) {
  if (n.size() < 2) return 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double x = std::log(static_cast<double>(n[i]));
    const double y = std::log(t[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

int report_error(const std::exception& e, std::ostream& err) {
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    err << "parse error: " << p->what() << "\n";
    return kUsage;
  }
  if (dynamic_cast<const DomainError*>(&e) != nullptr) {
    err << "invalid configuration: " << e.what() << "\n";
    return kUsage;
  }
  if (dynamic_cast<const InconsistentRecordError*>(&e) != nullptr) {
    err << "inconsistent record: " << e.what() << "\n";
    return kInconsistentRecord;
  }
  if (dynamic_cast<const ResourceError*>(&e) != nullptr) {
    err << "resource guard: " << e.what() << "\n";
    return kResourceGuard;
  }
  err << "error: " << e.what() << "\n";
  return kFailure;
}

double Units::frequency(double mhz) const { return (angular ? 1.0 : kTwoPi) * mhz * 1e6; }

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw DomainError("'" + text + "' is not an integer list");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_int(item));
      continue;
    }
    const int lo = to_int(item.substr(0, dots));
    const int hi = to_int(item.substr(dots + 2));
    if (hi < lo) throw DomainError("range '" + item + "' is empty");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw DomainError("empty integer list");
  return out;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw DomainError("'" + text + "' is not a number list");
    out.push_back(v);
  }
  if (out.empty()) throw DomainError("empty number list");
  return out;
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    opts.params.validate();
    if (opts.trajectories < 1) throw DomainError("trajectories must be >= 1");
    ensure_dir(opts.out_dir);
    const auto logs = run_batch(opts.initial, opts.params, opts.trajectories);
    const std::size_t k = opts.params.resolved_candidates().size();
    const BatchSummary summary = summarize(logs, k);

    if (opts.json) {
      auto f = open_out(join_path(opts.out_dir, "trajectories.jsonl"));
      write_trajectories(f, opts.config, logs);
    }
    if (opts.csv) {
      auto fc = open_out(join_path(opts.out_dir, "cycles.csv"));
      std::vector<std::string> cols{"trajectory", "cycle",    "tau_s",  "outcome",
                                    "probability", "fidelity", "overlap"};
      for (auto& c : weight_columns(k)) cols.push_back(c);
      CsvWriter cycles(fc, "cycles", opts.config, cols);
      for (const auto& log : logs) {
        for (std::size_t i = 0; i < log.cycles(); ++i) {
          const auto& e = log.record.entries[i];
          std::vector<std::string> row{std::to_string(log.index), std::to_string(i + 1),
                                       format_double(e.tau), std::string(to_string(e.outcome)),
                                       format_double(log.outcome_probabilities[i]),
                                       format_double(log.fidelity[i]),
                                       format_double(log.overlap[i])};
          for (double w : log.posteriors[i].weights) row.push_back(format_double(w));
          cycles.row(row);
        }
      }

      auto ft = open_out(join_path(opts.out_dir, "timeseries.csv"));
      std::vector<std::string> tcols{"trajectory", "time_s",  "cycle",    "window",
                                     "p_no_rydberg", "p_rydberg", "fidelity", "overlap"};
      for (auto& c : weight_columns(k)) tcols.push_back(c);
      CsvWriter series(ft, "timeseries", opts.config, tcols);
      const Posterior prior = opts.params.resolved_prior();
      for (const auto& log : logs) {
        for (const auto& s : log.samples) {
          // Inference available at this time: everything before this cycle.
          const Posterior& w =
              s.cycle <= 1 ? prior : log.posteriors[static_cast<std::size_t>(s.cycle - 2)];
          std::vector<std::string> row{
              std::to_string(log.index), format_double(s.time), std::to_string(s.cycle),
              s.cycle == 0 ? "initial" : (s.driving ? "drive" : "measure"),
              format_double(s.p_no_rydberg), format_double(s.p_rydberg),
              format_double(s.fidelity), format_double(s.overlap)};
          for (double v : w.weights) row.push_back(format_double(v));
          series.row(row);
        }
      }
    }
    // Wall time stays out of the files so reruns are byte-identical.
    Json sj{{"schema_version", kSchemaVersion}, {"config", opts.config}, {"summary", to_json(summary)}};
    sj["summary"].erase("wall_time_s");
    write_json_file(join_path(opts.out_dir, "summary.json"), sj);

    out << "trajectories " << summary.trajectories << ", converged " << summary.converged << " ("
        << percent(summary.trajectories ? static_cast<double>(summary.converged) /
                                              static_cast<double>(summary.trajectories)
                                        : 0.0)
        << "), mean cycles " << summary.mean_cycles << ", wall time " << summary.wall_time_s
        << " s\n";
    for (std::size_t a = 0; a < k; ++a) {
      out << "  candidate " << a << ": " << summary.inferred_counts[a] << "\n";
    }
    return kOk;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_infer(const InferOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const RecordFile rf = record_from_text(read_text_file(opts.record_path));
    const auto pick = [](const auto& flag, auto from_file, const char* name) {
      if (flag) return *flag;
      if (from_file) return *from_file;
      throw DomainError(std::string("missing ") + name + " (flag or record params)");
    };
    const std::optional<RecordParams>& rp = rf.params;
    const double omega = pick(opts.omega, rp ? std::optional<double>(rp->omega) : std::nullopt, "omega");
    NoiseConfig noise;
    noise.gamma = opts.gamma.value_or(rp ? rp->gamma : 0.0);
    noise.tau_eit = opts.tau_eit.value_or(rp ? rp->tau_eit : 0.0);
    noise.atoms = opts.atoms.value_or(rp ? rp->atoms : 0);
    noise.ejection = opts.ejection;
    if (opts.candidates.empty()) throw DomainError("no candidates given");
    const Posterior prior = opts.prior ? *opts.prior : Posterior::uniform(opts.candidates.size());

    const auto trace = posterior_trace(rf.record, opts.candidates, prior, omega, noise);
    Json config = opts.config;
    config["omega"] = omega;
    config["gamma"] = noise.gamma;
    config["tau_eit"] = noise.tau_eit;
    config["N"] = noise.atoms;
    const Json result = posterior_file(opts.candidates, trace, config);
    if (!opts.out_path.empty()) write_json_file(opts.out_path, result);

    const auto& w = trace.back().weights;
    out << "cycles " << rf.record.size() << ", MLE candidate " << mle(trace.back()) << "\n";
    for (std::size_t a = 0; a < w.size(); ++a) out << "  w" << a << " = " << w[a] << "\n";
    return kOk;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

std::vector<OracleCell> run_oracle_suite(const OracleOptions& opts) {
  if (opts.time_points < 2) throw DomainError("oracle time grid needs >= 2 points");
  if (!(opts.omega > 0.0)) throw DomainError("oracle omega must be > 0");
  if (opts.max_atoms > 5) {
    throw ResourceError("oracle check is limited to N <= 5 (asked for " +
                        std::to_string(opts.max_atoms) + ")");
  }
  std::vector<double> times(static_cast<std::size_t>(opts.time_points));
  const double t_max = opts.t_max_over_omega / opts.omega;
  for (int i = 0; i < opts.time_points; ++i) times[i] = t_max * i / (opts.time_points - 1);

  std::vector<OracleCell> cells;
  for (const auto& [atoms, n] : opts.cells) {
    if (atoms > opts.max_atoms) {
      throw ResourceError("oracle cell N=" + std::to_string(atoms) + " exceeds N <= " +
                          std::to_string(opts.max_atoms));
    }
    const DenseState rho0 = dense_from_ket(build_symmetric_ket(n, atoms), atoms);
    for (double g : opts.gamma_over_omega) {
      const double gamma = g * opts.omega;
      const auto dense = evolve_dense_series(rho0, times, opts.omega, gamma);
      BlockOperators ops = build_block(n, atoms, 0, opts.omega, gamma);
      if (opts.corrupt && opts.corrupt->n == n && opts.corrupt->atoms == atoms) {
        const auto& c = *opts.corrupt;
        if (c.row >= ops.dimension() || c.col >= ops.dimension()) {
          throw DomainError("corrupted H entry lies outside the block");
        }
        ops.hamiltonian(c.row, c.col) += c.delta * opts.omega;
      }
      const SymmetricBlockState sigma0 = fock_block_state(n, atoms, 0);
      OracleCell cell{atoms, n, g, 0.0, true};
      for (std::size_t i = 0; i < times.size(); ++i) {
        // Raw propagator: a corrupted generator must show up as a deviation,
        // not as a trace-conservation exception.
        SymmetricBlockState sigma = sigma0;
        sigma.x = block_propagator(ops, times[i], true) * sigma0.x;
        const double block_pr = block_populations(sigma).rydberg;
        const double dev = std::abs(block_pr - sector_populations_dense(dense[i]).rydberg);
        cell.max_deviation = std::max(cell.max_deviation, dev);
      }
      cell.pass = cell.max_deviation <= opts.tolerance;
      cells.push_back(cell);
    }
  }
  return cells;
}

int cmd_oracle_check(const OracleOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const auto cells = run_oracle_suite(opts);
    bool ok = true;
    Json jc = Json::array();
    for (const auto& c : cells) {
      ok = ok && c.pass;
      out << (c.pass ? "PASS" : "FAIL") << "  N=" << c.atoms << " n=" << c.n
          << " gamma/omega=" << c.gamma_over_omega << "  max|dp_R|=" << c.max_deviation << "\n";
      jc.push_back(Json{{"N", c.atoms},
                        {"n", c.n},
                        {"gamma_over_omega", c.gamma_over_omega},
                        {"max_deviation", c.max_deviation},
                        {"pass", c.pass}});
    }
    if (!opts.out_path.empty()) {
      write_json_file(opts.out_path, Json{{"schema_version", kSchemaVersion},
                                          {"config", opts.config},
                                          {"tolerance", opts.tolerance},
                                          {"pass", ok},
                                          {"cells", jc}});
    }
    out << (ok ? "oracle check passed" : "oracle check FAILED") << "\n";
    return ok ? kOk : kOracleFailure;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_analyze_fisher(const FisherOptions& opts, const AnalyzeOutput& io, std::ostream& out,
                       std::ostream& err) {
  try {
    ensure_dir(io.out_dir);
    Json rows = Json::array();
    std::ostringstream csv;
    CsvWriter w(csv, "fisher", io.config,
                {"regime", "n", "t_s", "fisher_closed_form", "fisher_numeric", "rel_diff"});
    for (int n : opts.n) {
      const RegimeParams p{opts.regime, static_cast<double>(n), opts.omega, opts.gamma};
      std::vector<double> ts = opts.t;
      if (ts.empty()) {
        // Inside the first quarter period for the oscillating signal.
        ts.push_back(opts.regime == Regime::Noiseless
                         ? kPi / (4.0 * std::sqrt(static_cast<double>(n)) * opts.omega)
                         : detection_time(p));
      }
      for (double t : ts) {
        const double closed = fisher_closed_form(p, t);
        const double numeric = fisher_numeric(p, t);
        const double rel = closed > 0.0 ? std::abs(numeric - closed) / closed : std::abs(numeric);
        w.row(std::vector<std::string>{std::string(to_string(opts.regime)), std::to_string(n),
                                       format_double(t), format_double(closed),
                                       format_double(numeric), format_double(rel)});
        rows.push_back(Json{{"n", n}, {"t_s", t}, {"closed_form", closed}, {"numeric", numeric},
                            {"rel_diff", rel}});
        out << to_string(opts.regime) << " n=" << n << " t=" << t << " F=" << closed
            << " numeric=" << numeric << "\n";
      }
    }
    if (io.csv) write_text_file(join_path(io.out_dir, "fisher.csv"), csv.str());
    if (io.json) {
      write_json_file(join_path(io.out_dir, "fisher.json"),
                      Json{{"schema_version", kSchemaVersion}, {"config", io.config},
                           {"regime", std::string(to_string(opts.regime))}, {"rows", rows}});
    }
    return kOk;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_analyze_detection(const DetectionOptions& opts, const AnalyzeOutput& io,
                          std::ostream& out, std::ostream& err) {
  try {
    ensure_dir(io.out_dir);
    std::vector<int> ns = opts.n;
    if (ns.empty()) ns = parse_int_list("1..20");
    std::vector<std::string> cols{"n"};
    for (Regime r : opts.regimes) cols.push_back("t_star_" + std::string(to_string(r)));
    std::ostringstream csv;
    CsvWriter w(csv, "detection_time", io.config, cols);

    std::vector<std::vector<double>> table(opts.regimes.size());
    for (std::size_t r = 0; r < opts.regimes.size(); ++r) {
      for (int n : ns) {
        table[r].push_back(detection_time(
            RegimeParams{opts.regimes[r], static_cast<double>(n), opts.omega, opts.gamma}));
      }
    }
    for (std::size_t i = 0; i < ns.size(); ++i) {
      std::vector<std::string> row{std::to_string(ns[i])};
      for (const auto& col : table) row.push_back(format_double(col[i]));
      w.row(row);
    }
    Json regimes = Json::object();
    for (std::size_t r = 0; r < opts.regimes.size(); ++r) {
      const double fit = loglog_slope(ns, table[r]);
      double tail = 0.0;
      if (ns.size() >= 2) {
        const std::size_t a = ns.size() - 2;
        const std::size_t b = ns.size() - 1;
        tail = std::log(table[r][b] / table[r][a]) /
               std::log(static_cast<double>(ns[b]) / static_cast<double>(ns[a]));
      }
      regimes[std::string(to_string(opts.regimes[r]))] =
          Json{{"t_star_s", table[r]}, {"loglog_fit_slope", fit}, {"terminal_slope", tail}};
      out << to_string(opts.regimes[r]) << ": log-log slope " << fit << " (terminal " << tail
          << ")\n";
    }
    if (io.csv) write_text_file(join_path(io.out_dir, "detection_time.csv"), csv.str());
    if (io.json) {
      write_json_file(join_path(io.out_dir, "detection_time.json"),
                      Json{{"schema_version", kSchemaVersion}, {"config", io.config}, {"n", ns},
                           {"regimes", regimes}});
    }
    return kOk;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_analyze_steady_state(const SteadyStateOptions& opts, const AnalyzeOutput& io,
                             std::ostream& out, std::ostream& err) {
  try {
    ensure_dir(io.out_dir);
    std::vector<std::string> cols{"n", "N", "p_no_rydberg", "p_rydberg"};
    if (opts.propagate) {
      cols.insert(cols.end(), {"propagated_no_rydberg", "propagated_rydberg", "max_deviation"});
    }
    cols.push_back("dwell_s");
    std::ostringstream csv;
    CsvWriter w(csv, "steady_state", io.config, cols);
    Json rows = Json::array();
    const double dwell = steady_state_dwell(opts.gamma, opts.alpha);
    out << std::fixed << std::setprecision(6);
    for (int n : opts.n) {
      const auto [ps, pr] = steady_state_populations(n);
      const int atoms = std::max(opts.atoms, n);
      std::vector<std::string> row{std::to_string(n), std::to_string(atoms), format_double(ps),
                                   format_double(pr)};
      Json j{{"n", n}, {"N", atoms}, {"p_no_rydberg", ps}, {"p_rydberg", pr}, {"dwell_s", dwell}};
      out << "n=" << n << "  " << ps << " / " << pr;
      if (opts.propagate) {
        const double horizon = opts.horizon_over_gamma / opts.gamma;
        const auto sim = block_populations(
            evolve_block(fock_block_state(n, atoms, 0), horizon, opts.omega, opts.gamma, true));
        const double dev = std::max(std::abs(sim.no_rydberg - ps), std::abs(sim.rydberg - pr));
        row.insert(row.end(), {format_double(sim.no_rydberg), format_double(sim.rydberg),
                               format_double(dev)});
        j["propagated_no_rydberg"] = sim.no_rydberg;
        j["propagated_rydberg"] = sim.rydberg;
        j["max_deviation"] = dev;
        out << "  (propagated " << sim.no_rydberg << " / " << sim.rydberg << ")";
      }
      out << "\n";
      row.push_back(format_double(dwell));
      w.row(row);
      rows.push_back(j);
    }
    if (io.csv) write_text_file(join_path(io.out_dir, "steady_state.csv"), csv.str());
    if (io.json) {
      write_json_file(join_path(io.out_dir, "steady_state.json"),
                      Json{{"schema_version", kSchemaVersion}, {"config", io.config}, {"rows", rows}});
    }
    return kOk;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_analyze_optimize(const OptimizeOptions& opts, const AnalyzeOutput& io, std::ostream& out,
                         std::ostream& err) {
  try {
    ensure_dir(io.out_dir);
    std::vector<ScheduleResult> results;
    if (opts.local) results.push_back(optimize_schedule_local(opts.cycles, opts.problem, opts.grid));
    if (opts.global) {
      results.push_back(
          optimize_schedule_global(opts.cycles, opts.problem, opts.grid, opts.max_tuples));
    }
    std::ostringstream csv;
    CsvWriter w(csv, "schedule", io.config, {"strategy", "cycle", "tau_s", "fidelity"});
    Json jr = Json::array();
    for (const auto& r : results) {
      out << to_string(r.strategy) << ":";
      for (std::size_t i = 0; i < r.taus.size(); ++i) {
        w.row(std::vector<std::string>{std::string(to_string(r.strategy)), std::to_string(i + 1),
                                       format_double(r.taus[i]),
                                       format_double(r.fidelity_trace[i])});
        out << "  F" << i + 1 << "=" << percent(r.fidelity_trace[i]) << " (tau=" << r.taus[i] << ")";
      }
      out << "\n";
      jr.push_back(to_json(r));
    }
    if (io.csv) write_text_file(join_path(io.out_dir, "schedule.csv"), csv.str());
    if (io.json) {
      write_json_file(join_path(io.out_dir, "schedule.json"),
                      Json{{"schema_version", kSchemaVersion}, {"config", io.config}, {"results", jr}});
    }
    return kOk;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

}  // namespace qndcount::cli
