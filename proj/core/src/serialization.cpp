#include "qndcount/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qndcount/errors.hpp"

namespace qndcount {
namespace {

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

Json complex_json(const Complex& c) { return Json::array({c.real(), c.imag()}); }

Complex complex_from(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw ParseError("complex value must be [re, im]", 0);
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

Json complex_vector(const VectorXc& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v[i]));
  return out;
}

Json complex_vector(const std::vector<Complex>& v) {
  Json out = Json::array();
  for (const auto& c : v) out.push_back(complex_json(c));
  return out;
}

Json label_json(const BasisLabel& l) {
  return Json{{"family", std::string(to_string(l.family))}, {"j", l.j}, {"n", l.n}, {"N", l.atoms}};
}

Outcome outcome_from_json(const Json& j) {
  if (j.is_string()) return outcome_from_string(j.get<std::string>());
  if (j.is_number_integer()) {
    const auto v = j.get<long long>();
    if (v == 0) return Outcome::NoRydberg;
    if (v == 1) return Outcome::Rydberg;
  }
  throw ParseError("outcome must be \"Rydberg\", \"NoRydberg\", 0 or 1", 0);
}

double positive_number(const Json& j, const char* key) {
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ParseError(std::string(key) + " must be finite", 0);
  return v;
}

FockDistribution distribution_from_json(const Json& j) {
  const Json& p = j.is_object() ? j.at("p") : j;
  FockDistribution d;
  d.p = p.get<std::vector<double>>();
  return d;
}

template <class Fn>
auto with_parse_context(std::string_view what, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const Json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what(), 0);
  } catch (const Error& e) {
    throw ParseError(std::string(what) + ": " + e.what(), 0);
  }
}

}  // namespace

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    const std::size_t line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(e.what(), line);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

std::size_t locate_array_element(std::string_view text, std::string_view key, std::size_t index) {
  // Minimal scanner: tracks nesting and skips strings; finds "key" at depth 1.
  // An empty key selects a top-level array.
  int depth = 0;
  std::size_t i = 0;
  bool armed = key.empty();  // waiting for the array
  int array_depth = -1;
  std::size_t element = 0;
  bool expecting = false;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '"') {
      const std::size_t start = ++i;
      while (i < text.size() && text[i] != '"') i += text[i] == '\\' ? 2 : 1;
      if (array_depth < 0 && depth == 1 && text.substr(start, i - start) == key) armed = true;
      if (expecting) {
        if (element == index) return line_of_offset(text, start);
        expecting = false;
      }
      ++i;
      continue;
    }
    if (c == '[' || c == '{') {
      ++depth;
      if (armed && c == '[' && (!key.empty() || depth == 1)) {
        armed = false;
        array_depth = depth;
        expecting = true;
        element = 0;
      } else if (expecting && depth == array_depth + 1) {
        if (element == index) return line_of_offset(text, i);
        expecting = false;
      }
    } else if (c == ']' || c == '}') {
      if (depth == array_depth) return 0;
      --depth;
    } else if (c == ',' && depth == array_depth) {
      ++element;
      expecting = true;
    } else if (expecting && !std::isspace(static_cast<unsigned char>(c))) {
      if (element == index) return line_of_offset(text, i);
      expecting = false;
    }
    ++i;
  }
  return 0;
}

Json to_json(const BlockOperators& ops) {
  Json labels = Json::array();
  for (const auto& l : ops.labels) labels.push_back(label_json(l));
  Json h = Json::array();
  for (Eigen::Index r = 0; r < ops.hamiltonian.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < ops.hamiltonian.cols(); ++c) row.push_back(complex_json(ops.hamiltonian(r, c)));
    h.push_back(std::move(row));
  }
  Json d = Json::array();
  for (Eigen::Index i = 0; i < ops.dephasing.size(); ++i) d.push_back(ops.dephasing[i]);
  return Json{{"n", ops.n},         {"N", ops.atoms},   {"j", ops.j},
              {"omega", ops.omega}, {"gamma", ops.gamma}, {"labels", labels},
              {"hamiltonian", h},   {"dephasing", d}};
}

Json to_json(const SymmetricBlockState& s) {
  Json labels = Json::array();
  for (const auto& l : enumerate_basis(s.n, s.atoms, s.j)) labels.push_back(std::string(to_string(l.family)));
  return Json{{"n", s.n}, {"N", s.atoms}, {"j", s.j}, {"labels", labels}, {"x", complex_vector(s.x)}};
}

SymmetricBlockState block_state_from_json(const Json& j) {
  return with_parse_context("block state", [&] {
    SymmetricBlockState s;
    s.n = j.at("n").get<int>();
    s.atoms = j.at("N").get<int>();
    s.j = j.at("j").get<int>();
    const auto labels = enumerate_basis(s.n, s.atoms, s.j);
    const Json& x = j.at("x");
    if (x.size() != labels.size()) {
      throw ParseError("block state has " + std::to_string(x.size()) + " coefficients for " +
                       std::to_string(labels.size()) + " labels", 0);
    }
    s.x.resize(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) s.x[static_cast<Eigen::Index>(i)] = complex_from(x[i]);
    return s;
  });
}

Json to_json(const PureCollectiveState& s) {
  return Json{{"s_amp", complex_vector(s.s_amp)}, {"r_amp", complex_vector(s.r_amp)}};
}

PureCollectiveState pure_state_from_json(const Json& j) {
  return with_parse_context("pure state", [&] {
    PureCollectiveState s;
    for (const auto& c : j.at("s_amp")) s.s_amp.push_back(complex_from(c));
    for (const auto& c : j.at("r_amp")) s.r_amp.push_back(complex_from(c));
    if (s.s_amp.size() != s.r_amp.size() || s.s_amp.empty()) {
      throw ParseError("s_amp and r_amp must be non-empty and equally long", 0);
    }
    return s;
  });
}

Json to_json(const Posterior& p) { return Json(p.weights); }

Json to_json(const Schedule& s) {
  Json j{{"kind", std::string(to_string(s.kind))}};
  switch (s.kind) {
    case Schedule::Kind::Fixed:
      j["tau_s"] = s.tau;
      break;
    case Schedule::Kind::UniformRandom:
      j["tau_min_s"] = s.tau_min;
      j["tau_max_s"] = s.tau_max;
      break;
    case Schedule::Kind::Precomputed:
      j["taus_s"] = s.list;
      break;
    case Schedule::Kind::AdaptiveGreedy:
      j["grid_points"] = s.grid.points;
      j["grid_max_phase"] = s.grid.max_phase;
      break;
  }
  return j;
}

Schedule schedule_from_json(const Json& j) {
  return with_parse_context("schedule", [&] {
    Schedule s;
    s.kind = schedule_kind_from_string(j.at("kind").get<std::string>());
    switch (s.kind) {
      case Schedule::Kind::Fixed:
        s.tau = positive_number(j, "tau_s");
        break;
      case Schedule::Kind::UniformRandom:
        s.tau_min = positive_number(j, "tau_min_s");
        s.tau_max = positive_number(j, "tau_max_s");
        break;
      case Schedule::Kind::Precomputed:
        s.list = j.at("taus_s").get<std::vector<double>>();
        break;
      case Schedule::Kind::AdaptiveGreedy:
        if (j.contains("grid_points")) s.grid.points = j.at("grid_points").get<int>();
        if (j.contains("grid_max_phase")) s.grid.max_phase = j.at("grid_max_phase").get<double>();
        break;
    }
    return s;
  });
}

Json to_json(const ProtocolParams& p) {
  Json candidates = Json::array();
  for (const auto& c : p.resolved_candidates()) candidates.push_back(c.p);
  return Json{{"omega", p.omega},
              {"gamma", p.gamma},
              {"tau_eit", p.tau_eit},
              {"N", p.atoms},
              {"n_max", p.n_max},
              {"ejection", p.ejection},
              {"schedule", to_json(p.schedule)},
              {"seed", p.seed},
              {"max_cycles", p.max_cycles},
              {"threshold", p.threshold},
              {"samples_per_window", p.samples_per_window},
              {"mode", std::string(to_string(p.resolved_mode()))},
              {"candidates", candidates},
              {"prior", p.resolved_prior().weights}};
}

Json to_json(const TrajectoryLog& log) {
  Json entries = Json::array();
  for (const auto& e : log.record.entries) {
    entries.push_back(Json{{"tau_s", e.tau}, {"outcome", std::string(to_string(e.outcome))}});
  }
  Json posteriors = Json::array();
  for (const auto& p : log.posteriors) posteriors.push_back(p.weights);
  Json j{{"index", log.index},
         {"seed", log.seed},
         {"mode", std::string(to_string(log.mode))},
         {"entries", entries},
         {"outcome_probabilities", log.outcome_probabilities},
         {"posteriors", posteriors},
         {"fidelity", log.fidelity},
         {"overlap", log.overlap},
         {"ejected", log.ejected},
         {"inferred", log.inferred},
         {"converged", log.converged},
         {"cycles", log.cycles()}};
  if (log.initial_n >= 0) j["initial_n"] = log.initial_n;
  return j;
}

Json to_json(const BatchSummary& s) {
  return Json{{"trajectories", s.trajectories},
              {"converged", s.converged},
              {"converged_fraction",
               s.trajectories > 0 ? static_cast<double>(s.converged) / static_cast<double>(s.trajectories) : 0.0},
              {"inferred_counts", s.inferred_counts},
              {"mean_cycles", s.mean_cycles},
              {"wall_time_s", s.wall_time_s}};
}

Json to_json(const ScheduleResult& r) {
  return Json{{"strategy", std::string(to_string(r.strategy))},
              {"taus", r.taus},
              {"fidelity_trace", r.fidelity_trace},
              {"grid", Json{{"points", r.grid.points}, {"max_phase", r.grid.max_phase}}}};
}

Json record_to_json(const MeasurementRecord& record, const std::optional<RecordParams>& params) {
  Json entries = Json::array();
  for (const auto& e : record.entries) {
    entries.push_back(Json{{"tau_s", e.tau}, {"outcome", std::string(to_string(e.outcome))}});
  }
  Json j{{"entries", entries}};
  if (params) {
    j["params"] = Json{{"omega", params->omega},
                       {"gamma", params->gamma},
                       {"tau_eit", params->tau_eit},
                       {"N", params->atoms}};
  }
  return j;
}

RecordFile record_from_text(std::string_view text) {
  const Json j = parse_json(text);
  RecordFile out;
  if (!j.is_object() || !j.contains("entries") || !j.at("entries").is_array()) {
    throw ParseError("record must be an object with an \"entries\" array", 1);
  }
  const Json& entries = j.at("entries");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    try {
      const Json& e = entries[i];
      RecordEntry entry;
      entry.tau = e.at("tau_s").get<double>();
      entry.outcome = outcome_from_json(e.at("outcome"));
      if (!(entry.tau >= 0.0) || !std::isfinite(entry.tau)) {
        throw ParseError("tau_s must be finite and >= 0", 0);
      }
      out.record.entries.push_back(entry);
    } catch (const std::exception& e) {
      const std::size_t line = locate_array_element(text, "entries", i);
      throw ParseError("record entry " + std::to_string(i) +
                           ": " + e.what(),
                       line);
    }
  }
  if (j.contains("params")) {
    out.params = with_parse_context("record params", [&] {
      const Json& p = j.at("params");
      RecordParams r;
      r.omega = p.at("omega").get<double>();
      r.gamma = p.value("gamma", 0.0);
      r.tau_eit = p.value("tau_eit", 0.0);
      r.atoms = p.value("N", 0);
      return r;
    });
  }
  return out;
}

Json candidates_to_json(const std::vector<FockDistribution>& candidates,
                        const std::optional<Posterior>& prior) {
  Json c = Json::array();
  for (const auto& d : candidates) c.push_back(d.p);
  Json j{{"candidates", c}};
  if (prior) j["prior"] = prior->weights;
  return j;
}

CandidatesFile candidates_from_text(std::string_view text) {
  const Json j = parse_json(text);
  CandidatesFile out;
  if (!j.is_array() && !(j.is_object() && j.contains("candidates") && j.at("candidates").is_array())) {
    throw ParseError("candidates must be an array or an object with a \"candidates\" array", 1);
  }
  const Json& list = j.is_array() ? j : j.at("candidates");
  const std::string_view key = j.is_array() ? "" : "candidates";
  for (std::size_t i = 0; i < list.size(); ++i) {
    try {
      FockDistribution d = distribution_from_json(list[i]);
      d.validate();
      out.candidates.push_back(std::move(d));
    } catch (const std::exception& e) {
      const std::size_t line = locate_array_element(text, key, i);
      throw ParseError("candidate " + std::to_string(i) +
                           ": " + e.what(),
                       line);
    }
  }
  if (out.candidates.empty()) throw ParseError("candidate list is empty", 0);
  if (j.is_object() && j.contains("prior")) {
    out.prior = with_parse_context("prior", [&] {
      Posterior p{j.at("prior").get<std::vector<double>>()};
      p.validate();
      return p;
    });
  }
  return out;
}

Json posterior_file(const std::vector<FockDistribution>& candidates,
                    const std::vector<Posterior>& trace, const Json& config) {
  Json c = Json::array();
  for (const auto& d : candidates) c.push_back(d.p);
  Json t = Json::array();
  for (const auto& p : trace) t.push_back(p.weights);
  return Json{{"schema_version", kSchemaVersion},
              {"config", config},
              {"candidates", c},
              {"weights", trace.back().weights},
              {"mle", mle(trace.back())},
              {"trace", t}};
}

void write_trajectories(std::ostream& out, const Json& config,
                        const std::vector<TrajectoryLog>& logs) {
  out << Json{{"schema_version", kSchemaVersion}, {"config", config}}.dump() << '\n';
  for (const auto& log : logs) out << to_json(log).dump() << '\n';
}

CsvWriter::CsvWriter(std::ostream& out, std::string_view kind, const Json& config,
                     const std::vector<std::string>& columns)
    : out_(out), columns_(columns.size()) {
  out_ << "# qndcount " << kind << " schema=" << kSchemaVersion << '\n';
  out_ << "# config " << config.dump() << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw Error("CSV row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& cells) {
  std::vector<std::string> s;
  s.reserve(cells.size());
  for (double v : cells) s.push_back(format_double(v));
  row(s);
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace qndcount
