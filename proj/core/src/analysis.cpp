#include "qndcount/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "qndcount/errors.hpp"

namespace qndcount {
namespace {

// Relative slack under which two fidelities count as equal.
constexpr double kTieTol = 1e-12;

bool better(double candidate, double incumbent) {
  return candidate > incumbent + kTieTol * std::max(1.0, std::abs(incumbent));
}

bool tied(double a, double b) { return !better(a, b) && !better(b, a); }

double binary_entropy(double p) {
  if (!(p > 0.0) || !(p < 1.0)) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

// A photon number's conditional state with the joint weight it contributes to
// each candidate.
struct Item {
  CycleState state;
  std::vector<double> w;  // per candidate
};
using Leaf = std::vector<Item>;
using Frontier = std::vector<Leaf>;

Frontier root_frontier(const std::vector<FockDistribution>& candidates, const Posterior& prior,
                       const CycleModel& model) {
  int n_top = 0;
  for (const auto& c : candidates) n_top = std::max(n_top, c.n_max());
  Leaf leaf;
  for (int n = 0; n <= n_top; ++n) {
    Item item{model.initial(n), std::vector<double>(candidates.size(), 0.0)};
    bool used = false;
    for (std::size_t a = 0; a < candidates.size(); ++a) {
      item.w[a] = prior.weights[a] * candidates[a][n];
      used = used || item.w[a] > 0.0;
    }
    if (used) leaf.push_back(std::move(item));
  }
  return Frontier{std::move(leaf)};
}

// Outcome probabilities on a fixed tau grid. Noiseless cycles use tabulated
// trig values per photon number; dephased cycles go through the model.
class GridEvaluator {
 public:
  GridEvaluator(const CycleModel& model, std::vector<double> taus, int n_top)
      : model_(model), taus_(std::move(taus)) {
    if (!model_.noise().noiseless()) return;
    cos_.resize(n_top + 1);
    sin_.resize(n_top + 1);
    for (int n = 0; n <= n_top; ++n) {
      const double wn = collective_frequency(n, model_.omega());
      cos_[n].reserve(taus_.size());
      sin_[n].reserve(taus_.size());
      for (double t : taus_) {
        cos_[n].push_back(std::cos(wn * t));
        sin_[n].push_back(std::sin(wn * t));
      }
    }
  }

  std::size_t size() const { return taus_.size(); }
  double tau(std::size_t k) const { return taus_[k]; }

  std::array<double, 2> probabilities(const CycleState& s, std::size_t k) const {
    if (cos_.empty()) return model_.probabilities(s, taus_[k]);
    if (s.n == 0) return {1.0, 0.0};
    const double c = cos_[s.n][k];
    const double sn = sin_[s.n][k];
    // a c - i s b and b c - i s a
    const Complex a = s.x[0];
    const Complex b = s.x[1];
    const double ps = std::norm(a * c + Complex(0.0, -sn) * b);
    const double pr = std::norm(b * c + Complex(0.0, -sn) * a);
    const double total = ps + pr;
    return {ps / total, pr / total};
  }

 private:
  const CycleModel& model_;
  std::vector<double> taus_;
  std::vector<std::vector<double>> cos_;
  std::vector<std::vector<double>> sin_;
};

// Fidelity after appending one cycle with drive time tau to the frontier.
template <typename ProbFn>
double score(const Frontier& frontier, std::size_t n_candidates, ProbFn&& probs) {
  double total = 0.0;
  std::vector<double> acc(2 * n_candidates);
  for (const Leaf& leaf : frontier) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const Item& item : leaf) {
      const std::array<double, 2> p = probs(item.state);
      for (std::size_t a = 0; a < n_candidates; ++a) {
        acc[a] += item.w[a] * p[0];
        acc[n_candidates + a] += item.w[a] * p[1];
      }
    }
    total += *std::max_element(acc.begin(), acc.begin() + static_cast<long>(n_candidates));
    total += *std::max_element(acc.begin() + static_cast<long>(n_candidates), acc.end());
  }
  return total;
}

Frontier extend(const Frontier& frontier, const CycleModel& model, double tau) {
  Frontier next;
  next.reserve(2 * frontier.size());
  for (const Leaf& leaf : frontier) {
    for (Outcome m : {Outcome::NoRydberg, Outcome::Rydberg}) {
      Leaf child;
      for (const Item& item : leaf) {
        Item c = item;
        const double p = model.advance(c.state, tau, m);
        if (!(p > 0.0)) continue;
        for (double& w : c.w) w *= p;
        child.push_back(std::move(c));
      }
      if (!child.empty()) next.push_back(std::move(child));
    }
  }
  return next;
}

void validate_problem(const FidelityProblem& problem) {
  if (problem.candidates.empty()) throw DomainError("fidelity needs at least one candidate");
  if (problem.prior.size() != problem.candidates.size()) {
    throw DomainError("prior size does not match candidate count");
  }
  problem.prior.validate();
  for (const auto& c : problem.candidates) c.validate();
}

int top_photon_number(const FidelityProblem& problem) {
  int n_top = 0;
  for (const auto& c : problem.candidates) n_top = std::max(n_top, c.n_max());
  return n_top;
}

Frontier run_frontier(const std::vector<double>& taus, const FidelityProblem& problem,
                      const CycleModel& model) {
  if (taus.size() > static_cast<std::size_t>(kMaxFidelityCycles)) {
    throw ResourceError("expected fidelity enumerates 2^T sequences; T=" +
                        std::to_string(taus.size()) + " exceeds the limit " +
                        std::to_string(kMaxFidelityCycles));
  }
  Frontier f = root_frontier(problem.candidates, problem.prior, model);
  for (double t : taus) {
    if (!(t >= 0.0)) throw DomainError("drive times must be >= 0");
    f = extend(f, model, t);
  }
  return f;
}

double signal_value(const SignalFn& f, double t, double n) {
  const double v = f(t, n);
  if (!(v > 0.0 && v <= 1.0)) {
    throw DomainError("signal probability " + std::to_string(v) + " outside (0, 1] at n=" +
                      std::to_string(n));
  }
  return v;
}

struct GlobalSearch {
  const FidelityProblem& problem;
  const CycleModel& model;
  const GridEvaluator& grid;
  int cycles;
  std::vector<double> taus;
  std::vector<double> trace;
  std::vector<double> best_taus;
  std::vector<double> best_trace;
  bool found = false;

  bool beats(const std::vector<double>& cand) const {
    if (!found) return true;
    if (better(cand.back(), best_trace.back())) return true;
    if (!tied(cand.back(), best_trace.back())) return false;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (better(cand[i], best_trace[i])) return true;
      if (better(best_trace[i], cand[i])) return false;
    }
    return false;
  }

  void descend(const Frontier& frontier, int level) {
    const std::size_t k = problem.candidates.size();
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double f = score(frontier, k, [&](const CycleState& s) {
        return grid.probabilities(s, g);
      });
      taus.push_back(grid.tau(g));
      trace.push_back(f);
      if (level + 1 == cycles) {
        if (beats(trace)) {
          best_taus = taus;
          best_trace = trace;
          found = true;
        }
      } else {
        descend(extend(frontier, model, grid.tau(g)), level + 1);
      }
      taus.pop_back();
      trace.pop_back();
    }
  }
};

}  // namespace

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Noiseless:
      return "noiseless";
    case Regime::NoisyFrequency:
      return "noisy-frequency";
    case Regime::SteadyState:
      return "steady-state";
  }
  return "unknown";
}

Regime regime_from_string(std::string_view s) {
  if (s == "noiseless") return Regime::Noiseless;
  if (s == "noisy-frequency" || s == "noisy") return Regime::NoisyFrequency;
  if (s == "steady-state" || s == "steady") return Regime::SteadyState;
  throw DomainError("unknown regime '" + std::string(s) + "'");
}

std::string_view to_string(ScheduleStrategy s) {
  return s == ScheduleStrategy::Local ? "local" : "global";
}

void RegimeParams::validate() const {
  if (!(n > 0.0)) throw DomainError("photon number must be > 0");
  if (!(omega > 0.0) && regime != Regime::SteadyState) throw DomainError("omega must be > 0");
  if (regime == Regime::Noiseless) {
    if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
  } else if (!(gamma > 0.0)) {
    throw DomainError("noisy regimes require gamma > 0");
  }
}

double fisher_closed_form(const RegimeParams& p, double t) {
  p.validate();
  if (!(t >= 0.0)) throw DomainError("time must be >= 0");
  switch (p.regime) {
    case Regime::Noiseless:
      return t * t * p.omega * p.omega / p.n;
    case Regime::NoisyFrequency:
      return t * p.omega * p.omega / (p.gamma * p.n);
    case Regime::SteadyState:
      return t * p.gamma / (p.n * (p.n + 1.0) * (p.n + 1.0));
  }
  return 0.0;
}

double detection_time(const RegimeParams& p) {
  p.validate();
  switch (p.regime) {
    case Regime::Noiseless:
      return std::sqrt(p.n) / p.omega;
    case Regime::NoisyFrequency:
      return p.gamma * p.n / (p.omega * p.omega);
    case Regime::SteadyState:
      return p.n * (1.0 + p.n) * (1.0 + p.n) / p.gamma;
  }
  return 0.0;
}

double fisher_numeric(const SignalFn& f_same, const SignalFn& f_diff, double n, double t,
                      double rel_step) {
  if (!(n > 0.0)) throw DomainError("photon number must be > 0");
  if (!(rel_step > 0.0)) throw DomainError("finite-difference step must be > 0");
  const double h = rel_step * n;
  const double same = signal_value(f_same, t, n);
  const double diff = signal_value(f_diff, t, n);
  if (std::abs(same + diff - 1.0) > 1e-9) {
    throw DomainError("signal probabilities do not sum to 1");
  }
  // Differentiate p itself, not log p: near a Rabi node log p varies too fast
  // for a central difference. Richardson extrapolation removes the h^2 term.
  const auto slope = [&](const SignalFn& f) {
    const double d1 = (signal_value(f, t, n + h) - signal_value(f, t, n - h)) / (2.0 * h);
    const double d2 = (signal_value(f, t, n + 2.0 * h) - signal_value(f, t, n - 2.0 * h)) / (4.0 * h);
    return (4.0 * d1 - d2) / 3.0;
  };
  double info = 0.0;
  if (same > 0.0) info += std::pow(slope(f_same), 2) / same;
  if (diff > 0.0) info += std::pow(slope(f_diff), 2) / diff;
  return info;
}

double fisher_numeric(const RegimeParams& p, double t, double rel_step) {
  p.validate();
  if (!(t >= 0.0)) throw DomainError("time must be >= 0");
  const double omega = p.omega;
  const SignalFn rabi_same = [omega](double tt, double n) {
    const double c = std::cos(std::sqrt(n) * omega * tt);
    return c * c;
  };
  const SignalFn rabi_diff = [omega](double tt, double n) {
    const double s = std::sin(std::sqrt(n) * omega * tt);
    return s * s;
  };
  switch (p.regime) {
    case Regime::Noiseless:
      if (t == 0.0) return 0.0;
      return fisher_numeric(rabi_same, rabi_diff, p.n, t, rel_step);
    case Regime::NoisyFrequency:
      return t * p.gamma * fisher_numeric(rabi_same, rabi_diff, p.n, 1.0 / p.gamma, rel_step);
    case Regime::SteadyState: {
      const SignalFn ss_same = [](double, double n) { return 1.0 / (n + 1.0); };
      const SignalFn ss_diff = [](double, double n) { return n / (n + 1.0); };
      return t * p.gamma * fisher_numeric(ss_same, ss_diff, p.n, 1.0 / p.gamma, rel_step);
    }
  }
  return 0.0;
}

std::pair<double, double> steady_state_populations(int n) {
  if (n < 1) throw DomainError("steady-state populations need n >= 1");
  return {1.0 / (n + 1.0), n / (n + 1.0)};
}

double steady_state_dwell(double gamma, double alpha) {
  if (!(gamma > 0.0)) throw DomainError("dwell time needs gamma > 0");
  if (!(alpha > 1.0)) throw DomainError("dwell factor alpha must exceed 1");
  return alpha / gamma;
}

std::vector<double> TauGrid::taus(double omega) const {
  if (points < 1) throw DomainError("tau grid needs at least one point");
  if (!(max_phase > 0.0) || !(omega > 0.0)) throw DomainError("tau grid needs positive range");
  std::vector<double> out(points);
  for (int k = 1; k <= points; ++k) out[k - 1] = k * max_phase / (points * omega);
  return out;
}

double expected_fidelity(const std::vector<double>& taus, const FidelityProblem& problem) {
  validate_problem(problem);
  if (taus.size() > static_cast<std::size_t>(kMaxFidelityCycles)) {
    throw ResourceError("expected fidelity enumerates 2^T sequences; T=" +
                        std::to_string(taus.size()) + " exceeds the limit " +
                        std::to_string(kMaxFidelityCycles));
  }
  const CycleModel model(problem.omega, problem.noise);
  if (taus.empty()) {
    return *std::max_element(problem.prior.weights.begin(), problem.prior.weights.end());
  }
  std::vector<double> head(taus.begin(), taus.end() - 1);
  const Frontier f = run_frontier(head, problem, model);
  const double last = taus.back();
  if (!(last >= 0.0)) throw DomainError("drive times must be >= 0");
  return std::clamp(score(f, problem.candidates.size(),
                          [&](const CycleState& s) { return model.probabilities(s, last); }),
                    0.0, 1.0);
}

double outcome_sequence_mass(const std::vector<double>& taus, const FidelityProblem& problem) {
  validate_problem(problem);
  const CycleModel model(problem.omega, problem.noise);
  const Frontier f = run_frontier(taus, problem, model);
  double total = 0.0;
  for (const Leaf& leaf : f) {
    for (const Item& item : leaf) {
      for (double w : item.w) total += w;
    }
  }
  return total;
}

ScheduleResult optimize_schedule_local(int cycles, const FidelityProblem& problem,
                                       const TauGrid& grid) {
  validate_problem(problem);
  if (cycles < 1) throw DomainError("schedule needs at least one cycle");
  if (cycles > kMaxFidelityCycles) {
    throw ResourceError("local optimizer limited to T <= " + std::to_string(kMaxFidelityCycles));
  }
  const CycleModel model(problem.omega, problem.noise);
  const GridEvaluator eval(model, grid.taus(problem.omega), top_photon_number(problem));
  const std::size_t k = problem.candidates.size();

  ScheduleResult result;
  result.strategy = ScheduleStrategy::Local;
  result.grid = grid;
  Frontier frontier = root_frontier(problem.candidates, problem.prior, model);
  for (int i = 0; i < cycles; ++i) {
    std::size_t best = 0;
    double best_f = -1.0;
    for (std::size_t g = 0; g < eval.size(); ++g) {
      const double f = score(frontier, k, [&](const CycleState& s) {
        return eval.probabilities(s, g);
      });
      if (better(f, best_f)) {
        best_f = f;
        best = g;
      }
    }
    result.taus.push_back(eval.tau(best));
    result.fidelity_trace.push_back(std::clamp(best_f, 0.0, 1.0));
    if (i + 1 < cycles) frontier = extend(frontier, model, eval.tau(best));
  }
  return result;
}

ScheduleResult optimize_schedule_global(int cycles, const FidelityProblem& problem,
                                        const TauGrid& grid, double max_tuples) {
  validate_problem(problem);
  if (cycles < 1) throw DomainError("schedule needs at least one cycle");
  const double tuples = std::pow(static_cast<double>(grid.points), cycles);
  if (cycles > kMaxFidelityCycles || tuples > max_tuples) {
    throw ResourceError("global search over " + std::to_string(grid.points) + "^" +
                        std::to_string(cycles) + " tuples exceeds the guard of " +
                        std::to_string(static_cast<long long>(max_tuples)));
  }
  const CycleModel model(problem.omega, problem.noise);
  const GridEvaluator eval(model, grid.taus(problem.omega), top_photon_number(problem));
  GlobalSearch search{problem, model, eval, cycles, {}, {}, {}, {}, false};
  search.descend(root_frontier(problem.candidates, problem.prior, model), 0);

  ScheduleResult result;
  result.strategy = ScheduleStrategy::Global;
  result.grid = grid;
  result.taus = std::move(search.best_taus);
  result.fidelity_trace = std::move(search.best_trace);
  for (double& f : result.fidelity_trace) f = std::clamp(f, 0.0, 1.0);
  return result;
}

double greedy_next_tau(const SequentialPosterior& filter, const std::vector<double>& taus) {
  if (taus.empty()) throw DomainError("greedy schedule needs a non-empty tau grid");
  const auto& tracks = filter.tracks();
  const std::size_t k = filter.candidates().size();
  const std::vector<double> joint = filter.joint_weights();
  Leaf leaf;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (!tracks[i].alive) continue;
    Item item{tracks[i].state, std::vector<double>(k)};
    for (std::size_t a = 0; a < k; ++a) item.w[a] = joint[a * tracks.size() + i];
    leaf.push_back(std::move(item));
  }
  const CycleModel& model = filter.model();
  double best_f = -1.0;
  double best_info = -1.0;
  double best_tau = taus.front();
  std::vector<double> mass(k);
  std::vector<double> rydberg(k);
  for (double t : taus) {
    // One-step fidelity sum_m max_a w(a, m), and the mutual information
    // between the outcome and the candidate for tie-breaking.
    std::fill(mass.begin(), mass.end(), 0.0);
    std::fill(rydberg.begin(), rydberg.end(), 0.0);
    for (const Item& item : leaf) {
      const double pr = model.probabilities(item.state, t)[1];
      for (std::size_t a = 0; a < k; ++a) {
        mass[a] += item.w[a];
        rydberg[a] += item.w[a] * pr;
      }
    }
    double f_no = 0.0;
    double f_yes = 0.0;
    double total_r = 0.0;
    double cond_entropy = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      f_no = std::max(f_no, mass[a] - rydberg[a]);
      f_yes = std::max(f_yes, rydberg[a]);
      total_r += rydberg[a];
      if (mass[a] > 0.0) cond_entropy += mass[a] * binary_entropy(rydberg[a] / mass[a]);
    }
    const double f = f_no + f_yes;
    const double info = binary_entropy(total_r) - cond_entropy;
    const bool wins = better(f, best_f) ||
                      (tied(f, best_f) && (better(info, best_info) ||
                                           (tied(info, best_info) && t < best_tau)));
    if (wins) {
      best_f = f;
      best_info = info;
      best_tau = t;
    }
  }
  return best_tau;
}

FidelityProblem two_candidate_toy() {
  FidelityProblem p;
  p.candidates.push_back(FockDistribution{{0.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 1.0 / 3.0, 0.0}});
  p.candidates.push_back(FockDistribution::delta(3));
  p.prior = Posterior::uniform(2);
  p.omega = 1.0;
  return p;
}

}  // namespace qndcount
