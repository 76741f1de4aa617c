#include <gtest/gtest.h>

#include <cmath>

#include <qndcount/errors.hpp>
#include <qndcount/protocol.hpp>
#include <qndcount/random.hpp>

namespace qndcount {
namespace {

TEST(RandomTest, SplitMixReferenceValue) {
  std::uint64_t state = 0;
  EXPECT_EQ(splitmix64(state), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(state, 0x9e3779b97f4a7c15ULL);
}

TEST(RandomTest, StreamsAreReproducibleAndDistinct) {
  Rng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs_c |= x != c.next();
    differs_d |= x != d.next();
  }
  EXPECT_TRUE(differs_c);
  EXPECT_TRUE(differs_d);
  Rng u(1, 0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(ScheduleTest, ValidationAndNames) {
  EXPECT_THROW(Schedule::fixed(-1.0).validate(), DomainError);
  EXPECT_THROW(Schedule::uniform(2.0, 1.0).validate(), DomainError);
  EXPECT_THROW(Schedule::precomputed({1.0, -0.5}).validate(), DomainError);
  EXPECT_THROW(Schedule::greedy({0, 1.0}).validate(), DomainError);
  for (auto k : {Schedule::Kind::Fixed, Schedule::Kind::UniformRandom, Schedule::Kind::Precomputed,
                 Schedule::Kind::AdaptiveGreedy}) {
    EXPECT_EQ(schedule_kind_from_string(to_string(k)), k);
  }
}

TEST(ScheduleTest, PrecomputedRunsOut) {
  SequentialPosterior filter({FockDistribution::delta(1)}, Posterior::uniform(1), 1.0, NoiseConfig{});
  Rng rng(1, 1);
  const auto s = Schedule::precomputed({0.5, 0.7});
  EXPECT_DOUBLE_EQ(schedule_next_tau(s, 1, filter, 1.0, rng), 0.7);
  EXPECT_THROW(schedule_next_tau(s, 2, filter, 1.0, rng), ScheduleExhaustedError);
}

TEST(ScheduleTest, UniformDrawsInsideRange) {
  SequentialPosterior filter({FockDistribution::delta(1)}, Posterior::uniform(1), 1.0, NoiseConfig{});
  Rng rng(5, 1);
  const auto s = Schedule::uniform(0.2, 0.9);
  for (int i = 0; i < 100; ++i) {
    const double t = schedule_next_tau(s, static_cast<std::size_t>(i), filter, 1.0, rng);
    EXPECT_GE(t, 0.2);
    EXPECT_LE(t, 0.9);
  }
}

TEST(ParamsTest, Validation) {
  ProtocolParams p;
  EXPECT_NO_THROW(p.validate());
  p.n_max = 11;
  EXPECT_THROW(p.validate(), DomainError);
  p = ProtocolParams{};
  p.mode = SimulationMode::NoiselessPure;
  EXPECT_THROW(p.validate(), DomainError);
  p = ProtocolParams{};
  p.candidates = {FockDistribution::delta(1), FockDistribution::delta(2)};
  p.prior = Posterior{{1.0}};
  EXPECT_THROW(p.validate(), DomainError);
  EXPECT_EQ(ProtocolParams{}.resolved_candidates().size(), 4u);
}

ProtocolParams small_noisy() {
  ProtocolParams p;
  p.omega = 1.0;
  p.gamma = 0.12;
  p.tau_eit = 0.1;
  p.atoms = 6;
  p.n_max = 3;
  p.schedule = Schedule::greedy({60, kTwoPi});
  p.samples_per_window = 4;
  p.max_cycles = 12;
  return p;
}

TEST(ProtocolTest, RunsAreDeterministic) {
  const auto p = small_noisy();
  const auto a = run_protocol(InitialCondition::fock(2), p, 5);
  const auto b = run_protocol(InitialCondition::fock(2), p, 5);
  ASSERT_EQ(a.cycles(), b.cycles());
  for (std::size_t i = 0; i < a.cycles(); ++i) {
    EXPECT_EQ(a.record.entries[i].tau, b.record.entries[i].tau);
    EXPECT_EQ(a.record.entries[i].outcome, b.record.entries[i].outcome);
    EXPECT_EQ(a.posteriors[i].weights, b.posteriors[i].weights);
  }
}

TEST(ProtocolTest, BatchMatchesIndividualRuns) {
  auto p = small_noisy();
  p.schedule = Schedule::uniform(0.1, 3.0);
  const auto batch = run_batch(InitialCondition::fock(2), p, 4, 10);
  const auto single = run_protocol(InitialCondition::fock(2), p, 12);
  ASSERT_EQ(batch[2].index, 12u);
  ASSERT_EQ(batch[2].cycles(), single.cycles());
  for (std::size_t i = 0; i < single.cycles(); ++i) {
    EXPECT_EQ(batch[2].record.entries[i].tau, single.record.entries[i].tau);
  }
}

// Conditioning on an outcome may raise the fidelity; the drive and measurement
// windows between projections may not.
TEST(ProtocolTest, FidelityNeverIncreasesInsideWindows) {
  auto p = small_noisy();
  for (std::uint64_t i = 0; i < 6; ++i) {
    const auto log = run_protocol(InitialCondition::fock(2), p, i);
    for (std::size_t k = 1; k < log.samples.size(); ++k) {
      if (log.samples[k].cycle != log.samples[k - 1].cycle) continue;
      EXPECT_LE(log.samples[k].fidelity, log.samples[k - 1].fidelity * (1.0 + 1e-12)) << k;
      EXPECT_GE(log.samples[k].time, log.samples[k - 1].time);
    }
    EXPECT_GT(log.samples.back().fidelity, 0.0);
  }
}

TEST(ProtocolTest, NoiselessModeKeepsUnitFidelity) {
  ProtocolParams p;
  p.gamma = 0.0;
  p.tau_eit = 0.0;
  p.samples_per_window = 3;
  const auto log = run_protocol(InitialCondition::fock(3), p, 0);
  EXPECT_EQ(log.mode, SimulationMode::NoiselessPure);
  for (const auto& s : log.samples) {
    EXPECT_NEAR(s.fidelity, 1.0, 1e-12);
    EXPECT_NEAR(s.p_no_rydberg + s.p_rydberg, 1.0, 1e-12);
  }
  EXPECT_TRUE(log.converged);
  EXPECT_EQ(log.inferred, 2u);
}

TEST(ProtocolTest, SuperpositionCollapsesOntoOneCandidate) {
  ProtocolParams p;
  p.gamma = 0.0;
  p.tau_eit = 0.0;
  p.n_max = 3;
  p.candidates = {FockDistribution::delta(1), FockDistribution::delta(2), FockDistribution::delta(3)};
  p.prior = Posterior{{0.5, 0.3, 0.2}};
  p.schedule = Schedule::uniform(0.0, kTwoPi / p.omega);
  p.max_cycles = 60;
  InitialCondition init;
  init.populations.p = {0.0, 0.5, 0.3, 0.2};
  const auto log = run_protocol(init, p, 3);
  ASSERT_TRUE(log.converged);
  EXPECT_GE(log.posteriors.back().weights[log.inferred], 0.99);
}

TEST(ProtocolTest, EjectionReducesAtomCount) {
  auto p = small_noisy();
  p.ejection = true;
  p.max_cycles = 25;
  int ejected = 0;
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto log = run_protocol(InitialCondition::fock(2), p, i);
    int rydberg = 0;
    for (const auto& e : log.record.entries) rydberg += e.outcome == Outcome::Rydberg;
    EXPECT_EQ(log.ejected, rydberg);
    EXPECT_LE(log.ejected, 2);
    ejected += log.ejected;
  }
  EXPECT_GT(ejected, 0);
}

TEST(ProtocolTest, LastAtomCanBeEjected) {
  auto p = small_noisy();
  p.ejection = true;
  p.atoms = 2;
  p.n_max = 2;
  p.candidates = {FockDistribution::delta(1), FockDistribution::delta(2)};
  p.max_cycles = 30;
  int emptied = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto log = run_protocol(InitialCondition::fock(2), p, i);
    EXPECT_LE(log.ejected, 2);
    emptied += log.ejected == 2;
  }
  EXPECT_GT(emptied, 0);
}

TEST(ProtocolTest, SummaryCountsConvergedRuns) {
  std::vector<TrajectoryLog> logs(3);
  logs[0].converged = true;
  logs[0].inferred = 1;
  logs[0].record.entries.resize(4);
  logs[1].record.entries.resize(2);
  logs[2].converged = true;
  logs[2].inferred = 1;
  logs[2].record.entries.resize(6);
  const auto s = summarize(logs, 2);
  EXPECT_EQ(s.converged, 2u);
  EXPECT_EQ(s.inferred_counts, (std::vector<std::size_t>{0, 2}));
  EXPECT_DOUBLE_EQ(s.mean_cycles, 4.0);
}

}  // namespace
}  // namespace qndcount
