#include <gtest/gtest.h>

#include <cmath>

#include <qndcount/analysis.hpp>
#include <qndcount/dynamics.hpp>
#include <qndcount/errors.hpp>

namespace qndcount {
namespace {

constexpr double kOmega = kTwoPi * 2.5e6;
constexpr double kGamma = kTwoPi * 0.3e6;

TEST(DetectionTime, ClosedForms) {
  for (int n = 1; n <= 20; ++n) {
    const double nn = n;
    EXPECT_DOUBLE_EQ(detection_time({Regime::Noiseless, nn, kOmega, kGamma}), std::sqrt(nn) / kOmega);
    EXPECT_DOUBLE_EQ(detection_time({Regime::NoisyFrequency, nn, kOmega, kGamma}),
                     kGamma * nn / (kOmega * kOmega));
    EXPECT_DOUBLE_EQ(detection_time({Regime::SteadyState, nn, kOmega, kGamma}),
                     nn * (1 + nn) * (1 + nn) / kGamma);
  }
}

TEST(DetectionTime, FisherReachesOneAtDetectionTime) {
  for (Regime r : {Regime::Noiseless, Regime::NoisyFrequency, Regime::SteadyState}) {
    const RegimeParams p{r, 4.0, kOmega, kGamma};
    EXPECT_NEAR(fisher_closed_form(p, detection_time(p)), 1.0, 1e-12) << to_string(r);
  }
}

TEST(Fisher, NumericMatchesClosedForm) {
  for (Regime r : {Regime::Noiseless, Regime::NoisyFrequency, Regime::SteadyState}) {
    for (int n = 1; n <= 10; ++n) {
      const RegimeParams p{r, static_cast<double>(n), kOmega, kGamma};
      const double tstar = detection_time(p);
      for (double scale : {0.3, 1.0, 2.0}) {
        double t = scale * tstar;
        // Keep the oscillating signal inside its first quarter period.
        if (r == Regime::Noiseless) t = std::min(t, 0.7 * kPi / (2.0 * std::sqrt(n * 1.0) * kOmega));
        const double closed = fisher_closed_form(p, t);
        EXPECT_NEAR(fisher_numeric(p, t) / closed, 1.0, 0.01) << to_string(r) << " n=" << n;
      }
    }
  }
}

TEST(Fisher, GenericTwoOutcomeFormula) {
  // p(n) = n / (n + 1) gives F = (dp/dn)^2 / (p (1 - p)) = 1 / (n (n + 1)^2).
  const SignalFn same = [](double, double n) { return n / (n + 1.0); };
  const SignalFn diff = [](double, double n) { return 1.0 / (n + 1.0); };
  EXPECT_NEAR(fisher_numeric(same, diff, 3.0, 1.0), 1.0 / (3.0 * 16.0), 1e-8);
}

TEST(Regimes, NamesRoundTrip) {
  for (Regime r : {Regime::Noiseless, Regime::NoisyFrequency, Regime::SteadyState}) {
    EXPECT_EQ(regime_from_string(to_string(r)), r);
  }
  EXPECT_EQ(regime_from_string("noisy"), Regime::NoisyFrequency);
  EXPECT_EQ(regime_from_string("steady"), Regime::SteadyState);
  EXPECT_THROW(regime_from_string("quantum"), Error);
  EXPECT_THROW((RegimeParams{Regime::NoisyFrequency, 1.0, 1.0, 0.0}).validate(), DomainError);
}

TEST(SteadyState, PopulationsAndPropagation) {
  const auto [ps, pr] = steady_state_populations(5);
  EXPECT_DOUBLE_EQ(ps, 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(pr, 5.0 / 6.0);
  EXPECT_THROW(steady_state_populations(0), DomainError);
  const auto p = block_populations(evolve_block(fock_block_state(3, 6), 30.0 / kGamma, kOmega, kGamma));
  EXPECT_NEAR(p.rydberg, 0.75, 5e-3);
  EXPECT_DOUBLE_EQ(steady_state_dwell(kGamma, 3.0), 3.0 / kGamma);
}

TEST(TauGridTest, UniformSpacing) {
  const auto taus = TauGrid{8, kPi}.taus(2.0);
  ASSERT_EQ(taus.size(), 8u);
  EXPECT_DOUBLE_EQ(taus.front(), kPi / 16.0);
  EXPECT_DOUBLE_EQ(taus.back(), kPi / 2.0);
}

// MLE fidelity from explicit sequence enumeration with the likelihood API.
double brute_fidelity(const std::vector<double>& taus, const FidelityProblem& p) {
  const std::size_t T = taus.size();
  double f = 0.0;
  for (std::size_t code = 0; code < (std::size_t{1} << T); ++code) {
    MeasurementRecord r;
    for (std::size_t i = 0; i < T; ++i) {
      r.entries.push_back({taus[i], (code >> i) & 1 ? Outcome::Rydberg : Outcome::NoRydberg});
    }
    double best = -1.0;
    for (std::size_t a = 0; a < p.candidates.size(); ++a) {
      const double joint = p.prior.weights[a] * marginal_likelihood(r, p.candidates[a], p.omega, p.noise);
      if (joint > best * (1.0 + 1e-12)) best = joint;
    }
    f += best;
  }
  return f;
}

TEST(FidelityTest, MatchesEnumeration) {
  const auto toy = two_candidate_toy();
  for (const std::vector<double>& taus : {std::vector<double>{1.0}, std::vector<double>{6.3, 5.4},
                                          std::vector<double>{0.7, 2.2, 4.1}}) {
    EXPECT_NEAR(expected_fidelity(taus, toy), brute_fidelity(taus, toy), 1e-12);
  }
  FidelityProblem noisy{{FockDistribution::delta(1), FockDistribution::delta(2), FockDistribution::delta(3)},
                        Posterior{{0.2, 0.5, 0.3}}, 1.0, NoiseConfig{0.2, 0.1, 5, false}};
  EXPECT_NEAR(expected_fidelity({1.1, 2.0, 0.6}, noisy), brute_fidelity({1.1, 2.0, 0.6}, noisy), 1e-10);
}

TEST(FidelityTest, OutcomeSequencesAreComplete) {
  const auto toy = two_candidate_toy();
  EXPECT_NEAR(outcome_sequence_mass({0.3, 1.9, 4.4, 0.8}, toy), 1.0, 1e-12);
  EXPECT_THROW(expected_fidelity(std::vector<double>(kMaxFidelityCycles + 1, 1.0), toy), ResourceError);
}

TEST(ScheduleOptimizer, LocalReproducesToyValues) {
  const auto r = optimize_schedule_local(2, two_candidate_toy());
  ASSERT_EQ(r.fidelity_trace.size(), 2u);
  EXPECT_NEAR(100.0 * r.fidelity_trace[0], 96.59, 0.10);
  EXPECT_NEAR(100.0 * r.fidelity_trace[1], 99.84, 0.10);
  EXPECT_NEAR(expected_fidelity(r.taus, two_candidate_toy()), r.fidelity_trace[1], 1e-14);
}

TEST(ScheduleOptimizer, GlobalBeatsLocalAtFinalCycleOnCoarseGrid) {
  const TauGrid grid{300, 4.0 * kPi};
  const auto toy = two_candidate_toy();
  const auto local = optimize_schedule_local(2, toy, grid);
  const auto global = optimize_schedule_global(2, toy, grid);
  EXPECT_GE(global.fidelity_trace[1], local.fidelity_trace[1] - 1e-14);
  EXPECT_GE(local.fidelity_trace[0], global.fidelity_trace[0] - 1e-14);
}

TEST(ScheduleOptimizer, GlobalSearchHonoursResourceGuard) {
  EXPECT_THROW(optimize_schedule_global(3, two_candidate_toy(), TauGrid{}, 2.0e7), ResourceError);
}

TEST(GreedyTest, PicksInformativeTimeFromGrid) {
  SequentialPosterior filter({FockDistribution::delta(1), FockDistribution::delta(2)},
                             Posterior::uniform(2), 1.0, NoiseConfig{});
  const auto taus = TauGrid{200, kTwoPi}.taus(1.0);
  const double tau = greedy_next_tau(filter, taus);
  EXPECT_NE(std::find(taus.begin(), taus.end(), tau), taus.end());
  FidelityProblem p{filter.candidates(), filter.prior(), 1.0, NoiseConfig{}};
  double best = 0.0;
  for (double t : taus) best = std::max(best, expected_fidelity({t}, p));
  EXPECT_NEAR(expected_fidelity({tau}, p), best, 1e-12);
}

}  // namespace
}  // namespace qndcount
