#include <gtest/gtest.h>

#include <random>

#include "phasemon/interval_control.hpp"

namespace phasemon {
namespace {

bool on_ladder(Cycles tau, const DetectorConfig& cfg) {
  for (Cycles t = cfg.tau_min; t <= cfg.tau_max; t *= 2)
    if (t == tau) return true;
  return false;
}

TEST(SteadinessCheck, Examples) {
  EXPECT_TRUE(steadiness_check(100.0, 100.0, 1.0));
  EXPECT_FALSE(steadiness_check(101.5, 100.0, 1.0));
  EXPECT_TRUE(steadiness_check(100.5, 100.0, 1.0));
  EXPECT_TRUE(steadiness_check(99.5, 100.0, 1.0));
  EXPECT_FALSE(steadiness_check(98.0, 100.0, 1.0));
}

TEST(SteadinessCheck, NonPositiveBaselineIsDomainError) {
  EXPECT_THROW(steadiness_check(1.0, 0.0, 1.0), DomainError);
}

TEST(UpdateIntervalLength, SeventyFiveSteadyDoubles) {
  const DetectorConfig cfg;
  IntervalController c(cfg);
  int doubled = 0;
  for (int i = 0; i < 74; ++i) EXPECT_FALSE(c.update_interval_length(true).change);
  EXPECT_EQ(c.steady_count(), 74u);
  const auto u = c.update_interval_length(true);
  if (u.change == PhaseEventKind::tau_doubled) ++doubled;
  EXPECT_EQ(doubled, 1);
  EXPECT_EQ(c.tau(), 200000u);
  EXPECT_EQ(c.steady_count(), 0u);
}

TEST(UpdateIntervalLength, UnsteadyHalvesAndResets) {
  const DetectorConfig cfg;
  IntervalController c(cfg);
  for (int i = 0; i < 150; ++i) c.update_interval_length(true);
  ASSERT_EQ(c.tau(), 400000u);
  for (int i = 0; i < 10; ++i) c.update_interval_length(true);
  const auto u = c.update_interval_length(false);
  EXPECT_EQ(u.change, PhaseEventKind::tau_halved);
  EXPECT_EQ(c.tau(), 200000u);
  EXPECT_EQ(c.steady_count(), 0u);
}

TEST(UpdateIntervalLength, ClampedAtFloorWithoutEvent) {
  const DetectorConfig cfg;
  IntervalController c(cfg);
  const auto u = c.update_interval_length(false);
  EXPECT_FALSE(u.change);
  EXPECT_EQ(c.tau(), cfg.tau_min);
}

TEST(UpdateIntervalLength, ClampedAtCeilingWithoutEvent) {
  const DetectorConfig cfg;
  IntervalController c(cfg);
  int doubles = 0;
  for (int i = 0; i < 75 * 10; ++i)
    if (c.update_interval_length(true).change) ++doubles;
  EXPECT_EQ(doubles, 6);
  EXPECT_EQ(c.tau(), cfg.tau_max);
}

TEST(RescaleOnTauChange, Examples) {
  const PhaseState raw{0, 400000, 3, UtilClass::normal};
  EXPECT_EQ(rescale_on_tau_change(raw, 2.0, Normalization::raw).running_avg, 800000);
  EXPECT_EQ(rescale_on_tau_change(PhaseState{0, 4.0, 3}, 2.0, Normalization::per_cycle).running_avg, 4.0);
  EXPECT_EQ(rescale_on_tau_change(PhaseState{0, 800000, 3}, 0.5, Normalization::raw).running_avg, 400000);
  EXPECT_THROW(rescale_on_tau_change(raw, 3.0, Normalization::raw), UsageError);
}

TEST(ControllerStep, FirstIntervalOfPhaseOnlySetsBaseline) {
  const DetectorConfig cfg;
  IntervalController c(cfg);
  c.step(5.0, true);
  EXPECT_EQ(c.steady_count(), 0u);
  c.step(5.0, false);
  EXPECT_EQ(c.steady_count(), 1u);
  c.step(9.0, true);  // new phase: neither counts nor resets
  EXPECT_EQ(c.steady_count(), 1u);
  c.step(9.5, false);  // 5.6 % move -> unsteady
  EXPECT_EQ(c.steady_count(), 0u);
}

// Property: scripted steadiness sequences double exactly after
// steady_upper_bound consecutive steady verdicts and never leave the ladder.
TEST(IntervalControlProperties, LadderWalk) {
  DetectorConfig cfg;
  cfg.steady_upper_bound = 7;
  std::mt19937_64 rng(31);
  std::bernoulli_distribution steady_d(0.93);
  IntervalController c(cfg);
  std::size_t run = 0;
  for (int i = 0; i < 100000; ++i) {
    const Cycles before = c.tau();
    const bool steady = steady_d(rng);
    const auto u = c.update_interval_length(steady);
    run = steady ? run + 1 : 0;
    if (u.change == PhaseEventKind::tau_doubled) {
      EXPECT_EQ(run % cfg.steady_upper_bound, 0u);
      EXPECT_EQ(c.tau(), before * 2);
    }
    if (u.change == PhaseEventKind::tau_halved) {
      EXPECT_FALSE(steady);
      EXPECT_EQ(c.tau(), before / 2);
    }
    if (!u.change) {
      EXPECT_EQ(c.tau(), before);
    }
    EXPECT_TRUE(on_ladder(c.tau(), cfg));
    EXPECT_LE(c.steady_count(), cfg.steady_upper_bound);
  }
}

TEST(IntervalControlProperties, ConstantThroughputReachesCeiling) {
  const DetectorConfig cfg;
  IntervalController c(cfg);
  c.step(2.0, true);
  for (int i = 0; i < 75 * 8; ++i) c.step(2.0, false);
  EXPECT_EQ(c.tau(), cfg.tau_max);
}

}  // namespace
}  // namespace phasemon
