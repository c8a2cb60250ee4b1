#include <gtest/gtest.h>

#include <random>
#include <set>

#include "phasemon/scheduler.hpp"
#include "phasemon/simulation.hpp"

namespace phasemon {
namespace {

PhaseEvent event(PhaseEventKind kind, std::uint64_t index = 7) { return PhaseEvent{index, kind, 0, 1, 0.0}; }

MachineState machine_with(const std::string& process, const std::string& core) {
  auto m = MachineState::table1();
  m.place(process, core);
  return m;
}

TEST(DecideMigration, OverUtilizationMovesUp) {
  auto m = machine_with("p0", "B0");
  m.place("p1", "A0");
  const auto mig = decide_migration(event(PhaseEventKind::over_utilization), m.core_of("p0"), m, "p0");
  ASSERT_TRUE(mig);
  EXPECT_EQ(mig->from_core, "B0");
  EXPECT_EQ(mig->to_core, "A1");
  EXPECT_EQ(mig->reason, MigrationReason::over_util);
  EXPECT_EQ(mig->interval_index, 7u);
}

TEST(DecideMigration, UnderUtilizationMovesDown) {
  auto m = machine_with("p0", "A0");
  m.place("p1", "B0");
  const auto mig = decide_migration(event(PhaseEventKind::under_utilization), m.core_of("p0"), m, "p0");
  ASSERT_TRUE(mig);
  EXPECT_EQ(mig->to_core, "B1");
  EXPECT_EQ(mig->reason, MigrationReason::under_util);
}

TEST(DecideMigration, NoStrongerClass) {
  const auto m = machine_with("p0", "A0");
  EXPECT_FALSE(decide_migration(event(PhaseEventKind::over_utilization), m.core_of("p0"), m, "p0"));
}

TEST(DecideMigration, NoWeakerClass) {
  const auto m = machine_with("p0", "B1");
  EXPECT_FALSE(decide_migration(event(PhaseEventKind::under_utilization), m.core_of("p0"), m, "p0"));
}

TEST(DecideMigration, ThroughputChangeNeverMigrates) {
  const auto m = machine_with("p0", "B0");
  for (auto k : {PhaseEventKind::throughput_change, PhaseEventKind::tau_doubled, PhaseEventKind::tau_halved,
                 PhaseEventKind::phase_recurred})
    EXPECT_FALSE(decide_migration(event(k), m.core_of("p0"), m, "p0"));
}

TEST(DecideMigration, NoFreeTarget) {
  auto m = machine_with("p0", "B0");
  m.place("p1", "A0");
  m.place("p2", "A1");
  EXPECT_FALSE(decide_migration(event(PhaseEventKind::over_utilization), m.core_of("p0"), m, "p0"));
}

TEST(ApplyMigration, UpdatesAssignmentAndChargesPenaltyOnce) {
  auto m = machine_with("p0", "B0");
  const MigrationEvent mig{3, "p0", "B0", "A0", MigrationReason::over_util};
  m = apply_migration(std::move(m), mig);
  EXPECT_EQ(m.assignment.at("p0"), "A0");
  EXPECT_FALSE(m.find("B0")->occupant);
  EXPECT_EQ(*m.find("A0")->occupant, "p0");
  EXPECT_EQ(m.consume_stall("p0", 100000), 10000u);
  EXPECT_EQ(m.consume_stall("p0", 100000), 0u);
}

TEST(ApplyMigration, OccupiedTargetIsConflict) {
  auto m = machine_with("p0", "B0");
  m.place("p1", "A0");
  EXPECT_THROW(apply_migration(m, MigrationEvent{3, "p0", "B0", "A0", MigrationReason::over_util}), SchedulingConflict);
}

TEST(ApplyMigration, ZeroPenaltyLeavesNextIntervalAlone) {
  auto m = MachineState::table1(0);
  m.place("p0", "B0");
  m = apply_migration(std::move(m), MigrationEvent{3, "p0", "B0", "A0", MigrationReason::over_util});
  EXPECT_EQ(m.consume_stall("p0", 100000), 0u);
}

TEST(ApplyMigration, PreservesBijection) {
  std::mt19937_64 rng(4);
  auto m = MachineState::table1();
  m.place("p0", "B0");
  m.place("p1", "A1");
  const std::vector<std::string> procs{"p0", "p1"};
  for (int i = 0; i < 500; ++i) {
    const auto& p = procs[rng() % 2];
    const auto kind = rng() % 2 ? PhaseEventKind::over_utilization : PhaseEventKind::under_utilization;
    if (auto mig = decide_migration(event(kind), m.core_of(p), m, p)) m = apply_migration(std::move(m), *mig);
    std::set<std::string> used;
    for (const auto& [proc, core] : m.assignment) {
      EXPECT_TRUE(used.insert(core).second);
      EXPECT_EQ(*m.find(core)->occupant, proc);
    }
    int occupied = 0;
    for (const auto& c : m.cores) occupied += c.occupant ? 1 : 0;
    EXPECT_EQ(occupied, 2);
  }
}

TEST(Simulate, FftLikeMigratesUpThenDown) {
  SimulationOptions opt;
  opt.start_core = "B0";
  const auto run = simulate(MachineState::table1(), make_preset("fft_like"), opt);
  ASSERT_EQ(run.migrations.size(), 2u);
  EXPECT_EQ(run.migrations[0].from_core, "B0");
  EXPECT_EQ(run.migrations[0].to_core, "A0");
  EXPECT_EQ(run.migrations[1].from_core, "A0");
  EXPECT_EQ(run.migrations[1].to_core, "B0");
  EXPECT_EQ(run.phases.size(), 3u);
}

TEST(Simulate, FmmLikeRecursOnSingleACore) {
  SimulationOptions opt;
  opt.start_core = "A0";
  const auto run = simulate(MachineState::from_specs({CoreSpec::a_type("A0")}), make_preset("fmm_like"), opt);
  EXPECT_EQ(run.phases.size(), 2u);
  std::size_t recurred = 0;
  for (const auto& e : run.events) recurred += e.kind == "phase_recurred";
  EXPECT_EQ(recurred, 6u);
}

TEST(Simulate, PenaltyShortensNextInterval) {
  SimulationOptions opt;
  const auto run = simulate(MachineState::table1(), make_preset("fft_like"), opt);
  const auto at = run.migrations.front().interval_index;
  const auto& next = run.samples[at + 1];
  EXPECT_EQ(next.source_core, "A0");
  // 3.2 IPC on the A core over 90K of the 100K cycles.
  EXPECT_NEAR(static_cast<double>(next.retired_instructions), 3.2 * 90000, 3.2 * 90000 * 0.021);
  EXPECT_EQ(run.samples[at + 2].retired_instructions > next.retired_instructions, true);
}

TEST(Simulate, SamplesAreContiguous) {
  SimulationOptions opt;
  opt.mode = IntervalMode::adaptive();
  const auto run = simulate(MachineState::table1(), make_preset("fmm_like"), opt);
  Cycles cycle = 0;
  for (std::size_t i = 0; i < run.samples.size(); ++i) {
    EXPECT_EQ(run.samples[i].index, i);
    EXPECT_EQ(run.samples[i].start_cycle, cycle);
    cycle += run.samples[i].tau;
  }
  EXPECT_EQ(cycle, run.total_cycles);
}

TEST(Simulate, VariableRunNeverTakesMoreSamples) {
  for (const char* name : {"steady", "fft_like", "fmm_like"}) {
    SimulationOptions fixed, variable;
    variable.mode = IntervalMode::adaptive();
    const auto f = simulate(MachineState::table1(0), make_preset(name), fixed);
    const auto v = simulate(MachineState::table1(0), make_preset(name), variable);
    EXPECT_LE(v.samples.size(), f.samples.size()) << name;
  }
}

TEST(Simulate, RawModeRescalesAcrossTauChanges) {
  SimulationOptions opt;
  opt.mode = IntervalMode::adaptive();
  opt.detector.normalization = Normalization::raw;
  const auto run = simulate(MachineState::table1(), presets::steady(50'000'000), opt);
  for (const auto& e : run.events) EXPECT_NE(e.kind, "throughput_change");
  EXPECT_EQ(run.phases.size(), 1u);
}

TEST(Simulate, UnknownStartCore) {
  SimulationOptions opt;
  opt.start_core = "C9";
  EXPECT_THROW(simulate(MachineState::table1(), make_preset("steady"), opt), ValidationError);
}

}  // namespace
}  // namespace phasemon
