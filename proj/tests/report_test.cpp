#include <gtest/gtest.h>

#include <sstream>

#include "phasemon/experiment.hpp"
#include "phasemon/report.hpp"
#include "support.hpp"

namespace phasemon {
namespace {

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

TEST(ScatterCsv, EmptyRunIsHeaderOnly) {
  std::ostringstream out;
  emit_scatter_csv({}, out);
  EXPECT_EQ(out.str(), std::string(kScatterHeader) + "\n");
}

TEST(ScatterCsv, UnorderedRowsRejected) {
  std::vector<ScatterRow> rows(2);
  rows[0].interval_index = 4;
  rows[1].interval_index = 3;
  std::ostringstream out;
  EXPECT_THROW(emit_scatter_csv(rows, out), UsageError);
}

TEST(ScatterCsv, RowFormat) {
  ScatterRow r{12, 1200000, 100000, 250000, 2.5, 0.625, 3, {"throughput_change", "phase_recurred"}};
  std::ostringstream out;
  emit_scatter_csv(std::vector<ScatterRow>{r}, out);
  EXPECT_EQ(out.str(), std::string(kScatterHeader) + "\n12,1200000,100000,250000,2.5,0.625,3,throughput_change;phase_recurred\n");
}

TEST(ScatterCsv, OneTauDoubledRow) {
  SimulationOptions opt;
  opt.mode = IntervalMode::adaptive();
  // 76 intervals at 100K reach the first doubling; stop shortly after.
  const auto run = simulate(MachineState::table1(), presets::steady(8'000'000), opt);
  const auto a = render(run);
  std::size_t doubled = 0;
  std::istringstream in(a.scatter_csv);
  std::string line;
  while (std::getline(in, line))
    if (line.ends_with(",tau_doubled")) ++doubled;
  EXPECT_EQ(doubled, 1u);
}

TEST(Summary, CountsMatchScatter) {
  SimulationOptions opt;
  const auto run = simulate(MachineState::table1(), make_preset("fft_like"), opt);
  const auto a = render(run);
  const auto s = summarize(run);
  EXPECT_EQ(s.sample_count, line_count(a.scatter_csv) - 1);
  EXPECT_EQ(s.phase_count, 3u);
  EXPECT_EQ(s.migration_count, 2u);
  std::stringstream buf;
  write_summary(s, buf);
  EXPECT_EQ(read_summary(buf), s);
}

TEST(Summary, EveryEventHasAnnotatedRow) {
  SimulationOptions opt;
  opt.mode = IntervalMode::adaptive();
  const auto run = simulate(MachineState::table1(), make_preset("fmm_like"), opt);
  std::size_t annotated = 0;
  for (const auto& r : run.rows) annotated += r.events.size();
  EXPECT_EQ(annotated, run.events.size());
  for (const auto& e : run.events) {
    const auto& row = run.rows.at(e.interval_index);
    EXPECT_NE(std::find(row.events.begin(), row.events.end(), e.kind), row.events.end());
  }
}

TEST(OverheadReport, SelfComparisonIsOne) {
  Summary s;
  s.sample_count = 500;
  s.total_cycles = 1000;
  EXPECT_EQ(overhead_report(s, s).ratio, 1.0);
}

TEST(OverheadReport, MismatchedBudgetsRejected) {
  Summary a, b;
  a.sample_count = b.sample_count = 10;
  a.total_cycles = 1000;
  b.total_cycles = 2000;
  EXPECT_THROW(overhead_report(a, b), UsageError);
}

TEST(OverheadReport, VariableRunThatNeverDoublesHasRatioOne) {
  // 70 intervals ends the run before the first doubling at 76.
  const auto short_run = presets::steady(7'000'000);
  SimulationOptions fixed, variable;
  variable.mode = IntervalMode::adaptive();
  const auto f = summarize(simulate(MachineState::table1(), short_run, fixed));
  const auto vrun = simulate(MachineState::table1(), short_run, variable);
  for (const auto& e : vrun.events) ASSERT_NE(e.kind, "tau_doubled");
  EXPECT_EQ(overhead_report(f, summarize(vrun)).ratio, 1.0);
}

TEST(ExperimentConfig, ParsesAllSections) {
  std::stringstream in(
      "# comment\n"
      "machine.cores=A0:A,B0:B\n"
      "machine.A0.int_fu_count=3\n"
      "machine.start_core=A0\n"
      "machine.migration_penalty=0\n"
      "workload.preset=steady\n"
      "workload.duration=1000000\n"
      "detector.delta_th=80\n"
      "detector.util_window=3\n"
      "detector.normalization=raw\n"
      "detector.recurrence_matching=false\n"
      "detector.tau_min=50000\n"
      "run.mode=variable\n"
      "run.seed=9\n"
      "run.out=somewhere\n");
  const auto cfg = parse_experiment_config(in);
  ASSERT_EQ(cfg.cores.size(), 2u);
  EXPECT_EQ(cfg.cores[0].int_fu_count, 3u);
  EXPECT_EQ(cfg.cores[1].core_class, CoreClass::B);
  EXPECT_EQ(cfg.start_core, "A0");
  EXPECT_EQ(cfg.migration_penalty, 0u);
  EXPECT_EQ(cfg.detector.delta_th, 80.0);
  EXPECT_EQ(cfg.detector.util_window, 3u);
  EXPECT_EQ(cfg.detector.normalization, Normalization::raw);
  EXPECT_FALSE(cfg.detector.recurrence_matching);
  EXPECT_EQ(cfg.detector.tau_max, 50000u * 64);
  EXPECT_TRUE(cfg.mode.variable);
  EXPECT_EQ(cfg.seed, std::optional<std::uint64_t>(9));
  EXPECT_EQ(cfg.out_dir, "somewhere");
  EXPECT_NO_THROW(cfg.validate());
}

TEST(ExperimentConfig, Errors) {
  auto parse = [](const std::string& s) {
    std::stringstream in(s);
    return parse_experiment_config(in);
  };
  EXPECT_THROW(parse("bogus.key=1\n"), ConfigError);
  EXPECT_THROW(parse("workload.preset=steady\nworkload.trace=x.csv\n"), ConfigError);
  EXPECT_THROW(parse("detector.delta_th=abc\n"), ConfigError);
  EXPECT_THROW(parse("no equals sign\n"), ConfigError);
  EXPECT_THROW(parse("").validate(), ConfigError);
  EXPECT_THROW(parse("workload.preset=steady\nrun.fixed_tau=10\n").validate(), ConfigError);
  EXPECT_THROW(parse("workload.preset=steady\ndetector.delta_under=0.99\n").validate(), ConfigError);
}

}  // namespace
}  // namespace phasemon
