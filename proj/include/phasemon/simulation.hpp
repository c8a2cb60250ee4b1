#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phasemon/core_model.hpp"
#include "phasemon/detector.hpp"
#include "phasemon/interval_control.hpp"
#include "phasemon/scheduler.hpp"
#include "phasemon/types.hpp"
#include "phasemon/workload.hpp"

namespace phasemon {

/// Fixed profiling interval, or the adaptive doubling/halving policy.
struct IntervalMode {
  bool variable = false;
  Cycles fixed_tau = 100000;

  static IntervalMode fixed(Cycles tau) { return {false, tau}; }
  static IntervalMode adaptive() { return {true, 0}; }

  std::string label() const { return variable ? "variable_tau" : "fixed_tau(" + std::to_string(fixed_tau) + ")"; }
};

/// Detector plus (in variable mode) the interval controller.
class PhaseProfiler {
 public:
  struct Step {
    Observation obs;
    std::optional<PhaseEvent> tau_event;
    Cycles next_tau = 0;
  };

  PhaseProfiler(const DetectorConfig& cfg, IntervalMode mode) : detector_(cfg), mode_(mode) {
    if (mode_.variable) {
      controller_.emplace(cfg);
    } else if (mode_.fixed_tau < 1) {
      throw ValidationError("fixed tau must be >= 1");
    }
  }

  Cycles tau() const { return controller_ ? controller_->tau() : mode_.fixed_tau; }
  const PhaseDetector& detector() const noexcept { return detector_; }
  const IntervalController* controller() const noexcept { return controller_ ? &*controller_ : nullptr; }

  Step observe(const IntervalSample& sample) {
    Step step;
    step.obs = detector_.observe(sample);
    if (controller_) {
      const Cycles before = controller_->tau();
      const TauUpdate upd = controller_->step(step.obs.running_avg, step.obs.opened_phase);
      if (upd.change) {
        step.tau_event = PhaseEvent{sample.index, *upd.change, step.obs.phase_id, step.obs.phase_id,
                                    step.obs.d_i.value_or(0.0)};
        const double ratio = upd.tau > before ? 2.0 : 0.5;
        const auto norm = detector_.config().normalization;
        detector_.transform_phases([&](const PhaseState& p) { return rescale_on_tau_change(p, ratio, norm); });
        if (norm == Normalization::raw) controller_->rescale_baseline(ratio);
      }
    }
    step.next_tau = tau();
    return step;
  }

 private:
  PhaseDetector detector_;
  IntervalMode mode_;
  std::optional<IntervalController> controller_;
};

/// One annotated line of the scatter output.
struct ScatterRow {
  std::uint64_t interval_index = 0;
  Cycles start_cycle = 0;
  Cycles tau = 0;
  std::uint64_t throughput_raw = 0;
  double throughput_per_cycle = 0.0;
  double utilization = 0.0;
  std::uint64_t phase_id = 0;
  std::vector<std::string> events;  // event names in emission order; empty = none

  friend bool operator==(const ScatterRow&, const ScatterRow&) = default;
};

/// Detector, interval-controller or scheduler event, flattened for output.
struct EventRecord {
  std::uint64_t interval_index = 0;
  std::string kind;
  std::uint64_t old_phase_id = 0;
  std::uint64_t new_phase_id = 0;
  std::optional<double> d_i;
  std::string from_core;
  std::string to_core;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct RunResult {
  std::string mode;
  Cycles total_cycles = 0;
  std::vector<ScatterRow> rows;
  std::vector<EventRecord> events;
  std::vector<MigrationEvent> migrations;
  std::vector<PhaseState> phases;
  std::vector<IntervalSample> samples;
};

struct SimulationOptions {
  DetectorConfig detector;
  IntervalMode mode = IntervalMode::fixed(100000);
  std::string start_core = "B0";
  std::string process = "p0";
};

namespace detail {

inline void record_step(RunResult& out, const IntervalSample& s, const PhaseProfiler::Step& step) {
  ScatterRow row;
  row.interval_index = s.index;
  row.start_cycle = s.start_cycle;
  row.tau = s.tau;
  row.throughput_raw = s.retired_instructions;
  row.throughput_per_cycle = static_cast<double>(s.retired_instructions) / static_cast<double>(s.tau);
  row.utilization = step.obs.utilization;
  row.phase_id = step.obs.phase_id;

  auto add = [&](const PhaseEvent& e) {
    row.events.emplace_back(to_string(e.kind));
    out.events.push_back(EventRecord{e.interval_index, std::string(to_string(e.kind)), e.old_phase_id,
                                     e.new_phase_id, e.d_i, {}, {}});
  };
  for (const auto& e : step.obs.events) add(e);
  if (step.tau_event) add(*step.tau_event);
  out.rows.push_back(std::move(row));
  out.samples.push_back(s);
}

inline void record_migration(RunResult& out, const MigrationEvent& m, std::uint64_t phase_id) {
  out.rows.back().events.emplace_back("migration");
  out.events.push_back(
      EventRecord{m.interval_index, "migration", phase_id, phase_id, std::nullopt, m.from_core, m.to_core});
  out.migrations.push_back(m);
}

inline void finish(RunResult& out, const PhaseProfiler& prof) {
  const auto phases = prof.detector().phases();
  out.phases.assign(phases.begin(), phases.end());
}

}  // namespace detail

/// Runs one process over `workload` on `machine`, starting on
/// `opt.start_core`. Utilization-driven phase changes may migrate it between
/// core classes; the stall is charged to its next interval.
inline RunResult simulate(MachineState machine, const WorkloadSpec& workload, const SimulationOptions& opt) {
  opt.detector.validate();
  const auto segments = generate_workload(workload, opt.detector.tau_min);
  machine.place(opt.process, opt.start_core);

  SegmentCursor cursor(segments);
  Rng rng(workload.seed);
  PhaseProfiler prof(opt.detector, opt.mode);

  RunResult out;
  out.mode = opt.mode.label();
  std::uint64_t index = 0;
  Cycles cycle = 0;
  while (!cursor.at_end()) {
    const CoreSpec core = machine.core_of(opt.process);
    const Cycles tau = prof.tau();
    const Cycles stall = machine.consume_stall(opt.process, tau);
    const auto sample = simulate_interval(core, cursor, tau, rng, index, cycle, stall);
    if (!sample) break;

    const auto step = prof.observe(*sample);
    detail::record_step(out, *sample, step);
    for (const auto& ev : step.obs.events) {
      if (auto m = decide_migration(ev, core, machine, opt.process)) {
        machine = apply_migration(std::move(machine), *m);
        detail::record_migration(out, *m, step.obs.phase_id);
      }
    }
    cycle += sample->tau;
    ++index;
  }
  out.total_cycles = cycle;
  detail::finish(out, prof);
  return out;
}

/// Detector-only pass over a recorded trace (interval lengths are whatever
/// the trace holds).
inline RunResult detect(std::span<const IntervalSample> trace, const DetectorConfig& cfg) {
  cfg.validate();
  PhaseProfiler prof(cfg, IntervalMode::fixed(trace.empty() ? cfg.tau_min : trace.front().tau));
  RunResult out;
  out.mode = "trace";
  for (const auto& s : trace) {
    const auto step = prof.observe(s);
    detail::record_step(out, s, step);
    out.total_cycles += s.tau;
  }
  detail::finish(out, prof);
  return out;
}

}  // namespace phasemon
