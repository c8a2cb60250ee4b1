#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "phasemon/errors.hpp"
#include "phasemon/types.hpp"

namespace phasemon {

enum class CoreClass { A, B };

inline std::string_view to_string(CoreClass c) { return c == CoreClass::A ? "A" : "B"; }

/// Capability parameters of one core. Window sizes are carried for reporting
/// only; the throughput model reads issue width and FU counts.
struct CoreSpec {
  std::string name;
  CoreClass core_class = CoreClass::A;
  unsigned issue_width = 4;
  unsigned int_window = 80;
  unsigned fp_window = 32;
  unsigned int_fu_count = 4;
  unsigned fp_fu_count = 2;

  // 4-issue out-of-order core.
  static CoreSpec a_type(std::string name) { return CoreSpec{std::move(name), CoreClass::A, 4, 80, 32, 4, 2}; }
  // 2-issue out-of-order core.
  static CoreSpec b_type(std::string name) { return CoreSpec{std::move(name), CoreClass::B, 2, 56, 16, 2, 1}; }

  static CoreSpec of_class(CoreClass c, std::string name) {
    return c == CoreClass::A ? a_type(std::move(name)) : b_type(std::move(name));
  }

  void validate() const {
    if (name.empty()) throw ValidationError("core name must not be empty");
    if (issue_width < 1) throw ValidationError("core " + name + ": issue_width must be >= 1");
    if (int_fu_count < 1 || fp_fu_count < 1) throw ValidationError("core " + name + ": FU counts must be >= 1");
  }

  friend bool operator==(const CoreSpec&, const CoreSpec&) = default;
};

// True when `a` is at least as capable as `b` in every field.
inline bool dominates(const CoreSpec& a, const CoreSpec& b) {
  return a.issue_width >= b.issue_width && a.int_window >= b.int_window && a.fp_window >= b.fp_window &&
         a.int_fu_count >= b.int_fu_count && a.fp_fu_count >= b.fp_fu_count;
}

inline double achieved_ipc(const CoreSpec& core, double demand) {
  if (!(demand >= 0.0)) throw UsageError("achieved_ipc: demand must be >= 0");
  return std::min(demand, static_cast<double>(core.issue_width));
}

struct FuUtilization {
  double util_int = 0.0;
  double util_fp = 0.0;
};

inline FuUtilization fu_utilization(const CoreSpec& core, double int_ipc, double fp_ipc) {
  if (int_ipc < 0.0 || fp_ipc < 0.0) throw UsageError("fu_utilization: negative IPC");
  // Small slack for the int/fp split of an exactly saturated core.
  if (int_ipc + fp_ipc > static_cast<double>(core.issue_width) * (1.0 + 1e-12))
    throw UsageError("fu_utilization: int_ipc + fp_ipc exceeds issue width of " + core.name);
  return {std::min(1.0, int_ipc / core.int_fu_count), std::min(1.0, fp_ipc / core.fp_fu_count)};
}

/// A stretch of program behaviour with constant demand.
struct WorkloadSegment {
  Cycles duration = 1;
  double ipc_demand = 0.0;
  double fp_fraction = 0.0;
  double noise_amplitude = 0.0;

  void validate() const {
    if (duration < 1) throw ValidationError("segment duration must be >= 1");
    if (!(ipc_demand >= 0.0)) throw ValidationError("segment ipc_demand must be >= 0");
    if (!(fp_fraction >= 0.0 && fp_fraction <= 1.0)) throw ValidationError("segment fp_fraction outside [0,1]");
    if (!(noise_amplitude >= 0.0 && noise_amplitude < 1.0))
      throw ValidationError("segment noise_amplitude outside [0,1)");
  }

  friend bool operator==(const WorkloadSegment&, const WorkloadSegment&) = default;
};

/// Demand averaged over a span of program cycles that may cross segments.
struct BlendedDemand {
  Cycles cycles = 0;
  double ipc_demand = 0.0;
  double fp_fraction = 0.0;
  double noise_amplitude = 0.0;
};

/// Walks a segment list in program cycles.
class SegmentCursor {
 public:
  explicit SegmentCursor(std::span<const WorkloadSegment> segments) : segments_(segments) {}

  bool at_end() const noexcept { return segment_ >= segments_.size(); }

  Cycles remaining() const noexcept {
    if (at_end()) return 0;
    Cycles r = segments_[segment_].duration - offset_;
    for (std::size_t i = segment_ + 1; i < segments_.size(); ++i) r += segments_[i].duration;
    return r;
  }

  std::size_t segment_index() const noexcept { return segment_; }

  // Consumes up to `cycles` program cycles. Demand is cycle-weighted across
  // the covered segments; the FP fraction is weighted by demanded instructions.
  BlendedDemand take(Cycles cycles) {
    BlendedDemand out;
    double demand_cycles = 0.0, fp_instr = 0.0, noise_cycles = 0.0;
    while (cycles > 0 && !at_end()) {
      const auto& seg = segments_[segment_];
      const Cycles n = std::min(cycles, seg.duration - offset_);
      const auto w = static_cast<double>(n);
      demand_cycles += seg.ipc_demand * w;
      fp_instr += seg.ipc_demand * seg.fp_fraction * w;
      noise_cycles += seg.noise_amplitude * w;
      out.cycles += n;
      cycles -= n;
      offset_ += n;
      if (offset_ == seg.duration) {
        ++segment_;
        offset_ = 0;
      }
    }
    if (out.cycles > 0) {
      const auto total = static_cast<double>(out.cycles);
      out.ipc_demand = demand_cycles / total;
      out.fp_fraction = demand_cycles > 0.0 ? fp_instr / demand_cycles : 0.0;
      out.noise_amplitude = noise_cycles / total;
    }
    return out;
  }

 private:
  std::span<const WorkloadSegment> segments_;
  std::size_t segment_ = 0;
  Cycles offset_ = 0;
};

using Rng = std::mt19937_64;

/// Runs the process on `core` for one interval of `tau` cycles.
///
/// The first `stall_cycles` of the interval retire nothing and do not advance
/// the program (migration cost). The interval is cut short when the workload
/// ends; returns nullopt when there is nothing left to run.
inline std::optional<IntervalSample> simulate_interval(const CoreSpec& core, SegmentCursor& cursor, Cycles tau,
                                                       Rng& rng, std::uint64_t index, Cycles start_cycle,
                                                       Cycles stall_cycles = 0) {
  if (tau < 1) throw UsageError("simulate_interval: tau must be >= 1");
  if (cursor.at_end()) return std::nullopt;

  const Cycles stall = std::min(stall_cycles, tau);
  const BlendedDemand d = cursor.take(tau - stall);

  double demand = d.ipc_demand;
  if (d.noise_amplitude > 0.0) {
    std::uniform_real_distribution<double> jitter(-d.noise_amplitude, d.noise_amplitude);
    demand *= 1.0 + jitter(rng);
  }
  const double ipc = achieved_ipc(core, demand);
  const double fp_ipc = ipc * d.fp_fraction;
  const FuUtilization fu = fu_utilization(core, ipc - fp_ipc, fp_ipc);

  IntervalSample s;
  s.index = index;
  s.start_cycle = start_cycle;
  s.tau = stall + d.cycles;
  const double active = static_cast<double>(d.cycles) / static_cast<double>(s.tau);
  s.retired_instructions = static_cast<std::uint64_t>(std::llround(ipc * static_cast<double>(d.cycles)));
  s.util_int = fu.util_int * active;
  s.util_fp = fu.util_fp * active;
  s.source_core = core.name;
  return s;
}

}  // namespace phasemon
