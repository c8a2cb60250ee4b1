#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "phasemon/errors.hpp"

namespace phasemon {

using Cycles = std::uint64_t;

/// One profiling interval's counters, as produced by the core model or read
/// from a recorded trace.
struct IntervalSample {
  std::uint64_t index = 0;
  Cycles start_cycle = 0;
  Cycles tau = 1;
  std::uint64_t retired_instructions = 0;
  double util_int = 0.0;
  double util_fp = 0.0;
  std::string source_core;

  friend bool operator==(const IntervalSample&, const IntervalSample&) = default;
};

inline void validate(const IntervalSample& s) {
  if (s.tau < 1) throw ValidationError("tau must be >= 1");
  if (!(s.util_int >= 0.0 && s.util_int <= 1.0))
    throw ValidationError("util_int outside [0,1]");
  if (!(s.util_fp >= 0.0 && s.util_fp <= 1.0))
    throw ValidationError("util_fp outside [0,1]");
}

enum class Normalization { raw, per_cycle };

inline std::string_view to_string(Normalization n) {
  return n == Normalization::raw ? "raw" : "per_cycle";
}

inline std::optional<Normalization> parse_normalization(std::string_view s) {
  if (s == "raw") return Normalization::raw;
  if (s == "per_cycle") return Normalization::per_cycle;
  return std::nullopt;
}

/// Thresholds shared by the detector and the interval controller.
struct DetectorConfig {
  double delta_th = 100.0;     // percent
  double delta_over = 0.95;    // fraction
  double delta_under = 0.30;   // fraction
  std::size_t util_window = 5;
  double steady_band = 1.0;    // percent
  std::size_t steady_upper_bound = 75;
  Cycles tau_min = 100000;
  Cycles tau_max = 6400000;
  Normalization normalization = Normalization::per_cycle;
  bool recurrence_matching = true;

  void validate() const {
    if (!(delta_under >= 0.0 && delta_under < delta_over && delta_over <= 1.0))
      throw ValidationError("require 0 <= delta_under < delta_over <= 1");
    if (!(delta_th > 0.0)) throw ValidationError("delta_th must be > 0");
    if (util_window < 1) throw ValidationError("util_window must be >= 1");
    if (!(steady_band > 0.0)) throw ValidationError("steady_band must be > 0");
    if (steady_upper_bound < 1) throw ValidationError("steady_upper_bound must be >= 1");
    if (tau_min < 1) throw ValidationError("tau_min must be >= 1");
    Cycles t = tau_min;
    while (t < tau_max && t <= tau_max / 2) t *= 2;
    if (t != tau_max) throw ValidationError("tau_max must be tau_min * 2^k");
  }
};

/// Utilization band of a single value, or the band a phase was opened for.
enum class UtilClass { normal, over, under };

inline UtilClass classify_utilization(double u, const DetectorConfig& cfg) {
  if (u > cfg.delta_over) return UtilClass::over;
  if (u < cfg.delta_under) return UtilClass::under;
  return UtilClass::normal;
}

struct PhaseState {
  std::uint64_t phase_id = 0;
  double running_avg = 0.0;
  std::uint64_t count = 0;
  // Over/under when the phase was opened by a utilization event.
  UtilClass util_class = UtilClass::normal;

  friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

enum class PhaseEventKind {
  throughput_change,
  over_utilization,
  under_utilization,
  tau_doubled,
  tau_halved,
  phase_recurred,
};

inline std::string_view to_string(PhaseEventKind k) {
  switch (k) {
    case PhaseEventKind::throughput_change: return "throughput_change";
    case PhaseEventKind::over_utilization: return "over_util";
    case PhaseEventKind::under_utilization: return "under_util";
    case PhaseEventKind::tau_doubled: return "tau_doubled";
    case PhaseEventKind::tau_halved: return "tau_halved";
    case PhaseEventKind::phase_recurred: return "phase_recurred";
  }
  return "unknown";
}

struct PhaseEvent {
  std::uint64_t interval_index = 0;
  PhaseEventKind kind = PhaseEventKind::throughput_change;
  std::uint64_t old_phase_id = 0;
  std::uint64_t new_phase_id = 0;
  double d_i = 0.0;  // percent

  friend bool operator==(const PhaseEvent&, const PhaseEvent&) = default;
};

}  // namespace phasemon
