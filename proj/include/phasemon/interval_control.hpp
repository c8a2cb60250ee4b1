#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "phasemon/errors.hpp"
#include "phasemon/types.hpp"

namespace phasemon {

/// True when the phase average moved by less than `steady_band` percent.
inline bool steadiness_check(double th_bar_i, double th_bar_prev, double steady_band) {
  if (!(th_bar_prev > 0.0)) throw DomainError("steadiness_check: previous average must be > 0");
  return std::abs(th_bar_i - th_bar_prev) * 100.0 / th_bar_prev < steady_band;
}

/// Adjusts a running average after the interval length changed by `ratio`
/// (2 or 1/2). Raw counts scale with the interval; per-cycle values do not.
inline PhaseState rescale_on_tau_change(PhaseState phase, double ratio, Normalization mode) {
  if (ratio != 2.0 && ratio != 0.5) throw UsageError("rescale_on_tau_change: ratio must be 2 or 1/2");
  if (mode == Normalization::raw) phase.running_avg *= ratio;
  return phase;
}

struct TauUpdate {
  Cycles tau = 0;
  std::optional<PhaseEventKind> change;  // tau_doubled / tau_halved, only if tau moved
};

/// Doubles the profiling interval after a run of steady intervals and halves
/// it on any unsteady one, staying on the ladder tau_min * 2^k <= tau_max.
class IntervalController {
 public:
  explicit IntervalController(const DetectorConfig& cfg) : cfg_(cfg), tau_(cfg.tau_min) { cfg_.validate(); }

  Cycles tau() const noexcept { return tau_; }
  std::size_t steady_count() const noexcept { return steady_count_; }
  double prev_running_avg() const noexcept { return prev_running_avg_; }

  TauUpdate update_interval_length(bool steady) {
    TauUpdate out;
    if (steady) {
      ++steady_count_;
      if (steady_count_ == cfg_.steady_upper_bound) {
        steady_count_ = 0;
        if (tau_ <= cfg_.tau_max / 2) {
          tau_ *= 2;
          out.change = PhaseEventKind::tau_doubled;
        }
      }
    } else {
      steady_count_ = 0;
      if (tau_ / 2 >= cfg_.tau_min) {
        tau_ /= 2;
        out.change = PhaseEventKind::tau_halved;
      }
    }
    out.tau = tau_;
    return out;
  }

  /// Per-interval driver. `running_avg` is the current phase's average after
  /// the interval was folded in. The first interval of a phase only records
  /// the baseline; the average just reset, so steadiness is not judged.
  TauUpdate step(double running_avg, bool opened_phase) {
    if (opened_phase) {
      prev_running_avg_ = running_avg;
      return TauUpdate{tau_, std::nullopt};
    }
    bool steady;
    if (prev_running_avg_ > 0.0) {
      steady = steadiness_check(running_avg, prev_running_avg_, cfg_.steady_band);
    } else {
      // A zero-throughput phase is steady only while it stays at zero.
      steady = running_avg == 0.0;
    }
    prev_running_avg_ = running_avg;
    return update_interval_length(steady);
  }

  // Keeps the steadiness baseline in the same units after a raw-mode rescale.
  void rescale_baseline(double ratio) { prev_running_avg_ *= ratio; }

 private:
  DetectorConfig cfg_;
  Cycles tau_;
  std::size_t steady_count_ = 0;
  double prev_running_avg_ = 0.0;
};

}  // namespace phasemon
