#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "phasemon/errors.hpp"
#include "phasemon/types.hpp"

namespace phasemon {

/// Percent deviation of an interval's throughput from its phase's running
/// average. Positive when the interval is faster than the phase so far.
inline double throughput_delta(double th_i, double th_bar_prev) {
  if (!(th_bar_prev > 0.0))
    throw DomainError("throughput_delta: reference average must be > 0");
  return (th_i - th_bar_prev) * 100.0 / th_bar_prev;
}

/// Folds one more interval into a phase's incremental mean.
inline PhaseState update_running_average(PhaseState state, double th_i) {
  const auto n_prev = static_cast<double>(state.count);
  state.count += 1;
  state.running_avg = state.count == 1
                          ? th_i
                          : (th_i + state.running_avg * n_prev) / static_cast<double>(state.count);
  return state;
}

// Integer and FP workloads are rarely balanced; the busier unit class decides.
inline double effective_utilization(double util_int, double util_fp) {
  return std::max(util_int, util_fp);
}

enum class Dissimilarity { throughput, over_util, under_util };

class SimilarityVerdict {
 public:
  static SimilarityVerdict similar() { return SimilarityVerdict{}; }
  static SimilarityVerdict not_similar(Dissimilarity why) { return SimilarityVerdict{why}; }

  bool is_similar() const noexcept { return !reason_.has_value(); }
  Dissimilarity reason() const { return reason_.value(); }

  friend bool operator==(const SimilarityVerdict&, const SimilarityVerdict&) = default;

 private:
  SimilarityVerdict() = default;
  explicit SimilarityVerdict(Dissimilarity why) : reason_(why) {}

  std::optional<Dissimilarity> reason_;
};

/// Similarity test between an interval and its phase.
///
/// `util_history` holds up to `util_window` effective utilizations, newest
/// last. A utilization flag is raised only when the window is full and every
/// entry sits beyond the same threshold. A flag matching `phase_class` is
/// ignored: the phase was opened for exactly that condition, so the interval
/// still belongs to it.
///
/// When several causes hold at once the reported reason is, in priority
/// order, throughput > over-utilization > under-utilization.
inline SimilarityVerdict classify_similarity(double d_i, std::span<const double> util_history,
                                             const DetectorConfig& cfg,
                                             UtilClass phase_class = UtilClass::normal) {
  if (util_history.empty()) throw UsageError("classify_similarity: empty utilization history");
  if (util_history.size() > cfg.util_window)
    util_history = util_history.subspan(util_history.size() - cfg.util_window);

  const bool full = util_history.size() == cfg.util_window;
  const bool over = full && std::all_of(util_history.begin(), util_history.end(),
                                        [&](double u) { return u > cfg.delta_over; });
  const bool under = full && std::all_of(util_history.begin(), util_history.end(),
                                         [&](double u) { return u < cfg.delta_under; });

  if (std::abs(d_i) > cfg.delta_th) return SimilarityVerdict::not_similar(Dissimilarity::throughput);
  if (over && phase_class != UtilClass::over)
    return SimilarityVerdict::not_similar(Dissimilarity::over_util);
  if (under && phase_class != UtilClass::under)
    return SimilarityVerdict::not_similar(Dissimilarity::under_util);
  return SimilarityVerdict::similar();
}

/// Looks for a previously closed phase the candidate interval resembles.
///
/// `closed` is ordered by closing time, most recent last; the most recently
/// closed match wins. A match needs the throughput within `delta_th` percent
/// of the phase average and the candidate's utilization band equal to the
/// band the phase was opened for.
inline std::optional<std::uint64_t> match_recurring_phase(double candidate_th, double candidate_util,
                                                          std::span<const PhaseState> closed,
                                                          const DetectorConfig& cfg) {
  const UtilClass cls = classify_utilization(candidate_util, cfg);
  for (auto it = closed.rbegin(); it != closed.rend(); ++it) {
    if (it->util_class != cls) continue;
    if (!(it->running_avg > 0.0)) {
      if (candidate_th == 0.0) return it->phase_id;
      continue;
    }
    if (std::abs(throughput_delta(candidate_th, it->running_avg)) <= cfg.delta_th) return it->phase_id;
  }
  return std::nullopt;
}

inline double normalized_throughput(const IntervalSample& s, Normalization mode) {
  const auto retired = static_cast<double>(s.retired_instructions);
  return mode == Normalization::per_cycle ? retired / static_cast<double>(s.tau) : retired;
}

/// Result of feeding one interval to the detector.
struct Observation {
  std::uint64_t phase_id = 0;
  std::vector<PhaseEvent> events;
  std::optional<double> d_i;  // absent on the very first interval
  double throughput = 0.0;    // normalized
  double utilization = 0.0;   // effective U_i
  bool opened_phase = false;  // interval starts a (new or recurring) phase
  double running_avg = 0.0;   // current phase average after this interval
};

/// Online phase detector for one process.
///
/// Feed samples in index order. Each interval is compared with the running
/// throughput average of the current phase; a dissimilar interval closes the
/// phase and starts a fresh one (or reopens a matching closed phase) seeded
/// with that interval.
class PhaseDetector {
 public:
  explicit PhaseDetector(DetectorConfig cfg = {}) : cfg_(cfg) {
    cfg_.validate();
    history_.reserve(cfg_.util_window + 1);
  }

  const DetectorConfig& config() const noexcept { return cfg_; }

  Observation observe(const IntervalSample& sample) {
    if (sample.index != next_index_)
      throw UsageError("observe: expected interval " + std::to_string(next_index_) + ", got " +
                       std::to_string(sample.index));
    validate(sample);
    ++next_index_;

    Observation obs;
    obs.throughput = normalized_throughput(sample, cfg_.normalization);
    obs.utilization = effective_utilization(sample.util_int, sample.util_fp);

    if (phases_.empty()) {
      phases_.push_back(update_running_average(PhaseState{0, 0.0, 0, UtilClass::normal}, obs.throughput));
      current_ = 0;
      push_history(obs.utilization);
      obs.phase_id = 0;
      obs.opened_phase = true;
      obs.running_avg = phases_[0].running_avg;
      return obs;
    }

    PhaseState& cur = phases_[current_];
    const double d = delta_against(obs.throughput, cur.running_avg);
    obs.d_i = d;
    push_history(obs.utilization);

    const auto verdict = classify_similarity(d, history_, cfg_, cur.util_class);
    if (verdict.is_similar()) {
      cur = update_running_average(cur, obs.throughput);
      obs.phase_id = cur.phase_id;
      obs.running_avg = cur.running_avg;
      return obs;
    }

    const std::uint64_t old_id = cur.phase_id;
    const PhaseEventKind cause = cause_of(verdict.reason());

    std::optional<std::uint64_t> match;
    if (cfg_.recurrence_matching) {
      std::vector<PhaseState> candidates;
      candidates.reserve(closed_order_.size());
      for (auto id : closed_order_) candidates.push_back(phases_[id]);
      match = match_recurring_phase(obs.throughput, obs.utilization, candidates, cfg_);
    }
    closed_order_.push_back(old_id);

    if (match) {
      closed_order_.erase(std::find(closed_order_.begin(), closed_order_.end(), *match));
      current_ = *match;
      phases_[current_] = update_running_average(phases_[current_], obs.throughput);
    } else {
      const auto id = static_cast<std::uint64_t>(phases_.size());
      phases_.push_back(update_running_average(PhaseState{id, 0.0, 0, class_of(verdict.reason())},
                                               obs.throughput));
      current_ = id;
    }
    history_.clear();

    const std::uint64_t new_id = phases_[current_].phase_id;
    obs.events.push_back(PhaseEvent{sample.index, cause, old_id, new_id, d});
    if (match) obs.events.push_back(PhaseEvent{sample.index, PhaseEventKind::phase_recurred, old_id, new_id, d});
    obs.phase_id = new_id;
    obs.opened_phase = true;
    obs.running_avg = phases_[current_].running_avg;
    return obs;
  }

  // Rewrites every phase through `fn` (used to rescale averages when the
  // interval length changes). Ids and counts must be preserved.
  template <typename Fn>
  void transform_phases(Fn&& fn) {
    for (auto& p : phases_) {
      PhaseState next = fn(p);
      if (next.phase_id != p.phase_id || next.count != p.count)
        throw InvariantViolation("transform_phases changed phase identity");
      p = next;
    }
  }

  bool started() const noexcept { return !phases_.empty(); }
  const PhaseState& current_phase() const { return phases_.at(current_); }
  std::uint64_t next_index() const noexcept { return next_index_; }
  std::size_t phase_count() const noexcept { return phases_.size(); }

  // All phases ever created, indexed by phase id.
  std::span<const PhaseState> phases() const noexcept { return phases_; }

  std::span<const double> utilization_history() const noexcept { return history_; }

 private:
  // A phase with zero accumulated throughput has no meaningful percent
  // deviation: any nonzero interval counts as an unbounded change.
  static double delta_against(double th, double avg) {
    if (avg > 0.0) return throughput_delta(th, avg);
    return th == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }

  void push_history(double u) {
    history_.push_back(u);
    if (history_.size() > cfg_.util_window) history_.erase(history_.begin());
  }

  static PhaseEventKind cause_of(Dissimilarity d) {
    switch (d) {
      case Dissimilarity::throughput: return PhaseEventKind::throughput_change;
      case Dissimilarity::over_util: return PhaseEventKind::over_utilization;
      case Dissimilarity::under_util: return PhaseEventKind::under_utilization;
    }
    throw InvariantViolation("unknown dissimilarity");
  }

  static UtilClass class_of(Dissimilarity d) {
    switch (d) {
      case Dissimilarity::over_util: return UtilClass::over;
      case Dissimilarity::under_util: return UtilClass::under;
      default: return UtilClass::normal;
    }
  }

  DetectorConfig cfg_;
  std::vector<PhaseState> phases_;
  std::vector<std::uint64_t> closed_order_;  // most recently closed last
  std::vector<double> history_;
  std::uint64_t current_ = 0;
  std::uint64_t next_index_ = 0;
};

}  // namespace phasemon
