#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "phasemon/types.hpp"

namespace phasemon::testing {

// Contiguous samples at a constant per-cycle throughput and utilization.
inline void append_level(std::vector<IntervalSample>& out, std::size_t n, double ipc, double util,
                         Cycles tau = 100000, double util_fp = 0.0) {
  for (std::size_t i = 0; i < n; ++i) {
    IntervalSample s;
    s.index = out.size();
    s.start_cycle = out.empty() ? 0 : out.back().start_cycle + out.back().tau;
    s.tau = tau;
    s.retired_instructions = static_cast<std::uint64_t>(ipc * static_cast<double>(tau));
    s.util_int = util;
    s.util_fp = util_fp;
    s.source_core = "A0";
    out.push_back(s);
  }
}

// Piecewise-level random stream: a few behaviour levels, each held for a
// random run, with per-interval jitter. Covers similar intervals, throughput
// jumps and utilization streaks above/below the default thresholds.
inline std::vector<IntervalSample> random_stream(std::mt19937_64& rng, std::size_t max_len = 1000) {
  std::uniform_int_distribution<std::size_t> len_d(1, max_len);
  std::uniform_int_distribution<int> run_d(1, 60);
  std::uniform_real_distribution<double> ipc_d(0.05, 4.0);
  std::uniform_real_distribution<double> jitter_d(-0.2, 0.2);
  std::uniform_int_distribution<int> util_kind(0, 3);
  std::uniform_int_distribution<int> tau_pick(0, 2);
  const std::size_t len = len_d(rng);

  std::vector<IntervalSample> out;
  while (out.size() < len) {
    const double ipc = ipc_d(rng);
    const int kind = util_kind(rng);
    const int run = run_d(rng);
    for (int k = 0; k < run && out.size() < len; ++k) {
      double util;
      switch (kind) {
        case 0: util = std::uniform_real_distribution<double>(0.96, 1.0)(rng); break;
        case 1: util = std::uniform_real_distribution<double>(0.0, 0.29)(rng); break;
        default: util = std::uniform_real_distribution<double>(0.3, 0.95)(rng); break;
      }
      const Cycles tau = Cycles{100000} << tau_pick(rng);
      IntervalSample s;
      s.index = out.size();
      s.start_cycle = out.empty() ? 0 : out.back().start_cycle + out.back().tau;
      s.tau = tau;
      s.retired_instructions =
          static_cast<std::uint64_t>(std::max(0.0, ipc * (1.0 + jitter_d(rng))) * static_cast<double>(tau));
      s.util_int = util;
      s.util_fp = std::uniform_real_distribution<double>(0.0, util)(rng);
      s.source_core = "A0";
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace phasemon::testing
