#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "phasemon/core_model.hpp"
#include "phasemon/errors.hpp"
#include "phasemon/text.hpp"

namespace phasemon {

struct WorkloadSpec {
  std::string name;
  std::vector<WorkloadSegment> segments;
  std::uint64_t seed = 1;

  Cycles total_duration() const {
    Cycles t = 0;
    for (const auto& s : segments) t += s.duration;
    return t;
  }

  void validate(Cycles tau_min = 1) const {
    if (segments.empty()) throw ValidationError("workload '" + name + "' has no segments");
    for (std::size_t i = 0; i < segments.size(); ++i) {
      try {
        segments[i].validate();
      } catch (const ValidationError& e) {
        throw ValidationError("workload '" + name + "' segment " + std::to_string(i) + ": " + e.what());
      }
    }
    if (total_duration() < tau_min)
      throw ValidationError("workload '" + name + "' is shorter than tau_min (" + std::to_string(tau_min) + ")");
  }

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

/// Validates `spec` and returns its segment stream.
inline std::vector<WorkloadSegment> generate_workload(const WorkloadSpec& spec, Cycles tau_min = 1) {
  spec.validate(tau_min);
  return spec.segments;
}

namespace presets {

inline constexpr Cycles kSteadyDuration = 200'000'000;

// One long constant segment.
inline WorkloadSpec steady(Cycles duration = kSteadyDuration, double demand = 1.0, std::uint64_t seed = 1) {
  return WorkloadSpec{"steady", {{duration, demand, 0.0, 0.0}}, seed};
}

// Integer-only start, a long mixed int/FP stretch that saturates a 2-issue
// core, then an integer-heavy tail at low demand. At 100K-cycle intervals the
// segments cover intervals 0-29, 30-184 and 185-269.
inline WorkloadSpec fft_like(std::uint64_t seed = 1) {
  return WorkloadSpec{"fft_like",
                      {
                          {3'000'000, 1.4, 0.0, 0.02},
                          {15'500'000, 3.2, 0.55, 0.02},
                          {8'500'000, 1.1, 0.1, 0.02},
                      },
                      seed};
}

// Two alternating behaviours; one period is 100 intervals of 500K cycles.
inline WorkloadSpec fmm_like(std::uint64_t seed = 1) {
  WorkloadSpec w{"fmm_like", {}, seed};
  for (int rep = 0; rep < 4; ++rep) {
    w.segments.push_back({25'000'000, 3.2, 0.55, 0.05});
    w.segments.push_back({25'000'000, 1.1, 0.1, 0.05});
  }
  return w;
}

}  // namespace presets

inline const std::vector<std::string_view>& preset_names() {
  static const std::vector<std::string_view> names{"steady", "fft_like", "fmm_like"};
  return names;
}

inline WorkloadSpec make_preset(std::string_view name, std::uint64_t seed = 1) {
  if (name == "steady") return presets::steady(presets::kSteadyDuration, 1.0, seed);
  if (name == "fft_like") return presets::fft_like(seed);
  if (name == "fmm_like") return presets::fmm_like(seed);
  throw ValidationError("unknown workload preset '" + std::string(name) + "'");
}

// Workload description files use the same key=value layout as experiment
// configs:
//   name=...  seed=N  segment.<i>.{duration,ipc_demand,fp_fraction,noise_amplitude}=...
inline void write_workload_spec(const WorkloadSpec& spec, std::ostream& out) {
  out << "name=" << spec.name << '\n' << "seed=" << spec.seed << '\n';
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    const auto& s = spec.segments[i];
    const auto p = "segment." + std::to_string(i) + '.';
    out << p << "duration=" << s.duration << '\n'
        << p << "ipc_demand=" << text::format_double(s.ipc_demand) << '\n'
        << p << "fp_fraction=" << text::format_double(s.fp_fraction) << '\n'
        << p << "noise_amplitude=" << text::format_double(s.noise_amplitude) << '\n';
  }
}

inline WorkloadSpec read_workload_spec(std::istream& in) {
  const auto kv = text::parse_kv(in);
  WorkloadSpec spec;
  std::map<std::size_t, WorkloadSegment> segs;
  for (const auto& [key, entry] : kv) {
    const auto& v = entry.value;
    if (key == "name") {
      spec.name = v;
    } else if (key == "seed") {
      auto n = text::parse_u64(v);
      if (!n) throw ParseError(entry.line, "seed must be an unsigned integer");
      spec.seed = *n;
    } else if (key.rfind("segment.", 0) == 0) {
      const auto parts = text::split(key, '.');
      if (parts.size() != 3) throw ParseError(entry.line, "expected segment.<index>.<field>");
      auto idx = text::parse_u64(parts[1]);
      if (!idx) throw ParseError(entry.line, "bad segment index");
      auto& seg = segs[*idx];
      const auto field = parts[2];
      if (field == "duration") {
        auto n = text::parse_u64(v);
        if (!n) throw ParseError(entry.line, "duration must be an unsigned integer");
        seg.duration = *n;
      } else {
        auto d = text::parse_double(v);
        if (!d) throw ParseError(entry.line, "expected a number for " + key);
        if (field == "ipc_demand") seg.ipc_demand = *d;
        else if (field == "fp_fraction") seg.fp_fraction = *d;
        else if (field == "noise_amplitude") seg.noise_amplitude = *d;
        else throw ParseError(entry.line, "unknown segment field '" + std::string(field) + "'");
      }
    } else {
      throw ParseError(entry.line, "unknown key '" + key + "'");
    }
  }
  std::size_t expect = 0;
  for (auto& [idx, seg] : segs) {
    if (idx != expect++) throw ValidationError("segment indices must be contiguous from 0");
    spec.segments.push_back(seg);
  }
  return spec;
}

inline WorkloadSpec load_workload_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open workload spec '" + path + "'");
  return read_workload_spec(in);
}

}  // namespace phasemon
