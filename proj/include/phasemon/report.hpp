#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phasemon/errors.hpp"
#include "phasemon/simulation.hpp"
#include "phasemon/text.hpp"

namespace phasemon {

inline constexpr std::string_view kScatterHeader =
    "interval_index,start_cycle,tau,throughput_raw,throughput_per_cycle,utilization,phase_id,event";
inline constexpr std::string_view kEventsHeader = "interval_index,kind,old_phase_id,new_phase_id,d_i,from_core,to_core";

// Multiple events on one interval are joined with ';'.
inline std::string join_events(const std::vector<std::string>& events) {
  if (events.empty()) return "none";
  std::string out;
  for (const auto& e : events) {
    if (!out.empty()) out += ';';
    out += e;
  }
  return out;
}

inline void emit_scatter_csv(std::span<const ScatterRow> rows, std::ostream& out) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].interval_index <= rows[i - 1].interval_index)
      throw UsageError("emit_scatter_csv: rows not ordered by interval_index");
  out << kScatterHeader << '\n';
  for (const auto& r : rows) {
    out << r.interval_index << ',' << r.start_cycle << ',' << r.tau << ',' << r.throughput_raw << ','
        << text::format_double(r.throughput_per_cycle) << ',' << text::format_double(r.utilization) << ','
        << r.phase_id << ',' << join_events(r.events) << '\n';
  }
}

inline void emit_events_csv(std::span<const EventRecord> events, std::ostream& out) {
  out << kEventsHeader << '\n';
  for (const auto& e : events) {
    out << e.interval_index << ',' << e.kind << ',' << e.old_phase_id << ',' << e.new_phase_id << ','
        << (e.d_i ? text::format_double(*e.d_i) : std::string()) << ',' << e.from_core << ',' << e.to_core << '\n';
  }
}

struct PhaseSummary {
  std::uint64_t phase_id = 0;
  std::uint64_t intervals = 0;
  double mean_throughput_per_cycle = 0.0;
  double mean_utilization = 0.0;

  friend bool operator==(const PhaseSummary&, const PhaseSummary&) = default;
};

struct Summary {
  std::string mode;
  std::uint64_t sample_count = 0;
  std::uint64_t phase_count = 0;
  std::uint64_t migration_count = 0;
  Cycles total_cycles = 0;
  std::vector<PhaseSummary> phases;

  friend bool operator==(const Summary&, const Summary&) = default;
};

inline Summary summarize(const RunResult& run) {
  Summary s;
  s.mode = run.mode;
  s.sample_count = run.rows.size();
  s.phase_count = run.phases.size();
  s.migration_count = run.migrations.size();
  s.total_cycles = run.total_cycles;
  std::map<std::uint64_t, PhaseSummary> acc;
  for (const auto& r : run.rows) {
    auto& p = acc[r.phase_id];
    p.phase_id = r.phase_id;
    ++p.intervals;
    p.mean_throughput_per_cycle += r.throughput_per_cycle;
    p.mean_utilization += r.utilization;
  }
  for (auto& [id, p] : acc) {
    p.mean_throughput_per_cycle /= static_cast<double>(p.intervals);
    p.mean_utilization /= static_cast<double>(p.intervals);
    s.phases.push_back(p);
  }
  return s;
}

inline void write_summary(const Summary& s, std::ostream& out) {
  out << "mode=" << s.mode << '\n'
      << "sample_count=" << s.sample_count << '\n'
      << "phase_count=" << s.phase_count << '\n'
      << "migration_count=" << s.migration_count << '\n'
      << "total_cycles=" << s.total_cycles << '\n';
  for (const auto& p : s.phases) {
    const auto k = "phase." + std::to_string(p.phase_id) + '.';
    out << k << "intervals=" << p.intervals << '\n'
        << k << "mean_throughput_per_cycle=" << text::format_double(p.mean_throughput_per_cycle) << '\n'
        << k << "mean_utilization=" << text::format_double(p.mean_utilization) << '\n';
  }
}

inline Summary read_summary(std::istream& in) {
  const auto kv = text::parse_kv(in);
  Summary s;
  auto req_u64 = [&](std::string_view key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(0, "summary is missing '" + std::string(key) + "'");
    auto v = text::parse_u64(it->second.value);
    if (!v) throw ParseError(it->second.line, "bad value for '" + std::string(key) + "'");
    return *v;
  };
  s.sample_count = req_u64("sample_count");
  s.phase_count = req_u64("phase_count");
  s.migration_count = req_u64("migration_count");
  s.total_cycles = req_u64("total_cycles");
  if (auto it = kv.find("mode"); it != kv.end()) s.mode = it->second.value;

  std::map<std::uint64_t, PhaseSummary> phases;
  for (const auto& [key, entry] : kv) {
    if (key.rfind("phase.", 0) != 0) continue;
    const auto parts = text::split(key, '.');
    auto id = parts.size() == 3 ? text::parse_u64(parts[1]) : std::nullopt;
    if (!id) throw ParseError(entry.line, "bad phase key '" + key + "'");
    auto& p = phases[*id];
    p.phase_id = *id;
    if (parts[2] == "intervals") {
      auto v = text::parse_u64(entry.value);
      if (!v) throw ParseError(entry.line, "bad interval count");
      p.intervals = *v;
    } else {
      auto v = text::parse_double(entry.value);
      if (!v) throw ParseError(entry.line, "bad number for '" + key + "'");
      if (parts[2] == "mean_throughput_per_cycle") p.mean_throughput_per_cycle = *v;
      else if (parts[2] == "mean_utilization") p.mean_utilization = *v;
      else throw ParseError(entry.line, "unknown phase field '" + std::string(parts[2]) + "'");
    }
  }
  for (auto& [id, p] : phases) s.phases.push_back(p);
  return s;
}

struct OverheadReport {
  std::uint64_t fixed_samples = 0;
  std::uint64_t variable_samples = 0;
  Cycles fixed_cycles = 0;
  Cycles variable_cycles = 0;
  double ratio = 0.0;  // fixed_samples / variable_samples
};

/// Profiling-overhead comparison of two runs over the same cycle budget.
inline OverheadReport overhead_report(const Summary& fixed, const Summary& variable) {
  if (fixed.total_cycles != variable.total_cycles)
    throw UsageError("overhead_report: runs cover different cycle budgets (" + std::to_string(fixed.total_cycles) +
                     " vs " + std::to_string(variable.total_cycles) + ")");
  if (variable.sample_count == 0) throw UsageError("overhead_report: variable run has no samples");
  OverheadReport r;
  r.fixed_samples = fixed.sample_count;
  r.variable_samples = variable.sample_count;
  r.fixed_cycles = fixed.total_cycles;
  r.variable_cycles = variable.total_cycles;
  r.ratio = static_cast<double>(fixed.sample_count) / static_cast<double>(variable.sample_count);
  return r;
}

inline void write_overhead_report(const OverheadReport& r, std::ostream& out) {
  out << "fixed_samples=" << r.fixed_samples << '\n'
      << "variable_samples=" << r.variable_samples << '\n'
      << "fixed_cycles=" << r.fixed_cycles << '\n'
      << "variable_cycles=" << r.variable_cycles << '\n'
      << "ratio=" << text::format_double(r.ratio) << '\n';
}

}  // namespace phasemon
