#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "phasemon/core_model.hpp"
#include "phasemon/errors.hpp"
#include "phasemon/report.hpp"
#include "phasemon/scheduler.hpp"
#include "phasemon/simulation.hpp"
#include "phasemon/text.hpp"
#include "phasemon/trace_io.hpp"
#include "phasemon/workload.hpp"

namespace phasemon {

struct WorkloadSource {
  enum class Kind { preset, spec_file, trace_file };
  Kind kind = Kind::preset;
  std::string value;  // preset name or path
};

struct ExperimentConfig {
  std::vector<CoreSpec> cores{CoreSpec::a_type("A0"), CoreSpec::a_type("A1"), CoreSpec::b_type("B0"),
                              CoreSpec::b_type("B1")};
  std::string start_core = "B0";
  Cycles migration_penalty = 10000;
  std::optional<WorkloadSource> workload;
  std::optional<Cycles> steady_duration;
  TraceFormat trace_format = TraceFormat::csv;
  DetectorConfig detector;
  IntervalMode mode = IntervalMode::fixed(100000);
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";

  void validate() const {
    try {
      detector.validate();
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("detector: ") + e.what());
    }
    if (!workload) throw ConfigError("exactly one of workload.preset, workload.spec, workload.trace is required");
    if (!mode.variable && mode.fixed_tau < detector.tau_min)
      throw ConfigError("run.fixed_tau must be >= detector.tau_min");
    if (cores.empty()) throw ConfigError("machine has no cores");
    if (out_dir.empty()) throw ConfigError("output directory must not be empty");
  }
};

namespace detail {

inline CoreClass parse_core_class(std::string_view s, std::uint64_t line) {
  if (s == "A") return CoreClass::A;
  if (s == "B") return CoreClass::B;
  throw ConfigError("line " + std::to_string(line) + ": core class must be A or B");
}

template <typename T>
T config_number(const text::KvEntry& e, std::string_view key) {
  if constexpr (std::is_floating_point_v<T>) {
    if (auto v = text::parse_double(e.value)) return *v;
  } else {
    if (auto v = text::parse_u64(e.value)) return static_cast<T>(*v);
  }
  throw ConfigError("line " + std::to_string(e.line) + ": bad value for " + std::string(key));
}

}  // namespace detail

/// Parses the flat key=value experiment format. Relative workload paths are
/// resolved against `base_dir`.
inline ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  text::KvMap kv;
  try {
    kv = text::parse_kv(in);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  ExperimentConfig cfg;
  using detail::config_number;

  if (auto it = kv.find("machine.cores"); it != kv.end()) {
    cfg.cores.clear();
    for (auto item : text::split(it->second.value, ',')) {
      const auto parts = text::split(text::trim(item), ':');
      if (parts.size() != 2 || parts[0].empty())
        throw ConfigError("line " + std::to_string(it->second.line) + ": machine.cores expects NAME:CLASS,...");
      cfg.cores.push_back(CoreSpec::of_class(detail::parse_core_class(parts[1], it->second.line), std::string(parts[0])));
    }
  }

  int sources = 0;
  for (const auto& [key, e] : kv) {
    const auto& v = e.value;
    if (key == "machine.cores") continue;
    if (key == "machine.start_core") cfg.start_core = v;
    else if (key == "machine.migration_penalty") cfg.migration_penalty = config_number<Cycles>(e, key);
    else if (key.rfind("machine.", 0) == 0) {
      const auto parts = text::split(key, '.');
      CoreSpec* core = nullptr;
      if (parts.size() == 3)
        for (auto& c : cfg.cores)
          if (c.name == parts[1]) core = &c;
      if (!core) throw ConfigError("line " + std::to_string(e.line) + ": unknown machine key '" + key + "'");
      const auto f = parts[2];
      if (f == "issue_width") core->issue_width = config_number<unsigned>(e, key);
      else if (f == "int_window") core->int_window = config_number<unsigned>(e, key);
      else if (f == "fp_window") core->fp_window = config_number<unsigned>(e, key);
      else if (f == "int_fu_count") core->int_fu_count = config_number<unsigned>(e, key);
      else if (f == "fp_fu_count") core->fp_fu_count = config_number<unsigned>(e, key);
      else throw ConfigError("line " + std::to_string(e.line) + ": unknown core field '" + std::string(f) + "'");
    } else if (key == "workload.preset") {
      cfg.workload = WorkloadSource{WorkloadSource::Kind::preset, v};
      ++sources;
    } else if (key == "workload.spec" || key == "workload.trace") {
      std::filesystem::path p(v);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      cfg.workload = WorkloadSource{key == "workload.spec" ? WorkloadSource::Kind::spec_file
                                                           : WorkloadSource::Kind::trace_file,
                                    p.string()};
      ++sources;
    } else if (key == "workload.format") {
      auto f = parse_trace_format(v);
      if (!f) throw ConfigError("line " + std::to_string(e.line) + ": workload.format must be csv or jsonl");
      cfg.trace_format = *f;
    } else if (key == "workload.duration") cfg.steady_duration = config_number<Cycles>(e, key);
    else if (key == "detector.delta_th") cfg.detector.delta_th = config_number<double>(e, key);
    else if (key == "detector.delta_over") cfg.detector.delta_over = config_number<double>(e, key);
    else if (key == "detector.delta_under") cfg.detector.delta_under = config_number<double>(e, key);
    else if (key == "detector.util_window") cfg.detector.util_window = config_number<std::size_t>(e, key);
    else if (key == "detector.steady_band") cfg.detector.steady_band = config_number<double>(e, key);
    else if (key == "detector.steady_upper_bound") cfg.detector.steady_upper_bound = config_number<std::size_t>(e, key);
    else if (key == "detector.tau_min") cfg.detector.tau_min = config_number<Cycles>(e, key);
    else if (key == "detector.tau_max") cfg.detector.tau_max = config_number<Cycles>(e, key);
    else if (key == "detector.normalization") {
      auto n = parse_normalization(v);
      if (!n) throw ConfigError("line " + std::to_string(e.line) + ": normalization must be raw or per_cycle");
      cfg.detector.normalization = *n;
    } else if (key == "detector.recurrence_matching") {
      auto b = text::parse_bool(v);
      if (!b) throw ConfigError("line " + std::to_string(e.line) + ": recurrence_matching must be true or false");
      cfg.detector.recurrence_matching = *b;
    } else if (key == "run.mode") {
      if (v == "variable") cfg.mode.variable = true;
      else if (v == "fixed") cfg.mode.variable = false;
      else throw ConfigError("line " + std::to_string(e.line) + ": run.mode must be fixed or variable");
    } else if (key == "run.fixed_tau") cfg.mode.fixed_tau = config_number<Cycles>(e, key);
    else if (key == "run.seed") cfg.seed = config_number<std::uint64_t>(e, key);
    else if (key == "run.out") cfg.out_dir = v;
    else throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + key + "'");
  }
  if (sources > 1) throw ConfigError("more than one workload source given");
  if (kv.count("detector.tau_min") && !kv.count("detector.tau_max")) cfg.detector.tau_max = cfg.detector.tau_min * 64;
  if (!kv.count("run.fixed_tau")) cfg.mode.fixed_tau = cfg.detector.tau_min;
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse_experiment_config(in, std::filesystem::path(path).parent_path());
}

inline WorkloadSpec resolve_workload(const ExperimentConfig& cfg) {
  const auto& src = *cfg.workload;
  WorkloadSpec w;
  if (src.kind == WorkloadSource::Kind::preset) {
    try {
      w = make_preset(src.value);
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
    if (cfg.steady_duration) {
      if (src.value != "steady") throw ConfigError("workload.duration only applies to the steady preset");
      w.segments.front().duration = *cfg.steady_duration;
    }
  } else {
    try {
      w = load_workload_spec(src.value);
    } catch (const ParseError& e) {
      throw ConfigError("workload spec " + src.value + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ConfigError("workload spec " + src.value + ": " + e.what());
    }
  }
  if (cfg.seed) w.seed = *cfg.seed;
  try {
    w.validate(cfg.detector.tau_min);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  return w;
}

/// Runs the configured experiment in memory.
inline RunResult execute(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.workload->kind == WorkloadSource::Kind::trace_file) {
    if (cfg.mode.variable) throw ConfigError("variable interval length needs a simulated workload, not a trace");
    const auto trace = load_trace(cfg.workload->value, cfg.trace_format);
    if (trace.empty()) throw ConfigError("workload trace '" + cfg.workload->value + "' is empty");
    return detect(trace, cfg.detector);
  }
  const auto workload = resolve_workload(cfg);
  MachineState machine;
  try {
    machine = MachineState::from_specs(cfg.cores, cfg.migration_penalty);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (!machine.find(cfg.start_core)) throw ConfigError("machine.start_core '" + cfg.start_core + "' is not a core");
  SimulationOptions opt;
  opt.detector = cfg.detector;
  opt.mode = cfg.mode;
  opt.start_core = cfg.start_core;
  return simulate(std::move(machine), workload, opt);
}

struct RunArtifacts {
  std::string scatter_csv;
  std::string events_csv;
  std::string summary;
};

inline RunArtifacts render(const RunResult& run) {
  RunArtifacts a;
  std::ostringstream scatter, events, summary;
  emit_scatter_csv(run.rows, scatter);
  emit_events_csv(run.events, events);
  write_summary(summarize(run), summary);
  return {scatter.str(), events.str(), summary.str()};
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Writes scatter.csv, events.csv and summary.txt into `dir`. Nothing is
/// created until all three are rendered.
inline void write_artifacts(const RunArtifacts& a, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  write_file(dir / "scatter.csv", a.scatter_csv);
  write_file(dir / "events.csv", a.events_csv);
  write_file(dir / "summary.txt", a.summary);
}

inline Summary run_experiment(const ExperimentConfig& cfg) {
  const RunResult run = execute(cfg);
  const RunArtifacts a = render(run);
  write_artifacts(a, cfg.out_dir);
  return summarize(run);
}

inline Summary load_summary(const std::filesystem::path& run_dir) {
  const auto path = run_dir / "summary.txt";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_summary(in);
}

}  // namespace phasemon
