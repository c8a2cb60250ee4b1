// phasemon command-line front end.
//
//   phasemon simulate --config run.cfg [--seed N] [--fixed-tau N | --variable-tau] [--out DIR] [--jobs N]
//   phasemon detect --trace trace.csv [--format csv|jsonl] [--config det.cfg] [--out DIR]
//   phasemon compare-overhead FIXED_DIR VARIABLE_DIR [--out FILE]
//   phasemon gen-workload --preset NAME --out PATH [--format csv|jsonl] [--core A|B] [--fixed-tau N]
//                         [--seed N] [--spec-out PATH]
//
// Exit codes: 0 success, 1 config error, 2 I/O error, 3 internal invariant violation.

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "phasemon/phasemon.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfig = 1, kIo = 2, kInternal = 3 };

// Runs `fn`, converting library exceptions into CLI exit codes.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return kOk;
  } catch (const phasemon::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const phasemon::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const phasemon::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kConfig;
  } catch (const phasemon::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const phasemon::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<phasemon::Cycles> fixed_tau;
  bool variable_tau = false;
  std::optional<std::string> out;
};

void apply(phasemon::ExperimentConfig& cfg, const RunOverrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.fixed_tau) cfg.mode = phasemon::IntervalMode::fixed(*o.fixed_tau);
  if (o.variable_tau) cfg.mode = phasemon::IntervalMode::adaptive();
  if (o.out) cfg.out_dir = *o.out;
}

void print_summary(const phasemon::Summary& s, const std::string& dir) {
  std::cout << dir << ": samples=" << s.sample_count << " phases=" << s.phase_count
            << " migrations=" << s.migration_count << " cycles=" << s.total_cycles << '\n';
}

int cmd_simulate(const std::vector<std::string>& configs, const RunOverrides& o, unsigned jobs) {
  if (configs.size() > 1 && o.out) {
    std::cerr << "usage error: --out needs a single --config\n";
    return kConfig;
  }
  std::vector<phasemon::ExperimentConfig> parsed;
  for (const auto& path : configs) {
    const int rc = guarded([&] {
      auto cfg = phasemon::load_experiment_config(path);
      apply(cfg, o);
      cfg.validate();
      parsed.push_back(std::move(cfg));
    });
    if (rc != kOk) return rc;
  }

  std::vector<int> codes(parsed.size(), kOk);
  std::mutex out_mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < parsed.size(); i = next++) {
      codes[i] = guarded([&] {
        const auto s = phasemon::run_experiment(parsed[i]);
        std::lock_guard lock(out_mu);
        print_summary(s, parsed[i].out_dir);
      });
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(parsed.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (int c : codes)
    if (c != kOk) return c;
  return kOk;
}

int cmd_detect(const std::optional<std::string>& config, const std::optional<std::string>& trace,
               const std::string& format, const RunOverrides& o) {
  return guarded([&] {
    phasemon::ExperimentConfig cfg;
    if (config) cfg = phasemon::load_experiment_config(*config);
    if (trace) cfg.workload = phasemon::WorkloadSource{phasemon::WorkloadSource::Kind::trace_file, *trace};
    if (!format.empty()) {
      auto f = phasemon::parse_trace_format(format);
      if (!f) throw phasemon::ConfigError("--format must be csv or jsonl");
      cfg.trace_format = *f;
    }
    if (!cfg.workload || cfg.workload->kind != phasemon::WorkloadSource::Kind::trace_file)
      throw phasemon::ConfigError("detect needs a trace (--trace or workload.trace)");
    if (o.variable_tau) throw phasemon::ConfigError("detect runs on recorded intervals; --variable-tau is not supported");
    if (o.out) cfg.out_dir = *o.out;
    cfg.mode = phasemon::IntervalMode::fixed(cfg.detector.tau_min);
    print_summary(phasemon::run_experiment(cfg), cfg.out_dir);
  });
}

int cmd_compare(const std::string& fixed_dir, const std::string& variable_dir, const std::optional<std::string>& out) {
  return guarded([&] {
    const auto fixed = phasemon::load_summary(fixed_dir);
    const auto variable = phasemon::load_summary(variable_dir);
    const auto report = phasemon::overhead_report(fixed, variable);
    phasemon::write_overhead_report(report, std::cout);
    if (out) {
      std::ostringstream buf;
      phasemon::write_overhead_report(report, buf);
      phasemon::write_file(*out, buf.str());
    }
  });
}

struct GenOptions {
  std::string preset;
  std::string out;
  std::string format = "csv";
  std::string core_class = "A";
  std::optional<phasemon::Cycles> fixed_tau;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> spec_out;
};

// Renders a preset as a recorded trace by running it on a single core.
int cmd_gen_workload(const GenOptions& g) {
  return guarded([&] {
    auto workload = phasemon::make_preset(g.preset);
    if (g.seed) workload.seed = *g.seed;
    auto format = phasemon::parse_trace_format(g.format);
    if (!format) throw phasemon::ConfigError("--format must be csv or jsonl");
    if (g.core_class != "A" && g.core_class != "B") throw phasemon::ConfigError("--core must be A or B");
    const auto cls = g.core_class == "A" ? phasemon::CoreClass::A : phasemon::CoreClass::B;
    const std::string core_name = g.core_class + "0";

    phasemon::SimulationOptions opt;
    opt.start_core = core_name;
    opt.mode = phasemon::IntervalMode::fixed(g.fixed_tau.value_or(opt.detector.tau_min));
    auto machine = phasemon::MachineState::from_specs({phasemon::CoreSpec::of_class(cls, core_name)});
    const auto run = phasemon::simulate(std::move(machine), workload, opt);

    if (g.spec_out) {
      std::ostringstream buf;
      phasemon::write_workload_spec(workload, buf);
      phasemon::write_file(*g.spec_out, buf.str());
    }
    phasemon::save_trace(run.samples, g.out, *format);
    std::cout << g.out << ": " << run.samples.size() << " intervals\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online program-phase detection on a simulated asymmetric multicore"};
  app.require_subcommand(1);

  RunOverrides sim_o;
  std::vector<std::string> sim_configs;
  unsigned jobs = 1;
  auto* sim = app.add_subcommand("simulate", "Run experiments from config files");
  sim->add_option("--config", sim_configs, "Experiment config (repeatable)")->required();
  sim->add_option("--seed", sim_o.seed, "Override the workload noise seed");
  auto* ft = sim->add_option("--fixed-tau", sim_o.fixed_tau, "Fixed profiling interval in cycles");
  sim->add_flag("--variable-tau", sim_o.variable_tau, "Adapt the profiling interval")->excludes(ft);
  sim->add_option("--out", sim_o.out, "Output directory");
  sim->add_option("--jobs", jobs, "Experiments to run in parallel")->check(CLI::PositiveNumber);

  RunOverrides det_o;
  std::optional<std::string> det_config, det_trace;
  std::string det_format;
  auto* det = app.add_subcommand("detect", "Run the phase detector over a recorded trace");
  det->add_option("--config", det_config, "Config supplying detector settings");
  det->add_option("--trace", det_trace, "Trace file");
  det->add_option("--format", det_format, "Trace format: csv or jsonl");
  det->add_flag("--variable-tau", det_o.variable_tau, "Rejected: traces have fixed intervals");
  det->add_option("--out", det_o.out, "Output directory");

  std::string fixed_dir, variable_dir;
  std::optional<std::string> cmp_out;
  auto* cmp = app.add_subcommand("compare-overhead", "Compare sample counts of a fixed and a variable run");
  cmp->add_option("fixed_dir", fixed_dir, "Run directory of the fixed-interval run")->required();
  cmp->add_option("variable_dir", variable_dir, "Run directory of the variable-interval run")->required();
  cmp->add_option("--out", cmp_out, "Also write the report to this file");

  GenOptions gen_o;
  auto* gen = app.add_subcommand("gen-workload", "Write a preset workload as a trace file");
  gen->add_option("--preset", gen_o.preset, "steady, fft_like or fmm_like")->required();
  gen->add_option("--out", gen_o.out, "Trace output path")->required();
  gen->add_option("--format", gen_o.format, "csv or jsonl");
  gen->add_option("--core", gen_o.core_class, "Core class to run on: A or B");
  gen->add_option("--fixed-tau", gen_o.fixed_tau, "Interval length in cycles");
  gen->add_option("--seed", gen_o.seed, "Noise seed");
  gen->add_option("--spec-out", gen_o.spec_out, "Also write the workload description");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  if (*sim) return cmd_simulate(sim_configs, sim_o, jobs);
  if (*det) return cmd_detect(det_config, det_trace, det_format, det_o);
  if (*cmp) return cmd_compare(fixed_dir, variable_dir, cmp_out);
  if (*gen) return cmd_gen_workload(gen_o);
  return kConfig;
}
