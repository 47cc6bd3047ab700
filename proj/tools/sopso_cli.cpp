// sopso: run benchmark, convergence and device experiments and emit CSV/JSON.
//
//   sopso bench    --config bench.cfg --trials 50 --format json
//   sopso converge --set converge_trials=1000000 --out lab.csv --format csv
//   sopso device   --algo sopso --seed 7
//
// Settings are applied in order: defaults, --paper-scale, --config file,
// --set key=value, then the dedicated flags.

#include "sopso/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace sopso;

struct Options {
  std::string config_path;
  std::vector<std::string> settings;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> algo;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool paper_scale = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "key=value configuration file");
  cmd->add_option("--set", o.settings, "Override one setting, key=value (repeatable)");
  cmd->add_option("--seed", o.seed, "Base seed; trial k uses a seed derived from (seed, k)");
  cmd->add_option("--trials", o.trials, "Independent runs per cell or algorithm (converge: ensemble size)");
  cmd->add_option("--algo", o.algo, "pso_fixed_w | pso_linear_w | pso_constriction | sopso (device: comma list)");
  cmd->add_option("--out", o.out, "Output file (default stdout)");
  cmd->add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--paper-scale", o.paper_scale, "500 benchmark trials over the full grid, 10^6 lab trials");
}

exp::ExperimentConfig build_config(exp::Experiment which, const Options& o) {
  exp::ExperimentConfig config;
  config.experiment = which;
  if (which == exp::Experiment::device) config.trials = 20;
  if (o.paper_scale) config.apply_paper_scale();
  if (which == exp::Experiment::device && o.paper_scale) config.trials = 20;
  if (!o.config_path.empty()) config = exp::load_config(o.config_path, config);
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
    exp::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed) config.base_seed = *o.seed;
  if (o.trials) {
    if (which == exp::Experiment::converge) config.converge_trials = *o.trials;
    else config.trials = *o.trials;
  }
  if (o.algo) {
    if (which == exp::Experiment::device) exp::apply_setting(config, "device_algorithms", *o.algo);
    else config.algorithm = exp::parse_algorithm(*o.algo);
  }
  if (o.out) config.out = *o.out;
  if (o.format) config.format = *o.format;
  return config;
}

void emit(const exp::ExperimentConfig& config, const std::function<void(std::ostream&)>& write) {
  if (config.out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream file(config.out);
  if (!file) throw std::runtime_error("cannot write '" + config.out + "'");
  write(file);
}

int run(exp::Experiment which, const Options& o) {
  exp::ExperimentConfig config;
  try {
    config = build_config(which, o);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    const bool csv = config.format == "csv";
    switch (which) {
      case exp::Experiment::bench: {
        const auto rows = exp::run_bench_suite(config);
        emit(config, [&](std::ostream& os) {
          if (csv) exp::write_summary_csv(os, rows);
          else os << exp::summary_json(rows, config) << '\n';
        });
        break;
      }
      case exp::Experiment::converge: {
        const auto report = exp::run_converge(config);
        emit(config, [&](std::ostream& os) {
          if (csv) exp::write_converge_csv(os, report);
          else os << exp::converge_json(report, config) << '\n';
        });
        if (!report.threshold) std::cerr << "warning: " << report.threshold_error << '\n';
        break;
      }
      case exp::Experiment::device: {
        const auto report = exp::run_device(config);
        emit(config, [&](std::ostream& os) {
          if (csv) exp::write_device_csv(os, report);
          else os << exp::device_json(report, config) << '\n';
        });
        break;
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-organizing particle swarm experiments"};
  app.require_subcommand(1);

  std::string keys;
  for (auto k : exp::config_keys()) keys += std::string(k) + " ";
  app.footer("Config keys: " + keys);

  Options bench_opts, converge_opts, device_opts;
  auto* bench = app.add_subcommand("bench", "Benchmark functions: mean final fitness per (N, D, T) cell");
  auto* converge = app.add_subcommand("converge", "Single-particle ensemble: mean log10|x| series, w sweep, w_th");
  auto* device = app.add_subcommand("device", "Device design problem: mean F_delta per generation");
  add_common(bench, bench_opts);
  add_common(converge, converge_opts);
  add_common(device, device_opts);

  CLI11_PARSE(app, argc, argv);

  if (bench->parsed()) return run(exp::Experiment::bench, bench_opts);
  if (converge->parsed()) return run(exp::Experiment::converge, converge_opts);
  return run(exp::Experiment::device, device_opts);
}
