#pragma once

#include "sopso/benchmarks.hpp"
#include "sopso/convergence.hpp"
#include "sopso/device.hpp"
#include "sopso/self_organizing.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sopso::exp {

enum class Experiment { bench, converge, device };
enum class Algorithm { pso_fixed_w, pso_linear_w, pso_constriction, sopso };

Experiment parse_experiment(std::string_view s);
Algorithm parse_algorithm(std::string_view s);
std::string_view to_string(Experiment e) noexcept;
std::string_view to_string(Algorithm a) noexcept;

/// An algorithm with its inertia setting, e.g. "pso_fixed_w:1.0".
struct AlgorithmSpec {
  Algorithm kind = Algorithm::sopso;
  /// Fixed w for pso_fixed_w and sopso.
  double w = 0.4;

  std::string label() const;
  static AlgorithmSpec parse(std::string_view s, double default_w);
};

/// One row of the benchmark grid.
struct Cell {
  std::size_t n_particles = 20;
  Eigen::Index dims = 10;
  std::size_t generations = 1000;

  bool operator==(const Cell&) const = default;
};

/// The 3 x 3 (N, D, T) grid of the benchmark tables.
std::vector<Cell> paper_grid();

struct ExperimentConfig {
  Experiment experiment = Experiment::bench;
  Algorithm algorithm = Algorithm::sopso;

  // Swarm.
  double w = 0.4;
  double w_start = 0.9;
  double w_end = 0.4;
  double c1 = 2.0;
  double c2 = 2.0;
  std::size_t t_c = 2;
  InactivityRule rule = InactivityRule::similar_without_improvement;
  std::optional<double> sigma;  // overrides the problem's own deviation
  std::optional<double> vmax_fraction = 1.0;
  std::optional<BoundaryPolicy> boundary;

  // Benchmarks.
  bench::Function function = bench::Function::rosenbrock;
  bench::Init init = bench::Init::symmetric;
  std::vector<Cell> cells = {Cell{}};

  // Convergence lab.
  std::vector<double> converge_w = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2};
  std::vector<double> sweep_grid;  // empty: default grid
  std::size_t converge_trials = 100'000;
  std::size_t horizon = 100;

  // Device.
  std::vector<AlgorithmSpec> device_algorithms;  // empty: the four reference variants
  std::size_t device_particles = 10;
  /// Generations including initialization; evaluations = particles * this.
  std::size_t device_generations = 100;
  std::string simulator_command;  // empty: built-in surrogate
  double simulator_timeout_s = 300.0;
  unsigned simulator_max_concurrent = 1;
  double failure_rate = 0.0;

  // Batch and output.
  std::size_t trials = 50;
  std::uint64_t base_seed = 1;
  unsigned workers = 0;
  std::string out;  // empty: stdout
  std::string format = "json";

  /// Full-scale reproduction: 500 benchmark trials, the 3 x 3 grid, 10^6 lab trials.
  void apply_paper_scale();
};

/// Sets one key. Throws std::invalid_argument for unknown keys or bad values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Flat key=value text, '#' comments. Defaults for absent keys come from `base`.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Keys accepted by apply_setting, for --help output.
const std::vector<std::string_view>& config_keys();

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

inline std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial) { return derive_seed(base_seed, trial); }

PsoParams<double> make_params(const ExperimentConfig& config, const AlgorithmSpec& algo, std::size_t n_particles,
                              std::size_t update_generations);

RunTrace<double> run_trial(const Problem<double>& problem, const PsoParams<double>& params,
                           const AlgorithmSpec& algo, const ExperimentConfig& config, std::uint64_t seed);

/// `trials` independent runs, trial k seeded by trial_seed(base_seed, k).
/// Runs execute on up to `workers` threads; output order is by trial index.
std::vector<RunTrace<double>> run_batch(const Problem<double>& problem, const PsoParams<double>& params,
                                        const AlgorithmSpec& algo, const ExperimentConfig& config,
                                        std::size_t trials);

struct Summary {
  double mean = 0;
  double stddev = 0;
  std::size_t trials = 0;
  double feasibility_rate = 0;
};

/// Mean and sample standard deviation of final best objectives. Failed runs
/// are excluded from the moments but counted against feasibility.
/// Throws std::invalid_argument on an empty set.
Summary summarize(const std::vector<RunTrace<double>>& traces);

struct SummaryRow {
  std::string function;
  std::string algorithm;
  std::size_t n_particles = 0;
  Eigen::Index dims = 0;
  std::size_t generations = 0;
  double mean = 0;
  double stddev = 0;
  std::size_t trials = 0;

  bool operator==(const SummaryRow&) const = default;
};

std::vector<SummaryRow> run_bench_suite(const ExperimentConfig& config);

struct ConvergeSeries {
  std::string label;  // "w=0.4" or "constriction"
  double w = 0;
  double c = 0;  // c1 = c2
  std::vector<double> mean_log;  // mean log10|x| per generation, t = 0..horizon
};

struct ConvergeReport {
  std::vector<ConvergeSeries> series;  // one per requested w, then the constriction point
  std::vector<lab::SweepPoint> sweep;
  std::optional<double> threshold;
  std::string threshold_error;
};

std::vector<double> default_sweep_grid();
ConvergeReport run_converge(const ExperimentConfig& config);

struct DeviceAlgorithmReport {
  std::string algorithm;
  /// Mean F_delta over trials whose best is feasible at that generation.
  std::vector<std::optional<double>> mean_f_delta;
  std::vector<std::size_t> feasible_trials;
  /// Final F_delta per trial (nullopt: never feasible).
  std::vector<std::optional<double>> final_f_delta;
  std::vector<double> final_i_on;
  std::vector<std::size_t> evaluations;
  std::vector<std::size_t> adapter_calls;
  Summary summary;
};

struct DeviceReport {
  double f_opt = device::kSurrogateIonOpt;
  std::vector<DeviceAlgorithmReport> algorithms;
};

std::vector<AlgorithmSpec> default_device_algorithms();
/// Throws std::invalid_argument for a misconfigured simulator before any run.
DeviceReport run_device(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(std::istream& is);
std::string summary_json(const std::vector<SummaryRow>& rows, const ExperimentConfig& config);

void write_converge_csv(std::ostream& os, const ConvergeReport& report);
std::string converge_json(const ConvergeReport& report, const ExperimentConfig& config);

void write_device_csv(std::ostream& os, const DeviceReport& report);
std::string device_json(const DeviceReport& report, const ExperimentConfig& config);

/// One-sided sign test: P(X >= wins) for X ~ Binomial(n, 1/2).
double sign_test_p(std::size_t wins, std::size_t n);

}  // namespace sopso::exp
