#include "sopso/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace sopso::exp {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s = s.substr(pos + 1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  value = trim(value);
  T out{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
    throw std::invalid_argument("bad value '" + std::string(value) + "' for " + std::string(key));
  return out;
}

std::vector<double> parse_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  for (auto item : split(value, ',')) out.push_back(parse_number<double>(key, item));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < workers; ++k) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

Experiment parse_experiment(std::string_view s) {
  if (s == "bench") return Experiment::bench;
  if (s == "converge") return Experiment::converge;
  if (s == "device") return Experiment::device;
  throw std::invalid_argument("unknown experiment '" + std::string(s) + "'");
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "pso_fixed_w") return Algorithm::pso_fixed_w;
  if (s == "pso_linear_w") return Algorithm::pso_linear_w;
  if (s == "pso_constriction") return Algorithm::pso_constriction;
  if (s == "sopso") return Algorithm::sopso;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

std::string_view to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::bench: return "bench";
    case Experiment::converge: return "converge";
    case Experiment::device: return "device";
  }
  return "?";
}

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::pso_fixed_w: return "pso_fixed_w";
    case Algorithm::pso_linear_w: return "pso_linear_w";
    case Algorithm::pso_constriction: return "pso_constriction";
    case Algorithm::sopso: return "sopso";
  }
  return "?";
}

std::string AlgorithmSpec::label() const {
  if (kind == Algorithm::pso_fixed_w || kind == Algorithm::sopso)
    return std::string(to_string(kind)) + ":" + format_double(w);
  return std::string(to_string(kind));
}

AlgorithmSpec AlgorithmSpec::parse(std::string_view s, double default_w) {
  const auto colon = s.find(':');
  AlgorithmSpec spec{parse_algorithm(trim(s.substr(0, colon))), default_w};
  if (colon != std::string_view::npos) spec.w = parse_number<double>("algorithm w", s.substr(colon + 1));
  return spec;
}

std::vector<Cell> paper_grid() {
  std::vector<Cell> cells;
  for (std::size_t n : {20, 40, 80})
    for (auto [d, t] : {std::pair<Eigen::Index, std::size_t>{10, 1000}, {20, 1500}, {30, 2000}})
      cells.push_back({n, d, t});
  return cells;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void ExperimentConfig::apply_paper_scale() {
  trials = 500;
  cells = paper_grid();
  converge_trials = 1'000'000;
}

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = {
      "experiment", "algorithm", "w", "w_start", "w_end", "c1", "c2", "t_c", "rule", "sigma", "vmax",
      "boundary", "function", "init", "cells", "n", "d", "t", "converge_w", "sweep_grid",
      "converge_trials", "horizon", "device_algorithms", "device_particles", "device_generations",
      "simulator", "simulator_timeout", "simulator_max_concurrent", "failure_rate", "trials", "seed",
      "workers", "out", "format"};
  return keys;
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "experiment") c.experiment = parse_experiment(value);
  else if (key == "algorithm") c.algorithm = parse_algorithm(value);
  else if (key == "w") c.w = parse_number<double>(key, value);
  else if (key == "w_start") c.w_start = parse_number<double>(key, value);
  else if (key == "w_end") c.w_end = parse_number<double>(key, value);
  else if (key == "c1") c.c1 = parse_number<double>(key, value);
  else if (key == "c2") c.c2 = parse_number<double>(key, value);
  else if (key == "t_c") c.t_c = parse_number<std::size_t>(key, value);
  else if (key == "rule") {
    if (value == "similar_without_improvement") c.rule = InactivityRule::similar_without_improvement;
    else if (value == "similar_only") c.rule = InactivityRule::similar_only;
    else throw std::invalid_argument("rule must be similar_without_improvement or similar_only");
  } else if (key == "sigma") {
    if (value == "default") c.sigma.reset();
    else c.sigma = parse_number<double>(key, value);
  } else if (key == "vmax") {
    if (value == "none") c.vmax_fraction.reset();
    else c.vmax_fraction = parse_number<double>(key, value);
  } else if (key == "boundary") {
    if (value == "none") c.boundary = BoundaryPolicy::none;
    else if (value == "clamp") c.boundary = BoundaryPolicy::clamp;
    else if (value == "default") c.boundary.reset();
    else throw std::invalid_argument("boundary must be none, clamp or default");
  } else if (key == "function") c.function = bench::parse_function(value);
  else if (key == "init") {
    if (value == "symmetric") c.init = bench::Init::symmetric;
    else if (value == "asymmetric") c.init = bench::Init::asymmetric;
    else throw std::invalid_argument("init must be symmetric or asymmetric");
  } else if (key == "cells") {
    // "paper" or "NxDxT,NxDxT,..."
    if (value == "paper") {
      c.cells = paper_grid();
    } else {
      c.cells.clear();
      for (auto cell : split(value, ',')) {
        const auto parts = split(cell, 'x');
        if (parts.size() != 3) throw std::invalid_argument("cell must be NxDxT, got '" + std::string(cell) + "'");
        c.cells.push_back({parse_number<std::size_t>(key, parts[0]), parse_number<Eigen::Index>(key, parts[1]),
                           parse_number<std::size_t>(key, parts[2])});
      }
    }
  } else if (key == "n" || key == "d" || key == "t") {
    if (c.cells.size() != 1) c.cells = {Cell{}};
    if (key == "n") c.cells[0].n_particles = parse_number<std::size_t>(key, value);
    if (key == "d") c.cells[0].dims = parse_number<Eigen::Index>(key, value);
    if (key == "t") c.cells[0].generations = parse_number<std::size_t>(key, value);
  } else if (key == "converge_w") c.converge_w = parse_list(key, value);
  else if (key == "sweep_grid") c.sweep_grid = parse_list(key, value);
  else if (key == "converge_trials") c.converge_trials = parse_number<std::size_t>(key, value);
  else if (key == "horizon") c.horizon = parse_number<std::size_t>(key, value);
  else if (key == "device_algorithms") {
    c.device_algorithms.clear();
    for (auto item : split(value, ',')) c.device_algorithms.push_back(AlgorithmSpec::parse(item, c.w));
  } else if (key == "device_particles") c.device_particles = parse_number<std::size_t>(key, value);
  else if (key == "device_generations") c.device_generations = parse_number<std::size_t>(key, value);
  else if (key == "simulator") c.simulator_command = std::string(value == "surrogate" ? "" : value);
  else if (key == "simulator_timeout") c.simulator_timeout_s = parse_number<double>(key, value);
  else if (key == "simulator_max_concurrent") c.simulator_max_concurrent = parse_number<unsigned>(key, value);
  else if (key == "failure_rate") c.failure_rate = parse_number<double>(key, value);
  else if (key == "trials") c.trials = parse_number<std::size_t>(key, value);
  else if (key == "seed") c.base_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "workers") c.workers = parse_number<unsigned>(key, value);
  else if (key == "out") c.out = std::string(value);
  else if (key == "format") {
    if (value != "csv" && value != "json") throw std::invalid_argument("format must be csv or json");
    c.format = std::string(value);
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

PsoParams<double> make_params(const ExperimentConfig& config, const AlgorithmSpec& algo, std::size_t n_particles,
                              std::size_t update_generations) {
  PsoParams<double> params;
  params.n_particles = n_particles;
  params.max_gen = update_generations;
  params.c1 = config.c1;
  params.c2 = config.c2;
  params.vmax_fraction = config.vmax_fraction;
  params.boundary = config.boundary;
  switch (algo.kind) {
    case Algorithm::pso_fixed_w:
    case Algorithm::sopso: params.inertia = FixedInertia{algo.w}; break;
    case Algorithm::pso_linear_w: params.inertia = LinearInertia{config.w_start, config.w_end}; break;
    case Algorithm::pso_constriction: params.inertia = ConstrictionInertia{}; break;
  }
  params.validate();
  return params;
}

RunTrace<double> run_trial(const Problem<double>& problem, const PsoParams<double>& params,
                           const AlgorithmSpec& algo, const ExperimentConfig& config, std::uint64_t seed) {
  if (algo.kind != Algorithm::sopso) return run<double>(problem, params, seed);
  SelfOrganizingHook<double> hook(params.n_particles, {config.t_c, config.rule});
  if (config.sigma) hook.with_sigma(VectorXd::Constant(problem.space.dims(), *config.sigma));
  return run<double>(problem, params, seed, std::move(hook));
}

std::vector<RunTrace<double>> run_batch(const Problem<double>& problem, const PsoParams<double>& params,
                                        const AlgorithmSpec& algo, const ExperimentConfig& config,
                                        std::size_t trials) {
  std::vector<RunTrace<double>> traces(trials);
  parallel_for(trials, config.workers, [&](std::size_t k) {
    traces[k] = run_trial(problem, params, algo, config, trial_seed(config.base_seed, k));
  });
  return traces;
}

Summary summarize(const std::vector<RunTrace<double>>& traces) {
  if (traces.empty()) throw std::invalid_argument("summarize: no traces");
  std::vector<double> finals;
  std::size_t feasible = 0;
  for (const auto& trace : traces) {
    const auto& best = trace.final_best();
    if (is_feasible(best)) ++feasible;
    if (!is_failed(best)) finals.push_back(best.f_obj);
  }
  Summary s;
  s.trials = traces.size();
  s.feasibility_rate = static_cast<double>(feasible) / static_cast<double>(traces.size());
  if (finals.empty()) {
    s.mean = s.stddev = std::numeric_limits<double>::infinity();
    return s;
  }
  const double n = static_cast<double>(finals.size());
  s.mean = std::accumulate(finals.begin(), finals.end(), 0.0) / n;
  if (finals.size() > 1) {
    double ss = 0;
    for (double f : finals) ss += (f - s.mean) * (f - s.mean);
    s.stddev = std::sqrt(ss / (n - 1));
  }
  return s;
}

std::vector<SummaryRow> run_bench_suite(const ExperimentConfig& config) {
  if (config.cells.empty()) throw std::invalid_argument("bench: no cells requested");
  if (config.trials < 1) throw std::invalid_argument("bench: trials must be >= 1");
  const AlgorithmSpec algo{config.algorithm, config.w};
  std::vector<SummaryRow> rows;
  for (const auto& cell : config.cells) {
    if (cell.generations < 1 || cell.n_particles < 2 || cell.dims < 1)
      throw std::invalid_argument("bench: invalid cell");
    bench::BenchmarkSpec spec{config.function, cell.dims, config.init};
    if (config.sigma) spec.sigma = *config.sigma;
    const auto problem = bench::benchmark_problem(spec);
    const auto params = make_params(config, algo, cell.n_particles, cell.generations);
    const auto summary = summarize(run_batch(problem, params, algo, config, config.trials));
    rows.push_back({std::string(bench::to_string(config.function)), algo.label(), cell.n_particles, cell.dims,
                    cell.generations, summary.mean, summary.stddev, summary.trials});
  }
  return rows;
}

std::vector<double> default_sweep_grid() {
  // 0, 0.01, then 0.05 .. 1.2 in steps of 0.05
  std::vector<double> grid = {0.0, 0.01};
  for (int k = 1; k <= 24; ++k) grid.push_back(0.05 * k);
  return grid;
}

ConvergeReport run_converge(const ExperimentConfig& config) {
  lab::ScalarEnsembleConfig base;
  base.c1 = config.c1;
  base.c2 = config.c2;
  base.horizon = config.horizon;
  base.trials = config.converge_trials;
  base.seed = config.base_seed;
  base.workers = config.workers;

  ConvergeReport report;
  std::vector<double> ws = config.converge_w;
  std::sort(ws.begin(), ws.end());
  for (double w : ws) {
    auto c = base;
    c.w = w;
    report.series.push_back({"w=" + format_double(w), w, config.c1, lab::ensemble_mean_log(c)});
  }
  {
    auto c = base;
    c.w = ConstrictionInertia::w;
    c.c1 = c.c2 = ConstrictionInertia::c;
    report.series.push_back({"constriction", c.w, c.c1, lab::ensemble_mean_log(c)});
  }

  report.sweep = lab::sweep_w(config.sweep_grid.empty() ? default_sweep_grid() : config.sweep_grid, base);
  try {
    report.threshold = lab::estimate_threshold(report.sweep);
  } catch (const lab::ThresholdNotBracketed& e) {
    report.threshold_error = e.what();
  }
  return report;
}

std::vector<AlgorithmSpec> default_device_algorithms() {
  return {{Algorithm::sopso, 0.4},
          {Algorithm::pso_linear_w, 0.4},
          {Algorithm::pso_fixed_w, 0.4},
          {Algorithm::pso_fixed_w, 1.0}};
}

DeviceReport run_device(const ExperimentConfig& config) {
  if (config.device_generations < 2) throw std::invalid_argument("device: need at least 2 generations");
  if (config.trials < 1) throw std::invalid_argument("device: trials must be >= 1");
  if (config.failure_rate < 0 || config.failure_rate >= 1) throw std::invalid_argument("device: failure_rate in [0,1)");

  std::shared_ptr<device::SimulatorAdapter> base;
  if (config.simulator_command.empty()) {
    base = std::make_shared<device::SurrogateSimulator>();
  } else {
    device::CommandSpec spec{config.simulator_command,
                             std::chrono::milliseconds(static_cast<long long>(config.simulator_timeout_s * 1000)),
                             config.simulator_max_concurrent};
    base = std::make_shared<device::ExternalSimulator>(spec.with_env_overrides());
  }
  if (config.failure_rate > 0)
    base = std::make_shared<device::FailureInjector>(base, config.failure_rate, config.base_seed);
  base->check();

  const auto algorithms = config.device_algorithms.empty() ? default_device_algorithms() : config.device_algorithms;
  const std::size_t gens = config.device_generations;

  DeviceReport report;
  for (const auto& algo : algorithms) {
    const auto params = make_params(config, algo, config.device_particles, gens - 1);
    std::vector<RunTrace<double>> traces(config.trials);
    std::vector<std::size_t> calls(config.trials);
    parallel_for(config.trials, config.workers, [&](std::size_t k) {
      auto counter = std::make_shared<device::CountingAdapter>(base);
      const auto problem = device::device_problem(counter);
      traces[k] = run_trial(problem, params, algo, config, trial_seed(config.base_seed, k));
      calls[k] = counter->calls();
    });

    DeviceAlgorithmReport r;
    r.algorithm = algo.label();
    r.mean_f_delta.assign(gens, std::nullopt);
    r.feasible_trials.assign(gens, 0);
    std::vector<double> sums(gens, 0.0);
    for (const auto& trace : traces) {
      const auto fd = device::f_delta(trace, report.f_opt);
      for (std::size_t t = 0; t < gens; ++t)
        if (fd[t]) {
          sums[t] += *fd[t];
          ++r.feasible_trials[t];
        }
      r.final_f_delta.push_back(fd.back());
      r.final_i_on.push_back(-trace.final_best().f_obj);
      r.evaluations.push_back(trace.records.back().evaluations);
    }
    for (std::size_t t = 0; t < gens; ++t)
      if (r.feasible_trials[t]) r.mean_f_delta[t] = sums[t] / static_cast<double>(r.feasible_trials[t]);
    r.adapter_calls = std::move(calls);
    r.summary = summarize(traces);
    report.algorithms.push_back(std::move(r));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "function,algorithm,n,d,t,mean,stddev,trials\n";
  for (const auto& r : rows)
    os << r.function << ',' << r.algorithm << ',' << r.n_particles << ',' << r.dims << ',' << r.generations << ','
       << format_double(r.mean) << ',' << format_double(r.stddev) << ',' << r.trials << '\n';
}

std::vector<SummaryRow> read_summary_csv(std::istream& is) {
  std::vector<SummaryRow> rows;
  std::string line;
  if (!std::getline(is, line)) return rows;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) throw std::invalid_argument("summary csv: expected 8 fields");
    rows.push_back({std::string(f[0]), std::string(f[1]), parse_number<std::size_t>("n", f[2]),
                    parse_number<Eigen::Index>("d", f[3]), parse_number<std::size_t>("t", f[4]),
                    parse_number<double>("mean", f[5]), parse_number<double>("stddev", f[6]),
                    parse_number<std::size_t>("trials", f[7])});
  }
  return rows;
}

namespace {

nlohmann::json config_json(const ExperimentConfig& c) {
  return {{"experiment", to_string(c.experiment)},
          {"algorithm", to_string(c.algorithm)},
          {"w", c.w},
          {"c1", c.c1},
          {"c2", c.c2},
          {"t_c", c.t_c},
          {"sigma", c.sigma ? nlohmann::json(*c.sigma) : nlohmann::json("default")},
          {"trials", c.trials},
          {"seed", c.base_seed}};
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

std::string summary_json(const std::vector<SummaryRow>& rows, const ExperimentConfig& config) {
  nlohmann::json j;
  j["config"] = config_json(config);
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"function", r.function},
                         {"algorithm", r.algorithm},
                         {"n", r.n_particles},
                         {"d", r.dims},
                         {"t", r.generations},
                         {"mean", r.mean},
                         {"stddev", r.stddev},
                         {"trials", r.trials}});
  return j.dump(2);
}

void write_converge_csv(std::ostream& os, const ConvergeReport& report) {
  os << "section,label,w,c,t,value\n";
  for (const auto& s : report.series)
    for (std::size_t t = 0; t < s.mean_log.size(); ++t)
      os << "series," << s.label << ',' << format_double(s.w) << ',' << format_double(s.c) << ',' << t << ','
         << format_double(s.mean_log[t]) << '\n';
  for (const auto& p : report.sweep)
    os << "sweep,final," << format_double(p.w) << ",," << "," << format_double(p.final) << '\n';
  if (report.threshold)
    os << "threshold,w_th," << format_double(*report.threshold) << ",,," << format_double(*report.threshold) << '\n';
  else
    os << "threshold,error,,,,\n";
}

std::string converge_json(const ConvergeReport& report, const ExperimentConfig& config) {
  nlohmann::json j;
  j["config"] = config_json(config);
  j["config"]["converge_trials"] = config.converge_trials;
  j["config"]["horizon"] = config.horizon;
  j["series"] = nlohmann::json::array();
  for (const auto& s : report.series)
    j["series"].push_back({{"label", s.label}, {"w", s.w}, {"c", s.c}, {"mean_log10_abs_x", s.mean_log}});
  j["sweep"] = nlohmann::json::array();
  for (const auto& p : report.sweep) j["sweep"].push_back({{"w", p.w}, {"initial", p.initial}, {"final", p.final}});
  j["threshold"] = optional_json(report.threshold);
  if (!report.threshold) j["threshold_error"] = report.threshold_error;
  return j.dump(2);
}

void write_device_csv(std::ostream& os, const DeviceReport& report) {
  os << "algorithm,generation,mean_f_delta,feasible_trials\n";
  for (const auto& a : report.algorithms)
    for (std::size_t t = 0; t < a.mean_f_delta.size(); ++t)
      os << a.algorithm << ',' << t << ',' << (a.mean_f_delta[t] ? format_double(*a.mean_f_delta[t]) : "") << ','
         << a.feasible_trials[t] << '\n';
}

std::string device_json(const DeviceReport& report, const ExperimentConfig& config) {
  nlohmann::json j;
  j["config"] = config_json(config);
  j["config"]["device_particles"] = config.device_particles;
  j["config"]["device_generations"] = config.device_generations;
  j["f_opt"] = report.f_opt;
  j["algorithms"] = nlohmann::json::array();
  for (const auto& a : report.algorithms) {
    nlohmann::json mean = nlohmann::json::array(), finals = nlohmann::json::array();
    for (const auto& v : a.mean_f_delta) mean.push_back(optional_json(v));
    for (const auto& v : a.final_f_delta) finals.push_back(optional_json(v));
    j["algorithms"].push_back({{"algorithm", a.algorithm},
                               {"mean_f_delta", mean},
                               {"feasible_trials", a.feasible_trials},
                               {"final_f_delta", finals},
                               {"final_i_on", a.final_i_on},
                               {"evaluations", a.evaluations},
                               {"adapter_calls", a.adapter_calls},
                               {"feasibility_rate", a.summary.feasibility_rate}});
  }
  return j.dump(2);
}

double sign_test_p(std::size_t wins, std::size_t n) {
  if (wins > n) throw std::invalid_argument("sign_test_p: wins > n");
  // sum_{k >= wins} C(n, k) / 2^n, accumulated in log space
  double p = 0;
  for (std::size_t k = wins; k <= n; ++k) {
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    p += std::exp(log_c - static_cast<double>(n) * std::log(2.0));
  }
  return std::min(p, 1.0);
}

}  // namespace sopso::exp
