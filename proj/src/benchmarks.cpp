#include "sopso/benchmarks.hpp"

#include <optional>
#include <vector>

namespace sopso::bench {

Function parse_function(std::string_view name) {
  if (name == "rosenbrock" || name == "f1") return Function::rosenbrock;
  if (name == "rastrigin" || name == "f2") return Function::rastrigin;
  if (name == "griewank" || name == "f3") return Function::griewank;
  throw std::invalid_argument("unknown benchmark function '" + std::string(name) + "'");
}

std::string_view to_string(Function f) noexcept {
  switch (f) {
    case Function::rosenbrock: return "rosenbrock";
    case Function::rastrigin: return "rastrigin";
    case Function::griewank: return "griewank";
  }
  return "?";
}

double x_max(Function f) noexcept {
  switch (f) {
    case Function::rosenbrock: return 100.0;
    case Function::rastrigin: return 10.0;
    case Function::griewank: return 600.0;
  }
  return 0.0;
}

std::pair<double, double> asymmetric_init_range(Function f) noexcept {
  switch (f) {
    case Function::rosenbrock: return {15.0, 30.0};
    case Function::rastrigin: return {2.56, 5.12};
    case Function::griewank: return {300.0, 600.0};
  }
  return {0.0, 0.0};
}

Problem<double> benchmark_problem(const BenchmarkSpec& spec) {
  if (spec.function == Function::rosenbrock && spec.dims < 2)
    throw std::invalid_argument("rosenbrock needs D >= 2");
  if (spec.dims < 1) throw std::invalid_argument("benchmark needs D >= 1");

  const double xm = x_max(spec.function);
  const auto [init_lo, init_hi] =
      spec.init == Init::symmetric ? std::pair{-xm, xm} : asymmetric_init_range(spec.function);
  const Eigen::Index D = spec.dims;
  SearchSpace<double> space(VectorXd::Constant(D, -xm), VectorXd::Constant(D, xm),
                            VectorXd::Constant(D, init_lo), VectorXd::Constant(D, init_hi));

  double (*fn)(const Eigen::MatrixBase<VectorXd>&) = nullptr;
  switch (spec.function) {
    case Function::rosenbrock: fn = &rosenbrock<VectorXd>; break;
    case Function::rastrigin: fn = &rastrigin<VectorXd>; break;
    case Function::griewank: fn = &griewank<VectorXd>; break;
  }

  // Single unweighted objective with no constraints: skip the response
  // vector and write the fitness pair directly.
  Problem<double> problem;
  problem.name = std::string(to_string(spec.function));
  problem.space = std::move(space);
  problem.sigma = VectorXd::Constant(D, spec.sigma);
  problem.specs = {ResponseSpec::minimize(problem.name)};
  problem.fitness = [fn](const VectorXd& x) -> FitnessValue {
    const double value = fn(x);
    if (!std::isfinite(value)) return failed();
    return {value, 0.0};
  };
  return problem;
}

}  // namespace sopso::bench
