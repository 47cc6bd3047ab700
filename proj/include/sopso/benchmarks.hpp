#pragma once

#include "sopso/swarm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sopso::bench {

template <typename Derived>
typename Derived::Scalar rosenbrock(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  if (n < 2) throw std::invalid_argument("rosenbrock: needs at least 2 dimensions");
  const auto head = x.head(n - 1).array();
  const auto tail = x.tail(n - 1).array();
  return (Scalar(100) * (tail - head.square()).square() + (head - Scalar(1)).square()).sum();
}

template <typename Derived>
typename Derived::Scalar rastrigin(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const auto a = x.array();
  return (a.square() - Scalar(10) * (Scalar(2) * std::numbers::pi_v<Scalar> * a).cos() + Scalar(10)).sum();
}

template <typename Derived>
typename Derived::Scalar griewank(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const auto idx = Eigen::Array<Scalar, Eigen::Dynamic, 1>::LinSpaced(x.size(), Scalar(1), Scalar(x.size()));
  return x.squaredNorm() / Scalar(4000) - (x.array() / idx.sqrt()).cos().prod() + Scalar(1);
}

enum class Function { rosenbrock, rastrigin, griewank };
enum class Init { symmetric, asymmetric };

struct BenchmarkSpec {
  Function function = Function::rosenbrock;
  Eigen::Index dims = 10;
  Init init = Init::symmetric;
  /// Similar-set radius applied to every dimension.
  double sigma = 0.01;
};

/// Parses "rosenbrock" / "rastrigin" / "griewank" (also "f1".."f3").
Function parse_function(std::string_view name);
std::string_view to_string(Function f) noexcept;

/// Per-dimension bound magnitude x_max: 100, 10 and 600 respectively.
double x_max(Function f) noexcept;

/// Asymmetric initialization interval; symmetric init spans [-x_max, x_max].
std::pair<double, double> asymmetric_init_range(Function f) noexcept;

/// Unconstrained problem with one MIN objective equal to the function value.
Problem<double> benchmark_problem(const BenchmarkSpec& spec);

}  // namespace sopso::bench
