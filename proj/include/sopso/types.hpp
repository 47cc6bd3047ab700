#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace sopso {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using VectorXd = Vector<double>;

/// Every stochastic component draws from this engine so a seed pins a run.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer: derives independent stream seeds from (base, index).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace sopso
