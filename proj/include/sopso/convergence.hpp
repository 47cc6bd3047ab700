#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

/// Monte Carlo study of a lone particle sitting on a fixed gbest (p = g = 0)
/// in one dimension: v' = w v - (c1 r1 + c2 r2) x, x' = x + v'.
namespace sopso::lab {

struct ScalarEnsembleConfig {
  double w = 0.4;
  double c1 = 2.0;
  double c2 = 2.0;
  std::size_t horizon = 100;
  std::size_t trials = 100'000;
  std::uint64_t seed = 1;
  /// Multiplies the U[0,1) initial x and v. 1 reproduces the reference setup.
  double initial_scale = 1.0;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned workers = 0;
};

/// Guards log10 against exact zeros and underflow.
inline constexpr double kLogFloor = 1e-300;

struct ScalarState {
  double x;
  double v;
};

constexpr ScalarState scalar_step(double x, double v, double w, double c1, double c2, double r1,
                                  double r2) noexcept {
  const double v_next = w * v - (c1 * r1 + c2 * r2) * x;
  return {x + v_next, v_next};
}

/// entry[t] = mean over trials of log10(max(|x_t|, kLogFloor)), t = 0..horizon.
/// Each trial draws from its own stream seeded by (seed, trial index), and
/// partial sums are combined in a fixed order, so the result does not depend
/// on the worker count.
std::vector<double> ensemble_mean_log(const ScalarEnsembleConfig& config);

struct SweepPoint {
  double w;
  double initial;  // mean log10|x| at t = 0
  double final;    // mean log10|x| at t = horizon

  double drift() const noexcept { return final - initial; }
};

/// One ensemble per grid value, sorted by w ascending.
std::vector<SweepPoint> sweep_w(std::vector<double> w_grid, const ScalarEnsembleConfig& config_template);

class ThresholdNotBracketed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inertia weight where the ensemble neither shrinks nor grows over the
/// horizon: linear interpolation of the unique sign change of drift().
/// Throws ThresholdNotBracketed if there is no sign change, or several.
double estimate_threshold(std::span<const SweepPoint> sweep);

struct LinearFit {
  double slope;
  double intercept;
  double r_squared;
};

/// Least-squares line through (t, series[t]) for t in [first, last].
LinearFit fit_line(std::span<const double> series, std::size_t first, std::size_t last);

}  // namespace sopso::lab
