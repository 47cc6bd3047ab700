#include "sopso/convergence.hpp"

#include "sopso/types.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace sopso::lab {

namespace {

constexpr std::size_t kBlock = 1024;

void accumulate_block(const ScalarEnsembleConfig& c, std::size_t first, std::size_t last,
                      std::vector<double>& sums) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t trial = first; trial < last; ++trial) {
    Rng rng(derive_seed(c.seed, trial));
    double x = c.initial_scale * unit(rng);
    double v = c.initial_scale * unit(rng);
    sums[0] += std::log10(std::max(std::abs(x), kLogFloor));
    for (std::size_t t = 1; t <= c.horizon; ++t) {
      const double r1 = unit(rng);
      const double r2 = unit(rng);
      const auto next = scalar_step(x, v, c.w, c.c1, c.c2, r1, r2);
      x = next.x;
      v = next.v;
      sums[t] += std::log10(std::max(std::abs(x), kLogFloor));
    }
  }
}

}  // namespace

std::vector<double> ensemble_mean_log(const ScalarEnsembleConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("ensemble needs at least one trial");
  if (config.horizon < 1) throw std::invalid_argument("ensemble horizon must be >= 1");

  const std::size_t n_blocks = (config.trials + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> block_sums(n_blocks, std::vector<double>(config.horizon + 1, 0.0));

  unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_blocks));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t b; (b = next.fetch_add(1)) < n_blocks;)
      accumulate_block(config, b * kBlock, std::min(config.trials, (b + 1) * kBlock), block_sums[b]);
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
  }

  std::vector<double> mean(config.horizon + 1, 0.0);
  for (const auto& block : block_sums)
    for (std::size_t t = 0; t <= config.horizon; ++t) mean[t] += block[t];
  for (double& m : mean) m /= static_cast<double>(config.trials);
  return mean;
}

std::vector<SweepPoint> sweep_w(std::vector<double> w_grid, const ScalarEnsembleConfig& config_template) {
  if (w_grid.empty()) throw std::invalid_argument("sweep_w: empty grid");
  std::sort(w_grid.begin(), w_grid.end());
  std::vector<SweepPoint> out;
  out.reserve(w_grid.size());
  for (double w : w_grid) {
    auto config = config_template;
    config.w = w;
    const auto series = ensemble_mean_log(config);
    out.push_back({w, series.front(), series.back()});
  }
  return out;
}

double estimate_threshold(std::span<const SweepPoint> sweep) {
  std::vector<SweepPoint> sorted(sweep.begin(), sweep.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.w < b.w; });

  std::size_t crossings = 0;
  double root = 0.0;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double a = sorted[i - 1].drift();
    const double b = sorted[i].drift();
    if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) {
      ++crossings;
      root = sorted[i - 1].w + (sorted[i].w - sorted[i - 1].w) * (-a) / (b - a);
    }
  }
  if (crossings == 0)
    throw ThresholdNotBracketed("no dissipative/chaotic crossing inside the w grid; widen the grid");
  if (crossings > 1)
    throw ThresholdNotBracketed("sweep is not monotone across the crossing; refine the grid or add trials");
  return root;
}

LinearFit fit_line(std::span<const double> series, std::size_t first, std::size_t last) {
  if (last >= series.size() || last <= first) throw std::invalid_argument("fit_line: bad range");
  const double n = static_cast<double>(last - first + 1);
  double st = 0, sy = 0;
  for (std::size_t t = first; t <= last; ++t) {
    st += static_cast<double>(t);
    sy += series[t];
  }
  const double mt = st / n, my = sy / n;
  double stt = 0, sty = 0, syy = 0;
  for (std::size_t t = first; t <= last; ++t) {
    const double dt = static_cast<double>(t) - mt, dy = series[t] - my;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  const double slope = sty / stt;
  const double r2 = syy > 0 ? (sty * sty) / (stt * syy) : 1.0;
  return {slope, my - slope * mt, r2};
}

}  // namespace sopso::lab
