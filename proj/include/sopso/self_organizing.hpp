#pragma once

#include "sopso/swarm.hpp"

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sopso {

/// x lies in the similar set of o: |x_d - o_d| <= sigma_d in every dimension.
template <typename DerivedX, typename DerivedO, typename DerivedS>
bool is_similar(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedO>& o,
                const Eigen::MatrixBase<DerivedS>& sigma) {
  return ((x - o).cwiseAbs().array() <= sigma.array()).all();
}

enum class Activity { active, inactive };

/// What counts toward the similarity counter.
enum class InactivityRule {
  /// Similar to gbest AND personal best not improved this generation.
  similar_without_improvement,
  /// Similarity alone, as in the bare pseudo code. Kept for ablations.
  similar_only,
};

/// Per-particle count of consecutive generations spent near gbest.
class ActivityTracker {
 public:
  ActivityTracker() = default;
  ActivityTracker(std::size_t n_particles, std::size_t t_c) : sc_(n_particles, 0), t_c_(t_c) {}

  Activity update(std::size_t i, bool similar_to_g, bool pbest_improved, bool is_g,
                  InactivityRule rule = InactivityRule::similar_without_improvement) {
    const bool counts = similar_to_g && !is_g &&
                        (rule == InactivityRule::similar_only || !pbest_improved);
    sc_.at(i) = counts ? sc_[i] + 1 : 0;
    return sc_[i] > t_c_ ? Activity::inactive : Activity::active;
  }

  void reset(std::size_t i) { sc_.at(i) = 0; }

  std::size_t count(std::size_t i) const { return sc_.at(i); }
  std::size_t t_c() const noexcept { return t_c_; }
  std::size_t size() const noexcept { return sc_.size(); }

 private:
  std::vector<std::size_t> sc_;
  std::size_t t_c_ = 2;
};

/// Re-draws x over the full bounds and v by the initialization rule. The
/// personal best survives; the new x is evaluated on the next generation.
template <typename Scalar>
void replace_inactive(Particle<Scalar>& particle, const SearchSpace<Scalar>& space, ActivityTracker& tracker,
                      std::size_t i, Rng& rng) {
  particle.x = uniform_in<Scalar>(space.lower, space.upper, rng);
  particle.v = initial_velocity(space, rng);
  tracker.reset(i);
}

struct SelfOrganizingOptions {
  std::size_t t_c = 2;
  InactivityRule rule = InactivityRule::similar_without_improvement;
};

/// Post-update hook that recognizes and replaces inactive particles. Holds
/// the tracker, so build a fresh one per run.
template <typename Scalar>
class SelfOrganizingHook {
 public:
  SelfOrganizingHook(std::size_t n_particles, SelfOrganizingOptions options = {})
      : tracker_(n_particles, options.t_c), rule_(options.rule) {}

  /// Sigma override; defaults to Problem::sigma.
  SelfOrganizingHook& with_sigma(Vector<Scalar> sigma) {
    sigma_ = std::move(sigma);
    return *this;
  }

  std::vector<std::size_t> operator()(SwarmState<Scalar>& state, const Problem<Scalar>& problem, Rng& rng) {
    if (tracker_.size() != state.particles.size())
      throw std::logic_error("SelfOrganizingHook: tracker sized for a different swarm");
    const Vector<Scalar>& sigma = sigma_.size() ? sigma_ : problem.sigma;
    const Vector<Scalar> gbest = state.gbest();
    std::vector<std::size_t> replaced;
    for (std::size_t i = 0; i < state.particles.size(); ++i) {
      auto& particle = state.particles[i];
      const bool similar = is_similar(particle.x, gbest, sigma);
      if (tracker_.update(i, similar, particle.improved, i == state.g, rule_) == Activity::inactive) {
        replace_inactive(particle, problem.space, tracker_, i, rng);
        replaced.push_back(i);
      }
    }
    return replaced;
  }

  const ActivityTracker& tracker() const noexcept { return tracker_; }

 private:
  ActivityTracker tracker_;
  InactivityRule rule_;
  Vector<Scalar> sigma_;
};

/// Convenience: a self-organizing run with default options.
template <typename Scalar>
RunTrace<Scalar> run_self_organizing(const Problem<Scalar>& problem, const PsoParams<Scalar>& params,
                                     std::uint64_t seed, SelfOrganizingOptions options = {}) {
  return run<Scalar>(problem, params, seed, SelfOrganizingHook<Scalar>(params.n_particles, options));
}

}  // namespace sopso
