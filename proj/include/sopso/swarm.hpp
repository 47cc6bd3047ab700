#pragma once

#include "sopso/fitness.hpp"
#include "sopso/types.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace sopso {

// ---------------------------------------------------------------------------
// Search space and problem description
// ---------------------------------------------------------------------------

/// Box-shaped design space plus the sub-box particles are initialized in.
/// The init box may sit anywhere inside (or partially outside) the bounds.
template <typename Scalar>
struct SearchSpace {
  Vector<Scalar> lower, upper;
  Vector<Scalar> init_lower, init_upper;

  SearchSpace() = default;

  SearchSpace(Vector<Scalar> lo, Vector<Scalar> hi)
      : SearchSpace(lo, hi, lo, hi) {}

  SearchSpace(Vector<Scalar> lo, Vector<Scalar> hi, Vector<Scalar> init_lo, Vector<Scalar> init_hi)
      : lower(std::move(lo)), upper(std::move(hi)), init_lower(std::move(init_lo)),
        init_upper(std::move(init_hi)) {
    const auto d = lower.size();
    if (d < 1) throw std::invalid_argument("SearchSpace: needs at least one dimension");
    if (upper.size() != d || init_lower.size() != d || init_upper.size() != d)
      throw std::invalid_argument("SearchSpace: bound vectors differ in length");
    if (!(lower.array() < upper.array()).all())
      throw std::invalid_argument("SearchSpace: lower must be < upper in every dimension");
    if (!(init_lower.array() <= init_upper.array()).all())
      throw std::invalid_argument("SearchSpace: init_lower must be <= init_upper");
  }

  static SearchSpace cube(Eigen::Index dims, Scalar lo, Scalar hi) {
    return SearchSpace(Vector<Scalar>::Constant(dims, lo), Vector<Scalar>::Constant(dims, hi));
  }

  Eigen::Index dims() const noexcept { return lower.size(); }

  /// Largest bound magnitude in dimension d; scales the velocity cap.
  Scalar bound_magnitude(Eigen::Index d) const noexcept {
    using std::abs;
    return std::max(abs(lower[d]), abs(upper[d]));
  }
};

enum class BoundaryPolicy { none, clamp };

/// Responses-to-fitness adapter. Either fill `fitness` directly, or let
/// make_problem wire it from a raw response function and the specs.
template <typename Scalar>
struct Problem {
  std::string name;
  SearchSpace<Scalar> space;
  /// Process deviation per dimension; radius of the similar set.
  Vector<Scalar> sigma;
  std::vector<ResponseSpec> specs;
  std::function<FitnessValue(const Vector<Scalar>&)> fitness;
  /// Used when PsoParams leaves boundary handling unset.
  BoundaryPolicy boundary = BoundaryPolicy::none;
};

/// Builds a Problem whose fitness aggregates `responses` under `specs`. A
/// response function returning std::nullopt marks a failed evaluation.
template <typename Scalar, typename ResponseFn>
Problem<Scalar> make_problem(std::string name, SearchSpace<Scalar> space, Vector<Scalar> sigma,
                             std::vector<ResponseSpec> specs, ResponseFn responses,
                             BoundaryPolicy boundary = BoundaryPolicy::none) {
  validate(specs);
  if (sigma.size() != space.dims())
    throw std::invalid_argument("make_problem: sigma length differs from dimension count");
  if (!(sigma.array() > Scalar(0)).all())
    throw std::invalid_argument("make_problem: sigma entries must be positive");
  Problem<Scalar> p{std::move(name), std::move(space), std::move(sigma), std::move(specs), {}, boundary};
  p.fitness = [specs = p.specs, fn = std::move(responses)](const Vector<Scalar>& x) -> FitnessValue {
    const std::optional<std::vector<double>> r = fn(x);
    if (!r) return failed();
    return aggregate(*r, specs);
  };
  return p;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct FixedInertia {
  double w = 0.4;
};

struct LinearInertia {
  double w_start = 0.9;
  double w_end = 0.4;
};

/// Clerc-Kennedy constriction expressed as inertia form. Overrides c1 and c2.
struct ConstrictionInertia {
  static constexpr double w = 0.729;
  static constexpr double c = 1.494;
};

using InertiaSchedule = std::variant<FixedInertia, LinearInertia, ConstrictionInertia>;

template <typename Scalar = double>
struct PsoParams {
  std::size_t n_particles = 20;
  /// Update generations after initialization; a run evaluates N * (T + 1) points.
  std::size_t max_gen = 1000;
  Scalar c1 = 2;
  Scalar c2 = 2;
  InertiaSchedule inertia = FixedInertia{0.4};
  /// Velocity clamp at +/- fraction * max(|lower_d|, |upper_d|); nullopt disables it.
  std::optional<Scalar> vmax_fraction = Scalar(1);
  /// nullopt defers to Problem::boundary.
  std::optional<BoundaryPolicy> boundary;

  void validate() const {
    if (n_particles < 2) throw std::invalid_argument("PsoParams: need at least 2 particles");
    if (max_gen < 1) throw std::invalid_argument("PsoParams: max_gen must be >= 1");
    if (c1 < 0 || c2 < 0) throw std::invalid_argument("PsoParams: acceleration constants must be >= 0");
    if (const auto* f = std::get_if<FixedInertia>(&inertia); f && f->w < 0)
      throw std::invalid_argument("PsoParams: inertia weight must be >= 0");
  }
};

// ---------------------------------------------------------------------------
// Per-component update rules
// ---------------------------------------------------------------------------

/// New velocity along one dimension: inertia + cognitive pull + social pull.
template <typename Scalar>
constexpr Scalar velocity_component(Scalar v, Scalar x, Scalar p, Scalar g, Scalar w, Scalar c1,
                                    Scalar c2, Scalar r1, Scalar r2) noexcept {
  return w * v + c1 * r1 * (p - x) + c2 * r2 * (g - x);
}

template <typename Scalar>
constexpr Scalar position_component(Scalar x, Scalar v_new) noexcept {
  return x + v_new;
}

/// Inertia weight at generation t of T.
inline double inertia_at(const InertiaSchedule& schedule, std::size_t t, std::size_t T) noexcept {
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, FixedInertia>) {
          return s.w;
        } else if constexpr (std::is_same_v<S, LinearInertia>) {
          if (T == 0) return s.w_start;
          return s.w_start + (s.w_end - s.w_start) * static_cast<double>(t) / static_cast<double>(T);
        } else {
          return S::w;
        }
      },
      schedule);
}

/// Acceleration constants actually in force; constriction pins both to 1.494.
template <typename Scalar>
std::pair<Scalar, Scalar> accelerations(const PsoParams<Scalar>& params) noexcept {
  if (std::holds_alternative<ConstrictionInertia>(params.inertia))
    return {Scalar(ConstrictionInertia::c), Scalar(ConstrictionInertia::c)};
  return {params.c1, params.c2};
}

template <typename Scalar>
Scalar apply_velocity_cap(Scalar v, Eigen::Index d, const std::optional<Scalar>& vmax_fraction,
                          const SearchSpace<Scalar>& space) noexcept {
  if (!vmax_fraction) return v;
  const Scalar cap = *vmax_fraction * space.bound_magnitude(d);
  return std::clamp(v, -cap, cap);
}

template <typename Scalar>
Scalar apply_boundary(Scalar x, Eigen::Index d, BoundaryPolicy policy,
                      const SearchSpace<Scalar>& space) noexcept {
  if (policy == BoundaryPolicy::none) return x;
  return std::min(std::max(x, space.lower[d]), space.upper[d]);
}

// ---------------------------------------------------------------------------
// Swarm state
// ---------------------------------------------------------------------------

template <typename Scalar>
struct Particle {
  Vector<Scalar> x, v, p;
  FitnessValue p_fitness;
  /// Fitness of x as of the last evaluation.
  FitnessValue fitness;
  /// Whether the last evaluation strictly improved p.
  bool improved = false;

  bool operator==(const Particle& o) const {
    return x == o.x && v == o.v && p == o.p && p_fitness == o.p_fitness && fitness == o.fitness &&
           improved == o.improved;
  }
};

template <typename Scalar>
struct SwarmState {
  std::vector<Particle<Scalar>> particles;
  std::size_t g = 0;
  std::size_t generation = 0;
  std::size_t evaluations = 0;

  const Particle<Scalar>& best() const { return particles[g]; }
  const Vector<Scalar>& gbest() const { return particles[g].p; }

  bool operator==(const SwarmState&) const = default;
};

/// Index of the minimal personal best under compare; lowest index wins ties.
template <typename Scalar>
std::size_t select_gbest(const std::vector<Particle<Scalar>>& particles) noexcept {
  std::size_t g = 0;
  for (std::size_t i = 1; i < particles.size(); ++i)
    if (better(particles[i].p_fitness, particles[g].p_fitness)) g = i;
  return g;
}

/// Uniform draw in [lo, hi) per dimension.
template <typename Scalar>
Vector<Scalar> uniform_in(const Vector<Scalar>& lo, const Vector<Scalar>& hi, Rng& rng) {
  std::uniform_real_distribution<Scalar> unit(0, 1);
  Vector<Scalar> out(lo.size());
  for (Eigen::Index d = 0; d < lo.size(); ++d) out[d] = lo[d] + unit(rng) * (hi[d] - lo[d]);
  return out;
}

/// Initial velocity: uniform over +/- the width of the init range.
template <typename Scalar>
Vector<Scalar> initial_velocity(const SearchSpace<Scalar>& space, Rng& rng) {
  const Vector<Scalar> width = (space.init_upper - space.init_lower).cwiseAbs();
  return uniform_in<Scalar>(-width, width, rng);
}

template <typename Scalar>
SwarmState<Scalar> init_swarm(const Problem<Scalar>& problem, const PsoParams<Scalar>& params, Rng& rng) {
  params.validate();
  const auto& space = problem.space;
  SwarmState<Scalar> state;
  state.particles.reserve(params.n_particles);
  for (std::size_t i = 0; i < params.n_particles; ++i) {
    Particle<Scalar> particle;
    particle.x = uniform_in<Scalar>(space.init_lower, space.init_upper, rng);
    particle.v = initial_velocity(space, rng);
    particle.p = particle.x;
    state.particles.push_back(std::move(particle));
  }
  for (auto& particle : state.particles) {
    particle.fitness = problem.fitness(particle.x);
    particle.p_fitness = particle.fitness;
    ++state.evaluations;
  }
  state.g = select_gbest(state.particles);
  return state;
}

template <typename Scalar>
SwarmState<Scalar> init_swarm(const Problem<Scalar>& problem, const PsoParams<Scalar>& params,
                              std::uint64_t seed) {
  Rng rng(seed);
  return init_swarm(problem, params, rng);
}

/// One synchronous generation: move every particle against the previous
/// gbest, evaluate, then fold personal bests in index order and reselect g.
template <typename Scalar>
void step(SwarmState<Scalar>& state, const Problem<Scalar>& problem, const PsoParams<Scalar>& params,
          Rng& rng) {
  const auto& space = problem.space;
  const BoundaryPolicy boundary = params.boundary.value_or(problem.boundary);
  const Scalar w = static_cast<Scalar>(inertia_at(params.inertia, state.generation, params.max_gen));
  const auto [c1, c2] = accelerations(params);
  const Vector<Scalar> gbest = state.gbest();
  std::uniform_real_distribution<Scalar> unit(0, 1);

  for (auto& particle : state.particles) {
    for (Eigen::Index d = 0; d < space.dims(); ++d) {
      const Scalar r1 = unit(rng);
      const Scalar r2 = unit(rng);
      Scalar v = velocity_component(particle.v[d], particle.x[d], particle.p[d], gbest[d], w, c1, c2, r1, r2);
      v = apply_velocity_cap(v, d, params.vmax_fraction, space);
      particle.v[d] = v;
      particle.x[d] = apply_boundary(position_component(particle.x[d], v), d, boundary, space);
    }
  }

  for (auto& particle : state.particles) {
    particle.fitness = problem.fitness(particle.x);
    ++state.evaluations;
  }

  for (auto& particle : state.particles) {
    particle.improved = better(particle.fitness, particle.p_fitness);
    if (particle.improved) {
      particle.p = particle.x;
      particle.p_fitness = particle.fitness;
    }
  }
  state.g = select_gbest(state.particles);
  ++state.generation;
}

// ---------------------------------------------------------------------------
// Runs and traces
// ---------------------------------------------------------------------------

struct GenerationRecord {
  std::size_t generation = 0;
  FitnessValue best;
  std::size_t evaluations = 0;
  std::size_t replacements = 0;

  bool operator==(const GenerationRecord&) const = default;
};

struct ReplacementEvent {
  std::size_t generation = 0;
  std::size_t particle = 0;

  bool operator==(const ReplacementEvent&) const = default;
};

/// Everything an experiment emits about one run. records[0] is initialization.
template <typename Scalar>
struct RunTrace {
  std::vector<GenerationRecord> records;
  std::vector<ReplacementEvent> events;
  Vector<Scalar> best_position;

  const FitnessValue& final_best() const { return records.back().best; }
  std::size_t total_replacements() const { return events.size(); }

  bool operator==(const RunTrace& o) const {
    return records == o.records && events == o.events && best_position.size() == o.best_position.size() &&
           best_position == o.best_position;
  }
};

/// Runs after every step(). Returns the indices of particles it replaced.
template <typename Scalar>
using PostUpdateHook =
    std::function<std::vector<std::size_t>(SwarmState<Scalar>&, const Problem<Scalar>&, Rng&)>;

template <typename Scalar>
RunTrace<Scalar> run(const Problem<Scalar>& problem, const PsoParams<Scalar>& params, std::uint64_t seed,
                     const PostUpdateHook<Scalar>& hook = {}, std::size_t generations = SIZE_MAX) {
  Rng rng(seed);
  SwarmState<Scalar> state = init_swarm(problem, params, rng);
  RunTrace<Scalar> trace;
  const std::size_t T = std::min(generations, params.max_gen);
  trace.records.reserve(T + 1);
  trace.records.push_back({0, state.best().p_fitness, state.evaluations, 0});

  for (std::size_t t = 0; t < T; ++t) {
    step(state, problem, params, rng);
    std::size_t replaced = 0;
    if (hook) {
      for (std::size_t i : hook(state, problem, rng)) {
        trace.events.push_back({state.generation, i});
        ++replaced;
      }
    }
    trace.records.push_back({state.generation, state.best().p_fitness, state.evaluations, replaced});
  }
  trace.best_position = state.gbest();
  return trace;
}

}  // namespace sopso
