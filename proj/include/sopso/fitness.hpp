#pragma once

#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sopso {

/// Ordered pair <objective, constraint violation>. Smaller is better in both,
/// with the violation compared first.
struct FitnessValue {
  double f_obj = 0.0;
  double f_con = 0.0;

  bool operator==(const FitnessValue&) const = default;
};

enum class Ordering { better, equal, worse };

/// Sentinel for evaluations the simulator could not complete: <+inf, +inf>.
constexpr FitnessValue failed() noexcept {
  return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
}

constexpr bool is_failed(const FitnessValue& f) noexcept { return f == failed(); }

/// Feasible iff the violation is exactly zero. The constraint term returns an
/// exact 0 inside its bounds, so no tolerance is needed (or wanted).
constexpr bool is_feasible(const FitnessValue& f) noexcept { return f.f_con == 0.0; }

/// Three-way comparison of a against b. Feasibility dominates, then the
/// objective; the failure sentinel loses to everything except itself.
Ordering compare(const FitnessValue& a, const FitnessValue& b) noexcept;

inline bool better(const FitnessValue& a, const FitnessValue& b) noexcept {
  return compare(a, b) == Ordering::better;
}

/// Minimization objective f_j with positive weight w_j.
struct Minimize {
  double weight = 1.0;
};

/// Range constraint c_lower <= g_k <= c_upper. Use +/-inf for an open side.
struct Constrain {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

struct ResponseSpec {
  std::variant<Minimize, Constrain> kind;
  std::string label;

  static ResponseSpec minimize(std::string label, double weight = 1.0);
  static ResponseSpec at_most(std::string label, double upper);
  static ResponseSpec at_least(std::string label, double lower);
  static ResponseSpec within(std::string label, double lower, double upper);
};

/// Normalized violation of one range constraint. Zero inside the range; below
/// it the shortfall is divided by |c_lower| (or 1 when c_lower is 0), above it
/// the overshoot by |c_upper| (or 1 when c_upper is 0).
double constraint_term(double value, double lower, double upper) noexcept;

/// Folds raw responses into the fitness pair. Any non-finite response yields
/// the failure sentinel. Throws std::invalid_argument on length mismatch.
FitnessValue aggregate(std::span<const double> responses, std::span<const ResponseSpec> specs);

/// Raises std::invalid_argument when a spec breaks its invariants (non-positive
/// weight, constraint with no finite bound, or lower > upper).
void validate(std::span<const ResponseSpec> specs);

}  // namespace sopso
