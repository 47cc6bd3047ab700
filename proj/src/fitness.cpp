#include "sopso/fitness.hpp"

#include <cmath>
#include <stdexcept>

namespace sopso {

Ordering compare(const FitnessValue& a, const FitnessValue& b) noexcept {
  const bool a_failed = is_failed(a);
  const bool b_failed = is_failed(b);
  if (a_failed || b_failed) {
    if (a_failed && b_failed) return Ordering::equal;
    return a_failed ? Ordering::worse : Ordering::better;
  }
  if (a.f_con < b.f_con) return Ordering::better;
  if (b.f_con < a.f_con) return Ordering::worse;
  if (a.f_obj < b.f_obj) return Ordering::better;
  if (b.f_obj < a.f_obj) return Ordering::worse;
  return Ordering::equal;
}

ResponseSpec ResponseSpec::minimize(std::string label, double weight) {
  return {Minimize{weight}, std::move(label)};
}

ResponseSpec ResponseSpec::at_most(std::string label, double upper) {
  return {Constrain{-std::numeric_limits<double>::infinity(), upper}, std::move(label)};
}

ResponseSpec ResponseSpec::at_least(std::string label, double lower) {
  return {Constrain{lower, std::numeric_limits<double>::infinity()}, std::move(label)};
}

ResponseSpec ResponseSpec::within(std::string label, double lower, double upper) {
  return {Constrain{lower, upper}, std::move(label)};
}

double constraint_term(double value, double lower, double upper) noexcept {
  if (value < lower) {
    const double scale = lower != 0.0 ? std::abs(lower) : 1.0;
    return (lower - value) / scale;
  }
  if (value > upper) {
    const double scale = upper != 0.0 ? std::abs(upper) : 1.0;
    return (value - upper) / scale;
  }
  return 0.0;
}

void validate(std::span<const ResponseSpec> specs) {
  for (const auto& spec : specs) {
    if (const auto* m = std::get_if<Minimize>(&spec.kind)) {
      if (!(m->weight > 0.0))
        throw std::invalid_argument("objective '" + spec.label + "' needs a positive weight");
    } else {
      const auto& c = std::get<Constrain>(spec.kind);
      if (!std::isfinite(c.lower) && !std::isfinite(c.upper))
        throw std::invalid_argument("constraint '" + spec.label + "' has no finite bound");
      if (c.lower > c.upper)
        throw std::invalid_argument("constraint '" + spec.label + "' has lower > upper");
    }
  }
}

FitnessValue aggregate(std::span<const double> responses, std::span<const ResponseSpec> specs) {
  if (responses.size() != specs.size())
    throw std::invalid_argument("aggregate: responses and specs differ in length");

  FitnessValue out{0.0, 0.0};
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const double r = responses[k];
    if (!std::isfinite(r)) return failed();
    if (const auto* m = std::get_if<Minimize>(&specs[k].kind)) {
      out.f_obj += m->weight * r;
    } else {
      const auto& c = std::get<Constrain>(specs[k].kind);
      out.f_con += constraint_term(r, c.lower, c.upper);
    }
  }
  return out;
}

}  // namespace sopso
