#include "sopso/fitness.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>
#include <vector>

using namespace sopso;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Independent oracle: std::tuple ordering on (f_con, f_obj).
Ordering oracle(const FitnessValue& a, const FitnessValue& b) {
  const auto ka = std::tuple(a.f_con, a.f_obj);
  const auto kb = std::tuple(b.f_con, b.f_obj);
  if (ka < kb) return Ordering::better;
  if (kb < ka) return Ordering::worse;
  return Ordering::equal;
}

/// Mix of feasible, infeasible, tied and sentinel values.
FitnessValue random_fitness(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_int_distribution<int> small(-3, 3);
  std::normal_distribution<double> normal(0.0, 10.0);
  switch (kind(rng)) {
    case 0: return failed();
    case 1:
    case 2: return {static_cast<double>(small(rng)), 0.0};
    case 3: return {static_cast<double>(small(rng)), static_cast<double>(std::abs(small(rng)))};
    case 4:
    case 5: return {normal(rng), 0.0};
    default: return {normal(rng), std::abs(normal(rng))};
  }
}

}  // namespace

TEST_CASE("constraint_term branches") {
  CHECK(constraint_term(8e-6, -kInf, 8e-6) == 0.0);
  CHECK(constraint_term(1.6e-5, -kInf, 8e-6) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(constraint_term(-0.5, 0.0, 1.0) == 0.5);
  CHECK(constraint_term(0.5, 0.0, 1.0) == 0.0);
  CHECK(constraint_term(1.5, 0.0, 1.0) == 0.5);
  // upper bound zero normalizes by 1
  CHECK(constraint_term(2.0, -kInf, 0.0) == 2.0);
  // negative lower bound normalizes by its magnitude
  CHECK(constraint_term(-6.0, -4.0, kInf) == 0.5);
}

TEST_CASE("constraint_term is zero exactly on the range and continuous at its ends") {
  const double lo = -2.0, hi = 5.0;
  for (double g = lo; g <= hi; g += 0.125) CHECK(constraint_term(g, lo, hi) == 0.0);
  const double eps = 1e-9;
  CHECK(constraint_term(lo - eps, lo, hi) < 1e-8);
  CHECK(constraint_term(hi + eps, lo, hi) < 1e-8);
  // overshoot of one |bound| is one violation unit
  CHECK(constraint_term(hi + hi, lo, hi) == doctest::Approx(1.0));
  CHECK(constraint_term(lo - 2.0, lo, hi) == doctest::Approx(1.0));
}

TEST_CASE("aggregate") {
  const std::vector<ResponseSpec> one_min = {ResponseSpec::minimize("f")};
  CHECK(aggregate(std::vector{3.5}, one_min) == FitnessValue{3.5, 0.0});

  const std::vector<ResponseSpec> mixed = {ResponseSpec::minimize("f"), ResponseSpec::within("g", 0.0, 1.0)};
  CHECK(aggregate(std::vector{2.0, 1.5}, mixed) == FitnessValue{2.0, 0.5});

  SUBCASE("weights scale objectives") {
    const std::vector<ResponseSpec> specs = {ResponseSpec::minimize("a", 2.0), ResponseSpec::minimize("b", 0.5)};
    CHECK(aggregate(std::vector{1.0, 4.0}, specs) == FitnessValue{4.0, 0.0});
  }

  SUBCASE("no objectives: ordering rides on the violation alone") {
    const std::vector<ResponseSpec> specs = {ResponseSpec::at_most("g", 1.0)};
    const auto a = aggregate(std::vector{3.0}, specs);
    const auto b = aggregate(std::vector{2.0}, specs);
    CHECK(a.f_obj == 0.0);
    CHECK(b.f_obj == 0.0);
    CHECK(compare(b, a) == Ordering::better);
  }

  SUBCASE("non-finite response fails the evaluation") {
    CHECK(aggregate(std::vector{std::nan("")}, one_min) == failed());
    CHECK(aggregate(std::vector{1.0, kInf}, mixed) == failed());
  }

  CHECK_THROWS_AS(aggregate(std::vector{1.0, 2.0}, one_min), std::invalid_argument);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(validate(std::vector{ResponseSpec::minimize("f", 0.0)}), std::invalid_argument);
  CHECK_THROWS_AS(validate(std::vector{ResponseSpec::within("g", -kInf, kInf)}), std::invalid_argument);
  CHECK_THROWS_AS(validate(std::vector{ResponseSpec::within("g", 2.0, 1.0)}), std::invalid_argument);
  CHECK_NOTHROW(validate(std::vector{ResponseSpec::at_most("g", 1.0), ResponseSpec::minimize("f")}));
}

TEST_CASE("compare follows the feasibility rules") {
  CHECK(compare({5, 0}, {3, 2}) == Ordering::better);
  CHECK(compare({3, 0}, {5, 0}) == Ordering::better);
  CHECK(compare({1, 1}, {0, 2}) == Ordering::better);
  CHECK(compare({3, 2}, {5, 0}) == Ordering::worse);
  CHECK(compare({1, 1}, {1, 1}) == Ordering::equal);
}

TEST_CASE("feasibility is an exact zero test") {
  CHECK(is_feasible({1e300, 0.0}));
  CHECK(is_feasible({-4.0, 0.0}));
  CHECK_FALSE(is_feasible({0.0, 1e-12}));
  CHECK_FALSE(is_feasible(failed()));
}

TEST_CASE("failure sentinel") {
  CHECK(compare(failed(), {1e300, 1e300}) == Ordering::worse);
  CHECK(compare({1e300, 1e300}, failed()) == Ordering::better);
  CHECK(compare(failed(), failed()) == Ordering::equal);
  CHECK(std::isinf(failed().f_obj));
  CHECK(std::isinf(failed().f_con));
}

TEST_CASE("compare agrees with the lexicographic pair oracle") {
  std::mt19937_64 rng(20240611);
  for (int k = 0; k < 10'000; ++k) {
    const auto a = random_fitness(rng);
    const auto b = random_fitness(rng);
    REQUIRE(compare(a, b) == oracle(a, b));
  }
}

TEST_CASE("compare is a total preorder") {
  std::mt19937_64 rng(7);
  auto le = [](const FitnessValue& a, const FitnessValue& b) { return compare(a, b) != Ordering::worse; };
  for (int k = 0; k < 5'000; ++k) {
    const auto a = random_fitness(rng), b = random_fitness(rng), c = random_fitness(rng);
    // antisymmetric three-way result
    const auto ab = compare(a, b), ba = compare(b, a);
    CHECK((ab == Ordering::equal) == (ba == Ordering::equal));
    CHECK((ab == Ordering::better) == (ba == Ordering::worse));
    // total and transitive
    CHECK((le(a, b) || le(b, a)));
    if (le(a, b) && le(b, c)) CHECK(le(a, c));
  }
}
