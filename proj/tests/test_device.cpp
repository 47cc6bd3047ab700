#include "sopso/device.hpp"
#include "sopso/self_organizing.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

using namespace sopso;
using namespace sopso::device;

namespace {

std::string stub() {
  const char* path = std::getenv("SIM_STUB");
  REQUIRE_MESSAGE(path != nullptr, "SIM_STUB must point at tests/stub_simulator.sh");
  return path;
}

VectorXd point(double x1, double d1, double x2, double d2, double nsub) {
  VectorXd p(kParamCount);
  p << x1, d1, x2, d2, nsub;
  return p;
}

/// Independent restatement of the surrogate, in normalized coordinates.
struct Oracle {
  static double barrier(double zx1, double zd1, double zx2, double zd2, double zn) {
    return 0.25 * zd1 + 0.25 * zd2 + 0.3 * zn +
           0.2 * std::exp(-((zx1 - 0.3) * (zx1 - 0.3) + (zx2 - 0.6) * (zx2 - 0.6)) / 0.08);
  }
  static double i_on(double b) { return 1.5e-4 * (1.0 - 0.6 * b); }
  static double i_off(double b) { return 1e-10 * std::pow(10.0, -6.0 * b); }
  static double g_out(double b) { return 2e-5 * (1.0 - 0.8 * b); }
};

/// Constrained max of i_on over a 50-point-per-axis grid of the box.
double grid_oracle_optimum() {
  constexpr int n = 50;
  std::vector<double> per_slice(n, 0.0);
  {
    std::vector<std::jthread> pool;
    for (int a = 0; a < n; ++a)
      pool.emplace_back([a, &per_slice] {
        const double zx1 = a / double(n - 1);
        double best = 0.0;
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d)
              for (int e = 0; e < n; ++e) {
                const double bar = Oracle::barrier(zx1, b / double(n - 1), c / double(n - 1), d / double(n - 1),
                                                   e / double(n - 1));
                if (Oracle::i_off(bar) <= 1e-14 && Oracle::g_out(bar) <= 8e-6) best = std::max(best, Oracle::i_on(bar));
              }
        per_slice[a] = best;
      });
  }
  return *std::max_element(per_slice.begin(), per_slice.end());
}

}  // namespace

TEST_CASE("device space matches the parameter table") {
  const auto space = device_space();
  CHECK(space.lower == point(0.0, 1e10, 0.0, 1e10, 1e15));
  CHECK(space.upper == point(0.25, 1e13, 0.25, 1e13, 1e18));
  CHECK(device_sigma() == point(2.5e-4, 1e10, 2.5e-4, 1e10, 1e15));
  CHECK(clamp_to_space(point(0.3, 0.0, -1.0, 5e13, 1e16)) == point(0.25, 1e10, 0.0, 1e13, 1e16));
}

TEST_CASE("device fitness from responses") {
  const auto specs = device_specs();
  CHECK(aggregate(fitness_responses({1e-4, 1e-15, 5e-6}), specs) == FitnessValue{-1e-4, 0.0});
  const auto f = aggregate(fitness_responses({2e-4, 2e-14, 5e-6}), specs);
  CHECK(f.f_obj == -2e-4);
  CHECK(f.f_con == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(is_feasible(f));
}

TEST_CASE("surrogate matches the independent formula") {
  Rng rng(17);
  const auto space = device_space();
  for (int k = 0; k < 500; ++k) {
    const VectorXd p = uniform_in<double>(space.lower, space.upper, rng);
    const VectorXd z = (p - space.lower).cwiseQuotient(space.upper - space.lower);
    const double b = Oracle::barrier(z[X1], z[Dose1], z[X2], z[Dose2], z[Nsub]);
    REQUIRE(surrogate_barrier(p) == doctest::Approx(b).epsilon(1e-13));
    const auto r = surrogate_evaluate(p);
    REQUIRE(r.i_on == doctest::Approx(Oracle::i_on(b)).epsilon(1e-13));
    REQUIRE(r.i_off == doctest::Approx(Oracle::i_off(b)).epsilon(1e-12));
    REQUIRE(r.g_out == doctest::Approx(Oracle::g_out(b)).epsilon(1e-13));
  }
}

TEST_CASE("surrogate reference points") {
  const auto low = surrogate_evaluate(point(0.0, 1e10, 0.0, 1e10, 1e15));
  CHECK(low.i_on == doctest::Approx(1.5e-4).epsilon(1e-3));
  CHECK(low.i_off == doctest::Approx(1e-10).epsilon(0.01));
  CHECK(low.i_off > 1e-14);

  const auto edge = surrogate_responses(0.75);
  CHECK(edge.i_off == doctest::Approx(3.1622776601683794e-15).epsilon(1e-12));
  CHECK(edge.i_off <= kIoffLimit);
  CHECK(edge.g_out == doctest::Approx(8e-6).epsilon(1e-14));
  CHECK(edge.i_on == doctest::Approx(kSurrogateIonOpt).epsilon(1e-14));
}

TEST_CASE("surrogate responses decrease strictly in the barrier") {
  const double h = 1e-6;
  for (double b = 0.0; b < 1.0; b += 0.01) {
    const auto lo = surrogate_responses(b), hi = surrogate_responses(b + h);
    REQUIRE((hi.i_on - lo.i_on) / h < 0.0);
    REQUIRE((hi.i_off - lo.i_off) / h < 0.0);
    REQUIRE((hi.g_out - lo.g_out) / h < 0.0);
  }
}

TEST_CASE("surrogate optimum agrees with the brute-force grid") {
  const double grid = grid_oracle_optimum();
  CHECK(grid <= kSurrogateIonOpt * (1 + 1e-12));
  CHECK(std::abs(grid - kSurrogateIonOpt) / kSurrogateIonOpt < 1e-3);
}

TEST_CASE("request and response files") {
  const VectorXd p = point(0.0625, 3.5e12, 0.125, 1e10, 2.5e17);
  const auto text = format_request(p);
  CHECK(text == "X1=0.0625\nDose1=3.5e+12\nX2=0.125\nDose2=1e+10\nNsub=2.5e+17\n");
  const auto back = parse_request(text);
  REQUIRE(back);
  CHECK(*back == p);

  const DeviceResponses r{1.2345e-4, 6.5e-15, 7.25e-6};
  CHECK(parse_response(format_response(r)) == r);
  CHECK(parse_response("Ion = 1e-4\r\n# comment\nIoff=1e-15\n\nGout=1e-6") == DeviceResponses{1e-4, 1e-15, 1e-6});
  CHECK_FALSE(parse_response("Ion=1e-4\nIoff=1e-15\n"));
  CHECK_FALSE(parse_response("Ion=1e-4\nIoff=nan\nGout=1e-6\n"));
  CHECK_FALSE(parse_response("Ion=0\nIoff=1e-15\nGout=1e-6\n"));
  CHECK_FALSE(parse_response("Ion=abc\nIoff=1e-15\nGout=1e-6\n"));
  CHECK_FALSE(parse_request("X1=0.1\n"));
}

TEST_CASE("external simulator protocol") {
  const VectorXd p = point(0.1, 1e12, 0.2, 2e12, 3e17);
  CommandSpec spec{stub() + " echo {request} {response}", std::chrono::seconds(10), 1};

  SUBCASE("fixed responses round-trip exactly") {
    const auto r = external_evaluate(p, spec);
    REQUIRE(r);
    CHECK(*r == DeviceResponses{1.2345e-4, 6.5e-15, 7.25e-6});
  }
  SUBCASE("implicit response path") {
    spec.command_template = stub() + " echo {request}";
    CHECK(external_evaluate(p, spec) == DeviceResponses{1.2345e-4, 6.5e-15, 7.25e-6});
  }
  SUBCASE("request content reaches the simulator") {
    spec.command_template = stub() + " copy {request} {response}";
    CHECK(external_evaluate(p, spec) == DeviceResponses{1, 1, 1});
  }
  SUBCASE("nonzero exit fails") {
    spec.command_template = stub() + " fail {request} {response}";
    CHECK_FALSE(external_evaluate(p, spec));
  }
  SUBCASE("unparseable or unphysical output fails") {
    spec.command_template = stub() + " garbage {request} {response}";
    CHECK_FALSE(external_evaluate(p, spec));
    spec.command_template = stub() + " negative {request} {response}";
    CHECK_FALSE(external_evaluate(p, spec));
  }
  SUBCASE("missing executable fails") {
    spec.command_template = "/nonexistent/simulator {request}";
    CHECK_FALSE(external_evaluate(p, spec));
  }
  SUBCASE("timeout fails promptly") {
    spec.command_template = stub() + " hang {request} {response}";
    spec.timeout = std::chrono::milliseconds(300);
    const auto t0 = std::chrono::steady_clock::now();
    CHECK_FALSE(external_evaluate(p, spec));
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(10));
  }
}

TEST_CASE("timeout env override") {
  ::setenv("SOPSO_SIM_TIMEOUT", "2.5", 1);
  CHECK(CommandSpec{"x {request}"}.with_env_overrides().timeout == std::chrono::milliseconds(2500));
  ::setenv("SOPSO_SIM_TIMEOUT", "junk", 1);
  CHECK(CommandSpec{"x {request}"}.with_env_overrides().timeout == std::chrono::milliseconds(300'000));
  ::unsetenv("SOPSO_SIM_TIMEOUT");
}

TEST_CASE("external simulator configuration checks") {
  CHECK_THROWS_AS(ExternalSimulator(CommandSpec{"sim --no-placeholder"}), std::invalid_argument);
  CHECK_THROWS_AS(ExternalSimulator(CommandSpec{"sim {request}", std::chrono::milliseconds(0)}), std::invalid_argument);
  CHECK_THROWS_AS(ExternalSimulator(CommandSpec{"sim {request}", std::chrono::seconds(1), 0}), std::invalid_argument);
}

TEST_CASE("a run over a hanging simulator completes with failed evaluations") {
  auto sim = std::make_shared<ExternalSimulator>(
      CommandSpec{stub() + " hang {request} {response}", std::chrono::milliseconds(50), 4});
  const auto problem = device_problem(sim);
  PsoParams<double> params{.n_particles = 2, .max_gen = 1};
  const auto trace = run<double>(problem, params, 1);
  CHECK(is_failed(trace.final_best()));
  CHECK(trace.records.back().evaluations == 4);
}

TEST_CASE("device problem through the surrogate") {
  auto counter = std::make_shared<CountingAdapter>(std::make_shared<SurrogateSimulator>());
  const auto problem = device_problem(counter);
  CHECK(problem.boundary == BoundaryPolicy::clamp);

  PsoParams<double> params{.n_particles = 10, .max_gen = 99};
  const auto trace = run_self_organizing(problem, params, 3);
  CHECK(counter->calls() == 1000);
  CHECK(trace.records.back().evaluations == 1000);
  CHECK(counter->out_of_bounds() == 0);
  CHECK(is_feasible(trace.final_best()));
  CHECK(-trace.final_best().f_obj <= kSurrogateIonOpt * (1 + 1e-12));
}

TEST_CASE("points outside the box are clamped before the simulator sees them") {
  auto counter = std::make_shared<CountingAdapter>(std::make_shared<SurrogateSimulator>());
  const auto problem = device_problem(counter);
  problem.fitness(point(1.0, -5.0, 0.1, 1e14, 1e20));
  CHECK(counter->calls() == 1);
  CHECK(counter->out_of_bounds() == 0);
}

TEST_CASE("10% injected failures never abort a run or break monotone bests") {
  auto flaky = std::make_shared<FailureInjector>(std::make_shared<SurrogateSimulator>(), 0.1, 77);
  auto counter = std::make_shared<CountingAdapter>(flaky);
  const auto problem = device_problem(counter);
  std::size_t failures = 0;
  const auto space = device_space();
  Rng rng(2);
  for (int k = 0; k < 2000; ++k)
    failures += is_failed(problem.fitness(uniform_in<double>(space.lower, space.upper, rng)));
  CHECK(failures > 120);
  CHECK(failures < 280);

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto trace = run_self_organizing(problem, PsoParams<double>{.n_particles = 10, .max_gen = 99}, seed);
    REQUIRE(trace.records.size() == 100);
    for (std::size_t t = 1; t < trace.records.size(); ++t)
      REQUIRE(compare(trace.records[t].best, trace.records[t - 1].best) != Ordering::worse);
    CHECK(is_feasible(trace.final_best()));
  }
}

TEST_CASE("f_delta") {
  RunTrace<double> trace;
  trace.records = {{0, {-1e-4, 2.0}, 10, 0}, {1, {-8e-5, 0.0}, 20, 0}, {2, {-8.25e-5, 0.0}, 30, 0}};
  const auto fd = f_delta(trace);
  REQUIRE(fd.size() == 3);
  CHECK_FALSE(fd[0]);
  CHECK(*fd[1] == doctest::Approx(2.5e-6).epsilon(1e-9));
  CHECK(*fd[2] == 0.0);

  RunTrace<double> infeasible;
  infeasible.records = {{0, {-1e-4, 2.0}, 10, 0}, {1, failed(), 20, 0}};
  for (const auto& v : f_delta(infeasible)) CHECK_FALSE(v);
}
