#pragma once

#include "sopso/swarm.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

/// Double-implant focused-ion-beam MOSFET design problem: five channel
/// implant parameters, maximize drive current under leakage and output
/// conductance limits.
namespace sopso::device {

enum Param : Eigen::Index { X1 = 0, Dose1, X2, Dose2, Nsub, kParamCount };

inline constexpr std::array<std::string_view, kParamCount> kParamNames = {"X1", "Dose1", "X2", "Dose2",
                                                                          "Nsub"};

/// Lower/upper bounds (um, cm^-2, um, cm^-2, cm^-3) and process deviations.
inline constexpr std::array<double, kParamCount> kLower = {0.0, 1e10, 0.0, 1e10, 1e15};
inline constexpr std::array<double, kParamCount> kUpper = {0.25, 1e13, 0.25, 1e13, 1e18};
inline constexpr std::array<double, kParamCount> kSigma = {2.5e-4, 1e10, 2.5e-4, 1e10, 1e15};

inline constexpr double kIoffLimit = 1e-14;  // A/um
inline constexpr double kGoutLimit = 8e-6;   // 1/Ohm

/// Constrained optimum of the built-in surrogate: the barrier sits at
/// b* = 0.75 where g_out binds, giving i_on* = 1.5e-4 * (1 - 0.6 * 0.75).
inline constexpr double kSurrogateBarrierOpt = 0.75;
inline constexpr double kSurrogateIonOpt = 8.25e-5;

struct DeviceResponses {
  double i_on = 0;   // A/um
  double i_off = 0;  // A/um
  double g_out = 0;  // 1/Ohm

  bool operator==(const DeviceResponses&) const = default;
};

SearchSpace<double> device_space();
VectorXd device_sigma();

/// Clamps a point into the design box.
VectorXd clamp_to_space(const VectorXd& point);

/// Evaluates one device design. Implementations must be total: any simulator
/// fault comes back as std::nullopt rather than an exception.
class SimulatorAdapter {
 public:
  virtual ~SimulatorAdapter() = default;
  virtual std::optional<DeviceResponses> evaluate(const VectorXd& point) = 0;
  /// Throws std::invalid_argument if the adapter cannot possibly work.
  virtual void check() const {}
};

// -- surrogate ---------------------------------------------------------------

/// Smooth "channel barrier" in [0, 1]: dose and substrate terms plus a
/// Gaussian bump around (z(X1), z(X2)) = (0.3, 0.6).
double surrogate_barrier(const VectorXd& point);

/// i_on = 1.5e-4 (1 - 0.6 b), i_off = 1e-10 * 10^(-6 b), g_out = 2e-5 (1 - 0.8 b).
DeviceResponses surrogate_responses(double barrier);
DeviceResponses surrogate_evaluate(const VectorXd& point);

class SurrogateSimulator final : public SimulatorAdapter {
 public:
  std::optional<DeviceResponses> evaluate(const VectorXd& point) override { return surrogate_evaluate(point); }
};

// -- external process --------------------------------------------------------

/// Request file: one `name=value` line per parameter (X1, Dose1, X2, Dose2, Nsub).
std::string format_request(const VectorXd& point);
std::optional<VectorXd> parse_request(std::string_view text);

/// Response file: `Ion=`, `Ioff=`, `Gout=` lines. Any missing, non-finite or
/// non-positive value makes the response a failure.
std::string format_response(const DeviceResponses& r);
std::optional<DeviceResponses> parse_response(std::string_view text);

struct CommandSpec {
  /// Run through /bin/sh -c. `{request}` and `{response}` are replaced by the
  /// file paths; without `{response}` the simulator must write
  /// `<request path>.out`.
  std::string command_template;
  std::chrono::milliseconds timeout{300'000};
  unsigned max_concurrent = 1;

  /// Applies the SOPSO_SIM_TIMEOUT (seconds) environment override, if set.
  CommandSpec with_env_overrides() const;
};

/// Writes the request, runs the command under a wall-clock timeout and reads
/// the response. Nonzero exit, timeout or parse failure -> std::nullopt.
std::optional<DeviceResponses> external_evaluate(const VectorXd& point, const CommandSpec& spec);

class ExternalSimulator final : public SimulatorAdapter {
 public:
  explicit ExternalSimulator(CommandSpec spec);

  std::optional<DeviceResponses> evaluate(const VectorXd& point) override;
  void check() const override;

 private:
  CommandSpec spec_;
  std::mutex mutex_;
  std::condition_variable slot_freed_;
  unsigned running_ = 0;
};

// -- wrappers ----------------------------------------------------------------

/// Fails a deterministic pseudo-random fraction of calls, keyed on the
/// point's bits so repeated runs fail on the same designs.
class FailureInjector final : public SimulatorAdapter {
 public:
  FailureInjector(std::shared_ptr<SimulatorAdapter> inner, double rate, std::uint64_t seed)
      : inner_(std::move(inner)), rate_(rate), seed_(seed) {}

  std::optional<DeviceResponses> evaluate(const VectorXd& point) override;

 private:
  std::shared_ptr<SimulatorAdapter> inner_;
  double rate_;
  std::uint64_t seed_;
};

/// Counts every call, including failures, and checks the clamping contract.
class CountingAdapter final : public SimulatorAdapter {
 public:
  explicit CountingAdapter(std::shared_ptr<SimulatorAdapter> inner) : inner_(std::move(inner)) {}

  std::optional<DeviceResponses> evaluate(const VectorXd& point) override;

  std::size_t calls() const noexcept { return calls_.load(); }
  std::size_t out_of_bounds() const noexcept { return out_of_bounds_.load(); }

 private:
  std::shared_ptr<SimulatorAdapter> inner_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> out_of_bounds_{0};
};

// -- problem -----------------------------------------------------------------

/// Responses handed to the fitness layer: {-i_on, i_off, g_out}.
std::vector<double> fitness_responses(const DeviceResponses& r);
std::vector<ResponseSpec> device_specs();

/// MIN -i_on, i_off <= 1e-14, g_out <= 8e-6; positions clamped to the box.
Problem<double> device_problem(std::shared_ptr<SimulatorAdapter> adapter);

/// |f_opt - best i_on| per generation, nullopt while the best is infeasible.
std::vector<std::optional<double>> f_delta(const RunTrace<double>& trace, double f_opt_ion = kSurrogateIonOpt);

}  // namespace sopso::device
