#include "sopso/device.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

namespace sopso::device {

namespace fs = std::filesystem;

SearchSpace<double> device_space() {
  return {Eigen::Map<const VectorXd>(kLower.data(), kParamCount),
          Eigen::Map<const VectorXd>(kUpper.data(), kParamCount)};
}

VectorXd device_sigma() { return Eigen::Map<const VectorXd>(kSigma.data(), kParamCount); }

VectorXd clamp_to_space(const VectorXd& point) {
  return point.cwiseMax(Eigen::Map<const VectorXd>(kLower.data(), kParamCount))
      .cwiseMin(Eigen::Map<const VectorXd>(kUpper.data(), kParamCount));
}

// ---------------------------------------------------------------------------
// Surrogate
// ---------------------------------------------------------------------------

double surrogate_barrier(const VectorXd& point) {
  auto z = [&](Param k) { return (point[k] - kLower[k]) / (kUpper[k] - kLower[k]); };
  const double dx1 = z(X1) - 0.3;
  const double dx2 = z(X2) - 0.6;
  return 0.25 * z(Dose1) + 0.25 * z(Dose2) + 0.3 * z(Nsub) + 0.2 * std::exp(-(dx1 * dx1 + dx2 * dx2) / 0.08);
}

DeviceResponses surrogate_responses(double b) {
  return {1.5e-4 * (1.0 - 0.6 * b), 1e-10 * std::pow(10.0, -6.0 * b), 2e-5 * (1.0 - 0.8 * b)};
}

DeviceResponses surrogate_evaluate(const VectorXd& point) { return surrogate_responses(surrogate_barrier(point)); }

// ---------------------------------------------------------------------------
// File protocol
// ---------------------------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

/// key=value lines; blank lines and '#' comments ignored. Fails on junk.
std::optional<std::map<std::string, double, std::less<>>> parse_pairs(std::string_view text) {
  std::map<std::string, double, std::less<>> out;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view val = trim(line.substr(eq + 1));
    double v = 0;
    const auto res = std::from_chars(val.data(), val.data() + val.size(), v);
    if (res.ec != std::errc{} || res.ptr != val.data() + val.size()) return std::nullopt;
    out[std::string(key)] = v;
  }
  return out;
}

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
    s.replace(pos, from.size(), to);
}

/// Single-quoted for /bin/sh.
std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

fs::path unique_work_dir() {
  static std::atomic<std::uint64_t> counter{0};
  const auto dir = fs::temp_directory_path() /
                   ("sopso-sim-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
  fs::create_directories(dir);
  return dir;
}

enum class ChildStatus { ok, failed, timed_out };

ChildStatus run_with_timeout(const std::string& command, std::chrono::milliseconds timeout) {
  const pid_t pid = ::fork();
  if (pid < 0) return ChildStatus::failed;
  if (pid == 0) {
    ::setpgid(0, 0);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    std::_Exit(127);
  }
  ::setpgid(pid, pid);

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  auto poll = std::chrono::milliseconds(1);
  for (;;) {
    int status = 0;
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) return WIFEXITED(status) && WEXITSTATUS(status) == 0 ? ChildStatus::ok : ChildStatus::failed;
    if (r < 0 && errno != EINTR) return ChildStatus::failed;
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      return ChildStatus::timed_out;
    }
    std::this_thread::sleep_for(poll);
    poll = std::min(poll * 2, std::chrono::milliseconds(50));
  }
}

}  // namespace

std::string format_request(const VectorXd& point) {
  std::string out;
  for (Eigen::Index k = 0; k < kParamCount; ++k)
    out += std::string(kParamNames[k]) + "=" + format_double(point[k]) + "\n";
  return out;
}

std::optional<VectorXd> parse_request(std::string_view text) {
  const auto pairs = parse_pairs(text);
  if (!pairs) return std::nullopt;
  VectorXd point(kParamCount);
  for (Eigen::Index k = 0; k < kParamCount; ++k) {
    const auto it = pairs->find(kParamNames[k]);
    if (it == pairs->end()) return std::nullopt;
    point[k] = it->second;
  }
  return point;
}

std::string format_response(const DeviceResponses& r) {
  return "Ion=" + format_double(r.i_on) + "\nIoff=" + format_double(r.i_off) + "\nGout=" + format_double(r.g_out) +
         "\n";
}

std::optional<DeviceResponses> parse_response(std::string_view text) {
  const auto pairs = parse_pairs(text);
  if (!pairs) return std::nullopt;
  auto get = [&](std::string_view key) -> std::optional<double> {
    const auto it = pairs->find(key);
    if (it == pairs->end() || !std::isfinite(it->second) || !(it->second > 0)) return std::nullopt;
    return it->second;
  };
  const auto on = get("Ion"), off = get("Ioff"), gout = get("Gout");
  if (!on || !off || !gout) return std::nullopt;
  return DeviceResponses{*on, *off, *gout};
}

CommandSpec CommandSpec::with_env_overrides() const {
  CommandSpec out = *this;
  if (const char* env = std::getenv("SOPSO_SIM_TIMEOUT")) {
    double seconds = 0;
    const std::string_view sv(env);
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), seconds);
    if (res.ec == std::errc{} && seconds > 0)
      out.timeout = std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
  }
  return out;
}

std::optional<DeviceResponses> external_evaluate(const VectorXd& point, const CommandSpec& spec) {
  try {
    const fs::path dir = unique_work_dir();
    const fs::path request = dir / "request.txt";
    const bool explicit_response = spec.command_template.find("{response}") != std::string::npos;
    const fs::path response = explicit_response ? dir / "response.txt" : fs::path(request.string() + ".out");
    {
      std::ofstream out(request);
      out << format_request(point);
      if (!out) return std::nullopt;
    }
    std::string command = spec.command_template;
    replace_all(command, "{request}", shell_quote(request.string()));
    replace_all(command, "{response}", shell_quote(response.string()));

    std::optional<DeviceResponses> result;
    if (run_with_timeout(command, spec.timeout) == ChildStatus::ok)
      if (const auto text = read_file(response)) result = parse_response(*text);

    std::error_code ec;
    fs::remove_all(dir, ec);
    return result;
  } catch (...) {
    return std::nullopt;
  }
}

ExternalSimulator::ExternalSimulator(CommandSpec spec) : spec_(std::move(spec)) { check(); }

void ExternalSimulator::check() const {
  if (spec_.command_template.find("{request}") == std::string::npos)
    throw std::invalid_argument("simulator command must contain the {request} placeholder");
  if (spec_.timeout.count() <= 0) throw std::invalid_argument("simulator timeout must be positive");
  if (spec_.max_concurrent < 1) throw std::invalid_argument("simulator needs at least one process slot");
}

std::optional<DeviceResponses> ExternalSimulator::evaluate(const VectorXd& point) {
  {
    std::unique_lock lock(mutex_);
    slot_freed_.wait(lock, [&] { return running_ < spec_.max_concurrent; });
    ++running_;
  }
  auto result = external_evaluate(point, spec_);
  {
    std::lock_guard lock(mutex_);
    --running_;
  }
  slot_freed_.notify_one();
  return result;
}

// ---------------------------------------------------------------------------
// Wrappers
// ---------------------------------------------------------------------------

std::optional<DeviceResponses> FailureInjector::evaluate(const VectorXd& point) {
  std::uint64_t h = seed_;
  for (Eigen::Index k = 0; k < point.size(); ++k) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &point[k], sizeof bits);
    h = derive_seed(h, bits);
  }
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  if (u < rate_) return std::nullopt;
  return inner_->evaluate(point);
}

std::optional<DeviceResponses> CountingAdapter::evaluate(const VectorXd& point) {
  ++calls_;
  for (Eigen::Index k = 0; k < point.size(); ++k)
    if (point[k] < kLower[k] || point[k] > kUpper[k]) {
      ++out_of_bounds_;
      break;
    }
  return inner_->evaluate(point);
}

// ---------------------------------------------------------------------------
// Problem
// ---------------------------------------------------------------------------

std::vector<double> fitness_responses(const DeviceResponses& r) { return {-r.i_on, r.i_off, r.g_out}; }

std::vector<ResponseSpec> device_specs() {
  return {ResponseSpec::minimize("-Ion"), ResponseSpec::at_most("Ioff", kIoffLimit),
          ResponseSpec::at_most("Gout", kGoutLimit)};
}

Problem<double> device_problem(std::shared_ptr<SimulatorAdapter> adapter) {
  if (!adapter) throw std::invalid_argument("device_problem: null adapter");
  adapter->check();
  return make_problem<double>(
      "fibmos", device_space(), device_sigma(), device_specs(),
      [adapter](const VectorXd& x) -> std::optional<std::vector<double>> {
        std::optional<DeviceResponses> r;
        try {
          r = adapter->evaluate(clamp_to_space(x));
        } catch (...) {
          return std::nullopt;
        }
        if (!r) return std::nullopt;
        return fitness_responses(*r);
      },
      BoundaryPolicy::clamp);
}

std::vector<std::optional<double>> f_delta(const RunTrace<double>& trace, double f_opt_ion) {
  std::vector<std::optional<double>> out;
  out.reserve(trace.records.size());
  for (const auto& rec : trace.records) {
    if (is_feasible(rec.best) && std::isfinite(rec.best.f_obj))
      out.emplace_back(std::abs(f_opt_ion - (-rec.best.f_obj)));
    else
      out.emplace_back(std::nullopt);
  }
  return out;
}

}  // namespace sopso::device
