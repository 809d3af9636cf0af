#pragma once

// Command implementations behind the `homonmr` tool. Every command turns a
// RunConfig into a Report; rendering to csv/json is deterministic.

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "homonmr/hamiltonian.hpp"

namespace homonmr::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kValidationFailure = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { Csv, Json, Text };
Format format_from_name(std::string_view name);

struct Sweep {
  std::string parameter;
  double start;
  double stop;
  int count;
};

/// Flat `key = value` configuration. Recognised keys:
///   preset (cytosine | scaled), reference_hz, delta_hz, larmor1_hz,
///   larmor2_hz, j_hz, t2, t1, model, out, format, jobs,
///   sweep.parameter, sweep.start, sweep.stop, sweep.count,
/// plus command parameters (f, t_j, tau, tau2, compensate, kind, t_start,
/// t_stop, points, readout_duration, readout_dt, sequence).
/// Time values accept an s/ms/us suffix and default to seconds.
struct RunConfig {
  SpinSystem system = SpinSystem::cytosine();
  HamiltonianModel model = HamiltonianModel::rotating_secular_homo();
  std::optional<Sweep> sweep;
  std::string out;
  Format format = Format::Csv;
  int jobs = 1;
  std::map<std::string, std::string> params;

  bool has(const std::string& key) const { return params.count(key) != 0; }
  std::string text(const std::string& key, const std::string& fallback) const;
  double seconds(const std::string& key, double fallback) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  bool flag(const std::string& key, bool fallback) const;
};

/// Parses config text into key/value pairs ('#' comments, blank lines ok).
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// Builds a RunConfig from key/values; `overrides` win over `base`.
/// `default_preset` applies when neither names a preset.
RunConfig make_config(const std::map<std::string, std::string>& base,
                      const std::map<std::string, std::string>& overrides,
                      std::string_view default_preset = "cytosine");

using Cell = std::variant<double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Report {
  std::string command;
  std::vector<Table> tables;
  /// Free text for Format::Text commands (parse, translate).
  std::string text;
  bool ok = true;
  std::string message;
};

std::string format_double(double v);
std::string render_csv(const Table& t);
std::string render_json(const Report& r);

/// Writes the report. csv: first table to `out`, the others to
/// `<stem>.<table>.csv`; json: one document. Empty `out` means stdout.
void write_report(const Report& r, const std::string& out, Format format);

Report cmd_dj(const RunConfig& cfg);
Report cmd_pps(const RunConfig& cfg);
Report cmd_distance(const RunConfig& cfg);
Report cmd_validate_rwa(const RunConfig& cfg);
Report cmd_parse(const RunConfig& cfg, std::string_view source);
Report cmd_translate(const RunConfig& cfg, std::string_view source);

/// Applies fn to 0..count-1 on up to `jobs` threads; results keep index order.
template <typename Fn>
auto parallel_map(int count, int jobs, Fn fn) -> std::vector<decltype(fn(0))> {
  using T = decltype(fn(0));
  std::vector<std::optional<T>> slots(static_cast<size_t>(count));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        slots[static_cast<size_t>(i)].emplace(fn(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min(jobs, count));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  std::vector<T> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace homonmr::cli
