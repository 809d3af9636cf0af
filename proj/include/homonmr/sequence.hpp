#pragma once

// Pulse-sequence IR, text grammar, hard-to-soft translation and the
// Deutsch-Jozsa / pseudo-pure builders.
//
// Grammar (one column per line, '#' starts a comment):
//   line    := track ':' item (';' track ':' item)*
//   track   := 's1' | 's2' | 'both' | 'readout'
//   item    := 'pi' ['/' int] axis ['width' number [unit]] ['carrier' number 'rad/s']
//            | 'delay' dur | 'fg' | 'nop'
//   axis    := 'x' | 'y' | '-x' | '-y'
//   dur     := number unit | '1/' int 'J'
//   unit    := 's' | 'ms' | 'us'        (pulse widths default to ms)

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "homonmr/hamiltonian.hpp"

namespace homonmr {

enum class PulseAxis { X, Y, MinusX, MinusY };

/// Rotation-axis phase: x = 0, y = pi/2, -x = pi, -y = 3 pi/2.
double axis_phase(PulseAxis axis);
std::string_view axis_token(PulseAxis axis);

struct Nop {
  friend bool operator==(const Nop&, const Nop&) = default;
};

/// Flip angle pi / divisor about `axis`. Without a width the pulse is hard.
struct Pulse {
  int divisor = 1;
  PulseAxis axis = PulseAxis::X;
  std::optional<double> width;
  std::optional<double> carrier;

  double flip() const { return kPi / divisor; }
  bool is_soft() const { return width.has_value(); }
  friend bool operator==(const Pulse&, const Pulse&) = default;
};

/// Either a literal duration in seconds or the symbolic interval 2 pi / (n J).
struct Delay {
  std::optional<double> seconds;
  int j_divisor = 0;

  static Delay literal(double seconds);
  static Delay per_j(int n);

  bool is_symbolic() const { return !seconds.has_value(); }
  std::string label() const;
  friend bool operator==(const Delay&, const Delay&) = default;
};

struct Gradient {
  int n_slices = 32;
  friend bool operator==(const Gradient&, const Gradient&) = default;
};

using Item = std::variant<Nop, Pulse, Delay, Gradient>;

/// One column of the two-track table. A `joint` column carries a single item
/// applied to both spins at once (a nonselective pulse, a delay or a gradient).
struct Column {
  bool joint = false;
  Item both = Nop{};
  Item s1 = Nop{};
  Item s2 = Nop{};

  const Item& track(int spin) const;
  friend bool operator==(const Column&, const Column&) = default;
};

struct Sequence {
  std::vector<Column> columns;
  std::optional<PulseAxis> readout;
  std::string name;
  std::string source;

  /// IR equality; name and source text are metadata.
  friend bool operator==(const Sequence& a, const Sequence& b) {
    return a.columns == b.columns && a.readout == b.readout;
  }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

Sequence parse_sequence(std::string_view text);
std::string print_sequence(const Sequence& seq);

/// "<number> <unit>" or "<number><unit>" in s, ms or us; used for config
/// values and command-line arguments too.
double parse_duration(std::string_view text);

/// Delay length in seconds. Symbolic delays resolve to 2 pi / (n J), or to
/// (2 / n) * t_j when a J-time override is given.
double resolve_delay(const Delay& d, const SpinSystem& sys,
                     std::optional<double> t_j = std::nullopt);

/// Duration of a column: the longest delay or soft-pulse width it holds.
double column_duration(const Column& col, const SpinSystem& sys,
                       std::optional<double> t_j = std::nullopt);
double total_duration(const Sequence& seq, const SpinSystem& sys,
                      std::optional<double> t_j = std::nullopt);

/// Gaussian soft pulse truncated at +-3 sigma with sigma = width / 6 and peak
/// chosen so that the area under the envelope is `flip`.
struct GaussianEnvelope {
  double width;
  double peak;

  static GaussianEnvelope calibrated(double flip, double width);
  double sigma() const { return width / 6.0; }
  double operator()(double u) const;
  /// Area by composite Simpson with `intervals` subintervals.
  double integrate(int intervals = 2000) const;
};

struct SoftWindow {
  double lower;  // 2 pi / |dw0|
  double upper;  // (2 pi / J) / 10
};
SoftWindow soft_window(const SpinSystem& sys);

/// Every selective hard pulse on spin k becomes a Gaussian pulse of width
/// taus[k] with carrier omega_{0,k}. Nonselective (joint) pulses stay hard.
/// Throws std::invalid_argument naming the violated bound.
Sequence translate_hard_to_soft(const Sequence& seq, double tau, const SpinSystem& sys);
Sequence translate_hard_to_soft(const Sequence& seq, double tau1, double tau2,
                                const SpinSystem& sys);

enum class DjFunction { F1 = 1, F2, F3, F4 };
DjFunction dj_function_from_name(std::string_view name);

/// Deutsch-Jozsa sequence for f, with the spin-1 x readout attached.
Sequence build_dj(DjFunction f);

/// Pseudo-pure preparation. With `compensate` the 1/2J delay becomes
/// 1/4J, joint pi_x, 1/4J, joint pi_x.
Sequence build_pps(bool compensate = false);

}  // namespace homonmr
