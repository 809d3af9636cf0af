#pragma once

// Lab-frame, rotating-frame, secular and conventional two-spin Hamiltonians.
//
// Frequencies are angular (rad/s), times in seconds, hbar = 1.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "homonmr/spinops.hpp"

namespace homonmr {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383279;

/// Static description of a two-spin molecule.
class SpinSystem {
 public:
  /// |delta omega| / J above which the secular approximation is flagged ok.
  static constexpr double kSecularRatio = 50.0;

  SpinSystem(std::vector<double> larmor, double coupling, double t2, double t1);

  /// Reference frequency omega_{0,1} plus offset delta = omega_{0,2} - omega_{0,1}.
  static SpinSystem from_offset(double reference, double delta, double coupling,
                                double t2, double t1);

  /// Two protons of cytosine in D2O at ~500 MHz: J/2pi = 7.1 Hz,
  /// delta/2pi = 765.0 Hz, T2 = 1 s, T1 = 7 s.
  static SpinSystem cytosine();

  /// Cytosine offsets and coupling on a 20 kHz carrier, small enough for
  /// lab-frame integration.
  static SpinSystem scaled_validation();

  int spin_count() const { return static_cast<int>(larmor_.size()); }
  const std::vector<double>& larmor() const { return larmor_; }
  double larmor(int spin) const { return larmor_.at(static_cast<size_t>(spin)); }
  double coupling() const { return coupling_; }
  double t2() const { return t2_; }
  double t1() const { return t1_; }

  double delta_omega() const { return larmor_[1] - larmor_[0]; }
  double g() const { return larmor_[1] / larmor_[0]; }
  bool secular_ok() const { return secular_ok_; }

  /// pi / J, the free-evolution time that produces the c-phase gate.
  double t_j() const;

 private:
  std::vector<double> larmor_;
  double coupling_;
  double t2_;
  double t1_;
  bool secular_ok_;
};

/// Nonnegative rf amplitude omega_1(t).
class Envelope {
 public:
  enum class Shape { Constant, Rectangular, Gaussian };

  static Envelope constant(double amplitude);
  static Envelope rectangular(double amplitude, double start, double width);
  /// Gaussian truncated to [start, start + width], sigma = width / 6.
  static Envelope gaussian(double peak, double start, double width);

  double operator()(double t) const;

  Shape shape() const { return shape_; }
  double peak() const { return peak_; }
  double start() const { return start_; }
  double width() const { return width_; }

 private:
  Envelope(Shape shape, double peak, double start, double width);

  Shape shape_;
  double peak_;
  double start_;
  double width_;
};

/// One rf channel: carrier omega_rf, envelope omega_1(t), phase phi, and the
/// spin it is meant to address.
struct RfChannel {
  double carrier;
  Envelope amplitude;
  double phase;
  int target;

  void validate(const SpinSystem& sys) const;
};

/// Per-spin rotation angular velocities of a rotating frame.
struct FrameSpec {
  std::vector<double> omega_rot;

  static FrameSpec lab(int n_spins = 2);
  static FrameSpec co_rotating(const SpinSystem& sys);
  /// Both spins rotate at omega_{0,1}.
  static FrameSpec common(const SpinSystem& sys);

  void validate() const;
};

enum class ModelVariant {
  LabExact,
  RotatingExact,
  RotatingSecularHetero,
  RotatingSecularHomo,
  ConventionalOffset,
  CommonRotatingExact,
  ConventionalLab,
};

/// Selects the physics used to evaluate a pulse sequence.
///
/// The two conventional variants are only reachable through the
/// `falsification_*` constructors; they reproduce Hamiltonians found in the
/// literature so that their predictions can be compared against the
/// per-spin rotating-frame result.
class HamiltonianModel {
 public:
  enum class Frame { Lab, CoRotating, Common };

  static HamiltonianModel lab_exact();
  static HamiltonianModel rotating_exact();
  static HamiltonianModel rotating_secular_hetero();
  static HamiltonianModel rotating_secular_homo();
  static HamiltonianModel common_rotating_exact();
  static HamiltonianModel falsification_conventional_offset();
  static HamiltonianModel falsification_conventional_lab();

  /// Accepts the names printed by `name()`.
  static HamiltonianModel from_name(std::string_view name);

  ModelVariant variant() const { return variant_; }
  Frame frame_kind() const { return frame_; }
  FrameSpec frame(const SpinSystem& sys) const;
  std::string_view name() const;

  bool is_lab() const { return frame_ == Frame::Lab; }
  bool is_conventional() const;

  friend bool operator==(const HamiltonianModel&, const HamiltonianModel&) = default;

 private:
  HamiltonianModel(ModelVariant variant, Frame frame)
      : variant_(variant), frame_(frame) {}

  ModelVariant variant_;
  Frame frame_;
};

/// Time-dependent Hermitian operator with the fastest angular frequency it
/// contains. Static operators report max_frequency 0 and is_static true.
class TimeOperator {
 public:
  using Fn = std::function<ComplexMatrix(double)>;

  TimeOperator(Fn fn, double max_frequency, bool is_static);
  static TimeOperator constant(ComplexMatrix h);

  ComplexMatrix operator()(double t) const { return fn_(t); }
  double max_frequency() const { return max_frequency_; }
  bool is_static() const { return is_static_; }

 private:
  Fn fn_;
  double max_frequency_;
  bool is_static_;
};

/// H = -w01 Iz(x)I - w02 I(x)Iz + J sum_k Ik(x)Ik + sum_i H_rf,i(t).
ComplexMatrix h_lab(const SpinSystem& sys, const std::vector<RfChannel>& channels,
                    double t);
TimeOperator lab_operator(const SpinSystem& sys, std::vector<RfChannel> channels);

/// H~(t) = U H U^dagger - i U dU^dagger/dt with
/// U = exp(-i w_rot,1 Iz t) (x) exp(-i w_rot,2 Iz t).
TimeOperator to_rotating(TimeOperator lab, const FrameSpec& frame);

/// Exact transformed system Hamiltonian in an arbitrary rotating frame:
/// residual Zeeman terms, J Iz(x)Iz and the (J/2) e^{+-i dw_rot t} flip-flop block.
ComplexMatrix h_rotating_system(const SpinSystem& sys, const FrameSpec& frame,
                                double t);

/// Rotating-frame control term of one channel with the sum-frequency
/// components dropped. Every spin k is driven with strength
/// omega_1 * (w0k / w0target) and phase phi - (w_rf - w_rot,k) t.
ComplexMatrix h_rotating_control(const SpinSystem& sys, const RfChannel& channel,
                                 const FrameSpec& frame, double t);

/// J Iz(x)Iz.
ComplexMatrix h_secular_system(const SpinSystem& sys);

/// Resonant homonucleus control term including the dw0-oscillating drive of
/// the other spin. Throws if the carrier is off the target's resonance.
ComplexMatrix h_control_homo(const SpinSystem& sys, const RfChannel& channel,
                             double t);

/// Resonant heteronucleus control term: only the target spin is driven.
ComplexMatrix h_control_hetero(const SpinSystem& sys, const RfChannel& channel,
                               double t);

/// Common-rotating-frame system Hamiltonian (frame at w01 for both spins):
/// -dw0 I(x)Iz + J Iz(x)Iz + constant (J/2) flip-flop block.
ComplexMatrix h_common_rotating_system(const SpinSystem& sys);

/// -dw0 I(x)Iz + J Iz(x)Iz, the conventional rotating-frame Hamiltonian.
/// Only used for falsification runs.
ComplexMatrix h_conventional(const SpinSystem& sys);

/// -w01 Iz(x)I - w02 I(x)Iz + J Iz(x)Iz, the conventional lab Hamiltonian.
ComplexMatrix h_conventional_lab(const SpinSystem& sys);

/// Full Hamiltonian of `model` for the given channels.
TimeOperator model_operator(const HamiltonianModel& model, const SpinSystem& sys,
                            std::vector<RfChannel> channels);

/// Time average of `op` over [t0, t0 + window] by composite Simpson
/// quadrature with `intervals` (even) subintervals.
ComplexMatrix time_average(const TimeOperator& op, double t0, double window,
                           int intervals);

}  // namespace homonmr
