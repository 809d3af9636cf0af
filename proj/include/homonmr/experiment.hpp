#pragma once

// Sequence execution, FID readout, spectra and the DJ / pseudo-pure
// experiments built on top of them.

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "homonmr/hamiltonian.hpp"
#include "homonmr/propagate.hpp"
#include "homonmr/sequence.hpp"
#include "homonmr/spinops.hpp"

namespace homonmr {

/// Deviation matrix Iz(x)I + g I(x)Iz.
DensityState thermal_state(const SpinSystem& sys);

/// Deviation form of the pseudo-pure target |00><00| - 1/4.
DensityState pseudo_pure_target();

struct RunOptions {
  /// Replaces 2 pi / (n J) by (2 / n) t_j for symbolic delays.
  std::optional<double> t_j;
  /// Integration step; default_step() when empty.
  std::optional<double> step;
  /// Width of the rectangular pulse used for hard pulses under lab models.
  double lab_hard_width = 10e-6;
  double t0 = 0.0;
};

/// Executes `seq` column by column from absolute time opts.t0. The returned
/// state lives in the model's own frame at the end time.
DensityState run_sequence(const DensityState& state, const Sequence& seq,
                          const HamiltonianModel& model, const SpinSystem& sys,
                          const RunOptions& opts = {});

/// Propagator of a gradient-free sequence.
UnitaryOp sequence_propagator(const Sequence& seq, const HamiltonianModel& model,
                              const SpinSystem& sys, const RunOptions& opts = {});

/// rho -> V rho V^dagger with V = prod_k exp(-i (w_to,k - w_from,k) Iz_k t).
DensityState change_frame(const DensityState& state, const FrameSpec& from,
                          const FrameSpec& to, double t);

/// State expressed in the per-spin co-rotating frame.
DensityState to_co_rotating(const DensityState& state, const HamiltonianModel& model,
                            const SpinSystem& sys, double t);

struct FidTrace {
  std::vector<Complex> samples;
  double dt;
  double reference;  // receiver frame, rad/s
};

struct ReadoutOptions {
  double duration = 5.0;
  double dt = 2.5e-4;
  PulseAxis axis = PulseAxis::X;
};

/// Reading pulse pi/2 on spin 1, move from the co-rotating frame to the
/// receiver frame at w01 at time t_end, then free evolution under
/// -dw0 I(x)Iz + J Iz(x)Iz sampled as tr(rho (I+ (x) I + I (x) I+)) e^{-t/T2}.
FidTrace readout(const DensityState& state, const SpinSystem& sys, double t_end,
                 const ReadoutOptions& opts = {});

struct Peak {
  double offset_hz;
  double intensity;
};

struct Spectrum {
  std::vector<double> frequencies;  // Hz, strictly decreasing
  std::vector<Complex> amplitudes;
  std::vector<Peak> peaks;
};

/// Zero-filled (x2) DFT with the first point halved; phased so a +y
/// coherence gives a positive absorption line. Peaks are local maxima of
/// |Re| above 5% of the largest.
Spectrum spectrum(const FidTrace& fid);

/// Real intensity of the strongest point within J/(8 pi) Hz of +J/(4 pi) Hz,
/// the spin-1 line with spin 2 in |0>.
double left_peak_intensity(const Spectrum& spec, const SpinSystem& sys);

enum class DjClass { Constant, Balanced, Indeterminate };
std::string_view dj_class_name(DjClass c);

inline constexpr double kIndeterminateFraction = 0.10;

/// Left-peak sign; indeterminate below 10% of `reference` (the thermal-state
/// left-peak intensity for the same readout).
DjClass classify_dj(const Spectrum& spec, const SpinSystem& sys, double reference);

double thermal_reference(const SpinSystem& sys, const ReadoutOptions& opts = {});

enum class DistanceKind { Error1, Error2, Error3 };
DistanceKind distance_kind_from_name(std::string_view name);
std::string_view distance_kind_name(DistanceKind k);

double distance_closed_form(DistanceKind kind, const SpinSystem& sys, double t);
double distance_numeric(DistanceKind kind, const SpinSystem& sys, double t);

struct DistancePoint {
  double t;
  double closed_form;
  double numeric;
};
std::vector<DistancePoint> distance_curve(DistanceKind kind, const SpinSystem& sys,
                                          const std::vector<double>& t_grid);

/// Evenly spaced grid including both ends.
std::vector<double> linspace(double start, double stop, int count);

struct DjSettings {
  double t_j;
  /// Soft-pulse widths for spin 1 and spin 2; hard pulses when empty.
  std::optional<std::array<double, 2>> taus;
  ReadoutOptions readout;
};

struct DjOutcome {
  Spectrum spectrum;
  double left_peak;
  double reference;
  DjClass classification;
  double duration;
};

DjOutcome run_dj(DjFunction f, const SpinSystem& sys, const HamiltonianModel& model,
                 const DjSettings& settings);

struct PpsOutcome {
  std::array<double, 4> populations;
  double fidelity;
  int dominant;  // basis index 0..3 of |00>..|11>
  DensityState state;
  double duration;
};

PpsOutcome run_pps(const SpinSystem& sys, const HamiltonianModel& model, double t_j,
                   bool compensate);

std::string_view basis_label(int index);

struct RwaReport {
  double tau;
  double lab_dt;
  double fidelity_lab_vs_exact;
  double fidelity_exact_vs_secular;
  double fidelity_lab_vs_secular;
  double richardson_lab;
  double richardson_exact;
  /// Largest entrywise difference with the pulse switched off. The frame
  /// change is exact, so lab and rotating-exact must agree; the secular model
  /// drops the flip-flop term and differs at order (J / dw0)^2.
  double zero_amplitude_lab_vs_exact;
  double zero_amplitude_exact_vs_secular;
};

/// One soft pi/2 pulse on spin 1 (tau = 4 * 2 pi/|dw0|) followed by a T_J
/// delay, run under LabExact, RotatingExact and RotatingSecularHomo.
RwaReport validate_rwa(const SpinSystem& sys);

}  // namespace homonmr
