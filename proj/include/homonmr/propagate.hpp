#pragma once

// Time-ordered evolution and the closed-form two-qubit gates.

#include <stdexcept>
#include <string>

#include "homonmr/hamiltonian.hpp"
#include "homonmr/spinops.hpp"

namespace homonmr {

/// Raised when a step violates dt <= (2 pi / w_max) / 20.
class SamplingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Largest admissible midpoint step for `h`: (2 pi / w_max) / 20, or +inf for
/// operators that do not oscillate.
double max_step(const TimeOperator& h);

/// A comfortable default step: a 64th of the fastest period, and at most a
/// 400th of the interval so envelopes are well sampled.
double default_step(const TimeOperator& h, double duration);

struct Propagation {
  HamiltonianModel model;
  double step;
  double t0;

  void validate(const TimeOperator& h) const;
};

/// Midpoint-rule product prod_k exp(-i H(t_k + dt/2) dt) over [t0, t1].
/// The interval is cut into ceil((t1 - t0)/dt) equal steps no longer than dt.
/// Static operators are exponentiated in one shot.
UnitaryOp propagator(const TimeOperator& h, double t0, double t1, double dt);

DensityState evolve(const DensityState& state, const TimeOperator& h, double t0,
                    double t1, double dt);

/// Instantaneous rotation of one spin by `theta` about the transverse axis at
/// angle `phase`: exp(+i theta (cos(phase) Ix + sin(phase) Iy)).
UnitaryOp pulse_rotation(int n_spins, int spin, double theta, double phase);

/// The c-phase gate diag(e^{-i pi/4}, e^{i pi/4}, e^{i pi/4}, e^{-i pi/4}).
UnitaryOp u_e();

/// exp(-i J t Iz(x)Iz).
UnitaryOp u_j(const SpinSystem& sys, double t);

/// Free evolution under the conventional offset Hamiltonian,
/// exp(-i (-dw0 I(x)Iz + J Iz(x)Iz) t).
UnitaryOp u_conventional_j(const SpinSystem& sys, double t);

/// U2 * U_J(t/2) * U1 * U_J(t/2), where the pi pulses U1, U2 flip spin 1
/// about x and spin 2 about the phase-tracked axes at angles
/// dw0 (t_start + t/2) and dw0 (t_start + t). g is taken as 1.
UnitaryOp u_j_star(const SpinSystem& sys, double t, double t_start = 0.0);

/// Average of exp(-i theta Iz_tot) rho exp(+i theta Iz_tot) over n_slices
/// equally spaced theta in [0, 2 pi).
DensityState gradient_crush(const DensityState& state, int n_slices = 32);

}  // namespace homonmr
