#include "homonmr/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace homonmr {

namespace {

constexpr double kStepSlack = 1.0 + 1e-9;

ComplexMatrix total_iz(int n_spins) {
  ComplexMatrix m = ComplexMatrix::Zero(Eigen::Index{1} << n_spins,
                                        Eigen::Index{1} << n_spins);
  for (int k = 0; k < n_spins; ++k) m += spin_op(n_spins, k, Axis::Z);
  return m;
}

}  // namespace

double max_step(const TimeOperator& h) {
  if (h.is_static() || h.max_frequency() <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return (kTwoPi / h.max_frequency()) / 20.0;
}

double default_step(const TimeOperator& h, double duration) {
  double dt = duration > 0.0 ? duration / 400.0 : 1.0;
  if (!h.is_static() && h.max_frequency() > 0.0) {
    dt = std::min(dt, (kTwoPi / h.max_frequency()) / 64.0);
  }
  return dt;
}

void Propagation::validate(const TimeOperator& h) const {
  if (!(step > 0.0)) throw SamplingError("time step must be positive");
  if (step > max_step(h) * kStepSlack) {
    throw SamplingError("time step " + std::to_string(step) +
                        " s exceeds the sampling limit " +
                        std::to_string(max_step(h)) + " s for model " +
                        std::string(model.name()));
  }
}

UnitaryOp propagator(const TimeOperator& h, double t0, double t1, double dt) {
  if (!(t1 >= t0)) throw std::invalid_argument("propagator: t1 < t0");
  if (!(dt > 0.0)) throw SamplingError("time step must be positive");
  const ComplexMatrix h0 = h(t0);
  const int n_spins = spin_count(h0.rows());
  const double span = t1 - t0;
  if (span == 0.0) return UnitaryOp::identity(n_spins);
  if (h.is_static()) return expm_hermitian(h0, span);
  if (dt > max_step(h) * kStepSlack) {
    throw SamplingError("time step " + std::to_string(dt) +
                        " s exceeds the sampling limit " +
                        std::to_string(max_step(h)) + " s");
  }
  const auto n = static_cast<long>(std::ceil(span / dt - 1e-9));
  const double step = span / static_cast<double>(std::max(n, 1L));
  ComplexMatrix u = ComplexMatrix::Identity(h0.rows(), h0.cols());
  for (long k = 0; k < std::max(n, 1L); ++k) {
    const double tm = t0 + (static_cast<double>(k) + 0.5) * step;
    u = expm_hermitian(h(tm), step).matrix() * u;
  }
  return UnitaryOp(std::move(u), 1e-9);
}

DensityState evolve(const DensityState& state, const TimeOperator& h, double t0,
                    double t1, double dt) {
  return propagator(h, t0, t1, dt).apply(state);
}

UnitaryOp pulse_rotation(int n_spins, int spin, double theta, double phase) {
  const ComplexMatrix axis = std::cos(phase) * spin_op(n_spins, spin, Axis::X) +
                             std::sin(phase) * spin_op(n_spins, spin, Axis::Y);
  return expm_hermitian(axis, -theta);
}

UnitaryOp u_e() {
  const Complex m = std::polar(1.0, -kPi / 4.0);
  const Complex p = std::polar(1.0, kPi / 4.0);
  Eigen::VectorXcd d(4);
  d << m, p, p, m;
  return UnitaryOp(ComplexMatrix(d.asDiagonal()));
}

UnitaryOp u_j(const SpinSystem& sys, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("u_j: t must be nonnegative");
  return expm_hermitian(h_secular_system(sys), t);
}

UnitaryOp u_conventional_j(const SpinSystem& sys, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("u_conventional_j: t must be nonnegative");
  return expm_hermitian(h_conventional(sys), t);
}

UnitaryOp u_j_star(const SpinSystem& sys, double t, double t_start) {
  if (!(t >= 0.0)) throw std::invalid_argument("u_j_star: t must be nonnegative");
  const double dw = sys.delta_omega();
  const ComplexMatrix ix1 = spin_op(2, 0, Axis::X);
  const ComplexMatrix ix2 = spin_op(2, 1, Axis::X);
  const ComplexMatrix iy2 = spin_op(2, 1, Axis::Y);
  auto pi_pair = [&](double angle) {
    const ComplexMatrix axis2 = std::cos(angle) * ix2 + std::sin(angle) * iy2;
    return expm_hermitian(ix1, kPi) * expm_hermitian(axis2, kPi);
  };
  const UnitaryOp half = u_j(sys, t / 2.0);
  const UnitaryOp first = pi_pair(dw * (t_start + t / 2.0));
  const UnitaryOp second = pi_pair(dw * (t_start + t));
  return second * half * first * half;
}

DensityState gradient_crush(const DensityState& state, int n_slices) {
  if (n_slices < 16) {
    throw std::invalid_argument("gradient_crush needs at least 16 slices, got " +
                                std::to_string(n_slices));
  }
  const int n = spin_count(state.dim());
  // exp(-i theta Iz_tot) is diagonal; each element picks up e^{-i theta (m_a - m_b)}.
  const Eigen::VectorXd m = total_iz(n).diagonal().real();
  const ComplexMatrix& rho = state.matrix();
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (int s = 0; s < n_slices; ++s) {
    const double theta = kTwoPi * s / n_slices;
    for (Eigen::Index a = 0; a < rho.rows(); ++a) {
      for (Eigen::Index b = 0; b < rho.cols(); ++b) {
        out(a, b) += std::polar(1.0, -theta * (m(a) - m(b))) * rho(a, b);
      }
    }
  }
  out /= static_cast<double>(n_slices);
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityState(std::move(out), state.convention(), 1e-9);
}

}  // namespace homonmr
