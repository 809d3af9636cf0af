#include "homonmr/spinops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace homonmr {

namespace {

ComplexMatrix single_spin(Axis axis) {
  ComplexMatrix m(2, 2);
  switch (axis) {
    case Axis::X:
      m << 0.0, 0.5, 0.5, 0.0;
      break;
    case Axis::Y:
      m << 0.0, Complex(0.0, -0.5), Complex(0.0, 0.5), 0.0;
      break;
    case Axis::Z:
      m << 0.5, 0.0, 0.0, -0.5;
      break;
  }
  return m;
}

void check_spin_count(int n_spins) {
  if (n_spins < 1 || n_spins > kMaxSpins) {
    throw std::invalid_argument("spin count must lie in [1, " +
                                std::to_string(kMaxSpins) + "], got " +
                                std::to_string(n_spins));
  }
}

}  // namespace

ComplexMatrix identity(int n_spins) {
  check_spin_count(n_spins);
  const Eigen::Index dim = Eigen::Index{1} << n_spins;
  return ComplexMatrix::Identity(dim, dim);
}

ComplexMatrix spin_op(int n_spins, int site, Axis axis) {
  check_spin_count(n_spins);
  if (site < 0 || site >= n_spins) {
    throw std::out_of_range("spin site " + std::to_string(site) +
                            " out of range for " + std::to_string(n_spins) +
                            " spins");
  }
  const ComplexMatrix left = ComplexMatrix::Identity(Eigen::Index{1} << site,
                                                     Eigen::Index{1} << site);
  const int right_spins = n_spins - site - 1;
  const ComplexMatrix right = ComplexMatrix::Identity(
      Eigen::Index{1} << right_spins, Eigen::Index{1} << right_spins);
  return kron(kron(left, single_spin(axis)), right);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

int spin_count(Eigen::Index dim) {
  if (dim < 2 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument("matrix dimension " + std::to_string(dim) +
                                " is not a power of two >= 2");
  }
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  check_spin_count(n);
  return n;
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).norm() <= tol * std::max(1.0, m.norm());
}

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("frobenius_distance: dimension mismatch (" +
                                std::to_string(a.rows()) + " vs " +
                                std::to_string(b.rows()) + ")");
  }
  return (a - b).norm();
}

// ---------------------------------------------------------------------------
// UnitaryOp
// ---------------------------------------------------------------------------

UnitaryOp::UnitaryOp(ComplexMatrix matrix, double tol)
    : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw std::invalid_argument("unitary must be square");
  }
  spin_count(matrix_.rows());
  const double dim = static_cast<double>(matrix_.rows());
  const double defect =
      (matrix_.adjoint() * matrix_ -
       ComplexMatrix::Identity(matrix_.rows(), matrix_.cols()))
          .norm();
  if (!(defect < tol * dim)) {
    throw std::invalid_argument("matrix is not unitary (defect " +
                                std::to_string(defect) + ")");
  }
}

UnitaryOp UnitaryOp::identity(int n_spins) {
  return UnitaryOp(homonmr::identity(n_spins), Unchecked{});
}

UnitaryOp UnitaryOp::adjoint() const {
  return UnitaryOp(matrix_.adjoint(), Unchecked{});
}

UnitaryOp UnitaryOp::operator*(const UnitaryOp& rhs) const {
  if (dim() != rhs.dim()) {
    throw std::invalid_argument("unitary composition: dimension mismatch");
  }
  return UnitaryOp(matrix_ * rhs.matrix_, Unchecked{});
}

DensityState UnitaryOp::apply(const DensityState& state) const {
  if (dim() != state.dim()) {
    throw std::invalid_argument("unitary/state dimension mismatch");
  }
  ComplexMatrix rho = matrix_ * state.matrix() * matrix_.adjoint();
  // Re-symmetrise so round-off never accumulates a non-Hermitian part.
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityState(std::move(rho), state.convention(),
                      DensityState::Unchecked{});
}

UnitaryOp expm_hermitian(const ComplexMatrix& h, double t, double tol) {
  if (h.rows() != h.cols()) {
    throw std::invalid_argument("expm_hermitian: matrix must be square");
  }
  if (!is_hermitian(h, tol)) {
    throw std::invalid_argument("expm_hermitian: matrix is not Hermitian");
  }
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("expm_hermitian: eigendecomposition failed");
  }
  const Eigen::VectorXd& w = solver.eigenvalues();
  const ComplexMatrix& v = solver.eigenvectors();
  Eigen::VectorXcd phases(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    phases(k) = std::polar(1.0, -w(k) * t);
  }
  return UnitaryOp(v * phases.asDiagonal() * v.adjoint());
}

double gate_fidelity(const UnitaryOp& u, const UnitaryOp& v) {
  if (u.dim() != v.dim()) {
    throw std::invalid_argument("gate_fidelity: dimension mismatch");
  }
  return std::abs((u.matrix().adjoint() * v.matrix()).trace()) /
         static_cast<double>(u.dim());
}

// ---------------------------------------------------------------------------
// DensityState
// ---------------------------------------------------------------------------

DensityState::DensityState(ComplexMatrix matrix, Convention convention,
                           double tol)
    : matrix_(std::move(matrix)), convention_(convention) {
  if (matrix_.rows() != matrix_.cols()) {
    throw std::invalid_argument("density matrix must be square");
  }
  spin_count(matrix_.rows());
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  const Complex tr = matrix_.trace();
  if (convention_ == Convention::Deviation) {
    if (std::abs(tr) > tol) {
      throw std::invalid_argument("deviation matrix must be traceless");
    }
    return;
  }
  if (std::abs(tr - 1.0) > tol) {
    throw std::invalid_argument("density matrix trace must be 1");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(
      0.5 * (matrix_ + matrix_.adjoint()), Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-9) {
    throw std::invalid_argument("density matrix has a negative eigenvalue");
  }
}

DensityState DensityState::pure(const Eigen::VectorXcd& ket) {
  const double n = ket.norm();
  if (n == 0.0) throw std::invalid_argument("pure state from zero vector");
  const Eigen::VectorXcd k = ket / n;
  return DensityState(k * k.adjoint(), Convention::TrueState);
}

Eigen::VectorXd DensityState::populations() const {
  return matrix_.diagonal().real();
}

double correlation_fidelity(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("correlation_fidelity: dimension mismatch");
  }
  const double aa = (a * a).trace().real();
  const double bb = (b * b).trace().real();
  if (aa <= 0.0 || bb <= 0.0) return 0.0;
  return (a * b).trace().real() / std::sqrt(aa * bb);
}

double correlation_fidelity(const DensityState& a, const DensityState& b) {
  return correlation_fidelity(a.matrix(), b.matrix());
}

}  // namespace homonmr
