#pragma once

// Complex linear algebra and spin-operator construction.
//
// Basis ordering is |00>, |01>, |10>, |11> with spin 1 the left
// (most-significant) tensor factor. Iz|0> = +1/2 |0>.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace homonmr {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

enum class Axis { X, Y, Z };

namespace tolerance {
inline constexpr double kStructural = 1e-10;
inline constexpr double kEquality = 1e-9;
}  // namespace tolerance

inline constexpr int kMaxSpins = 10;

/// Identity on n spins (dimension 2^n).
ComplexMatrix identity(int n_spins);

/// I (x) ... (x) I_axis (x) ... (x) I with I_axis = sigma_axis / 2 at `site`.
ComplexMatrix spin_op(int n_spins, int site, Axis axis);

/// Kronecker product a (x) b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Number of spins for a 2^n dimension; throws if dim is not a power of two.
int spin_count(Eigen::Index dim);

bool is_hermitian(const ComplexMatrix& m, double tol = tolerance::kStructural);
bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol);

/// sqrt(tr[(A-B)^dagger (A-B)]).
double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b);

class DensityState;

/// Unitary propagator. The constructor checks ||U^dagger U - 1||_F < tol * dim.
class UnitaryOp {
 public:
  explicit UnitaryOp(ComplexMatrix matrix, double tol = tolerance::kStructural);

  static UnitaryOp identity(int n_spins);

  const ComplexMatrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  UnitaryOp adjoint() const;

  /// Composition: (*this) applied after `rhs`.
  UnitaryOp operator*(const UnitaryOp& rhs) const;

  /// U rho U^dagger.
  DensityState apply(const DensityState& state) const;

 private:
  struct Unchecked {};
  UnitaryOp(ComplexMatrix matrix, Unchecked) : matrix_(std::move(matrix)) {}

  ComplexMatrix matrix_;
};

/// exp(-i H t) via Hermitian eigendecomposition.
UnitaryOp expm_hermitian(const ComplexMatrix& h, double t,
                         double tol = tolerance::kStructural);

/// |tr(U^dagger V)| / dim. Insensitive to global phase.
double gate_fidelity(const UnitaryOp& u, const UnitaryOp& v);

class DensityState {
 public:
  enum class Convention { TrueState, Deviation };

  /// Validates Hermiticity and the convention-specific trace/positivity rules.
  DensityState(ComplexMatrix matrix, Convention convention,
               double tol = tolerance::kStructural);

  static DensityState pure(const Eigen::VectorXcd& ket);

  const ComplexMatrix& matrix() const { return matrix_; }
  Convention convention() const { return convention_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  bool is_deviation() const { return convention_ == Convention::Deviation; }

  /// Real diagonal, i.e. populations (true state) or population deviations.
  Eigen::VectorXd populations() const;

 private:
  friend class UnitaryOp;
  struct Unchecked {};
  DensityState(ComplexMatrix matrix, Convention convention, Unchecked)
      : matrix_(std::move(matrix)), convention_(convention) {}

  ComplexMatrix matrix_;
  Convention convention_;
};

/// tr(a b) / sqrt(tr(a^2) tr(b^2)); the usual NMR measure for deviation
/// matrices, |<psi|phi>|^2 for pure states. Zero if either operand vanishes.
double correlation_fidelity(const ComplexMatrix& a, const ComplexMatrix& b);
double correlation_fidelity(const DensityState& a, const DensityState& b);

}  // namespace homonmr
