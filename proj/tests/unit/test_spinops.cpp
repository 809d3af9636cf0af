#include <cmath>
#include <random>

#include "doctest.h"
#include "homonmr/spinops.hpp"

using namespace homonmr;

namespace {

const Complex I1(0.0, 1.0);

ComplexMatrix random_hermitian(std::mt19937& rng, int dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(n(rng), n(rng));
  return 0.5 * (a + a.adjoint());
}

UnitaryOp random_unitary(std::mt19937& rng, int dim) {
  return expm_hermitian(random_hermitian(rng, dim), 1.0);
}

ComplexMatrix comm(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

}  // namespace

TEST_CASE("single-spin Iz is diag(1/2, -1/2)") {
  ComplexMatrix expect(2, 2);
  expect << 0.5, 0.0, 0.0, -0.5;
  CHECK(approx_equal(spin_op(1, 0, Axis::Z), expect, 0.0));
}

TEST_CASE("Iz(x)Iz product is diag(1/4, -1/4, -1/4, 1/4)") {
  const ComplexMatrix zz = spin_op(2, 0, Axis::Z) * spin_op(2, 1, Axis::Z);
  Eigen::VectorXcd d(4);
  d << 0.25, -0.25, -0.25, 0.25;
  CHECK(approx_equal(zz, ComplexMatrix(d.asDiagonal()), 0.0));
}

TEST_CASE("spin operators obey su(2) commutators and commute across sites") {
  for (int n = 1; n <= 3; ++n) {
    for (int s = 0; s < n; ++s) {
      const auto x = spin_op(n, s, Axis::X);
      const auto y = spin_op(n, s, Axis::Y);
      const auto z = spin_op(n, s, Axis::Z);
      CHECK(approx_equal(comm(x, y), I1 * z, 1e-15));
      CHECK(approx_equal(comm(y, z), I1 * x, 1e-15));
      CHECK(approx_equal(comm(z, x), I1 * y, 1e-15));
      for (int o = 0; o < n; ++o) {
        if (o == s) continue;
        for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
          CHECK(comm(x, spin_op(n, o, a)).norm() < 1e-15);
        }
      }
    }
  }
}

TEST_CASE("spin_op rejects bad sites and spin counts") {
  CHECK_THROWS_AS(spin_op(2, 2, Axis::X), std::out_of_range);
  CHECK_THROWS_AS(spin_op(2, -1, Axis::X), std::out_of_range);
  CHECK_THROWS_AS(spin_op(0, 0, Axis::X), std::invalid_argument);
  CHECK_THROWS_AS(spin_op(kMaxSpins + 1, 0, Axis::X), std::invalid_argument);
}

TEST_CASE("basis ordering puts spin 1 in the most significant position") {
  // Ix on spin 1 connects |00> and |10> (indices 0 and 2).
  const auto x1 = spin_op(2, 0, Axis::X);
  CHECK(x1(0, 2) == Complex(0.5));
  CHECK(x1(0, 1) == Complex(0.0));
}

TEST_CASE("expm of zero is the identity") {
  const UnitaryOp u = expm_hermitian(ComplexMatrix::Zero(4, 4), 3.7);
  CHECK(approx_equal(u.matrix(), ComplexMatrix::Identity(4, 4), 1e-15));
}

TEST_CASE("expm of J IzIz at pi/J is the c-phase diagonal") {
  const double j = 2.0 * M_PI * 7.1;
  const ComplexMatrix zz = spin_op(2, 0, Axis::Z) * spin_op(2, 1, Axis::Z);
  const UnitaryOp u = expm_hermitian(j * zz, M_PI / j);
  const Complex m = std::exp(-I1 * M_PI / 4.0);
  const Complex p = std::exp(I1 * M_PI / 4.0);
  Eigen::VectorXcd d(4);
  d << m, p, p, m;
  CHECK(approx_equal(u.matrix(), ComplexMatrix(d.asDiagonal()), 1e-12));
}

TEST_CASE("expm inverse and one-parameter group property") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = trial % 2 ? 4 : 8;
    const ComplexMatrix h = random_hermitian(rng, dim);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const double t1 = u(rng);
    const double t2 = u(rng);
    const auto a = expm_hermitian(h, t1);
    CHECK(approx_equal((a * expm_hermitian(h, -t1)).matrix(),
                       ComplexMatrix::Identity(dim, dim), 1e-10));
    CHECK(approx_equal((a * expm_hermitian(h, t2)).matrix(), expm_hermitian(h, t1 + t2).matrix(),
                       1e-9));
  }
}

TEST_CASE("expm rejects non-Hermitian input") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(expm_hermitian(m, 1.0), std::invalid_argument);
}

TEST_CASE("UnitaryOp checks unitarity on construction") {
  CHECK_THROWS_AS(UnitaryOp(2.0 * ComplexMatrix::Identity(4, 4)), std::invalid_argument);
  CHECK_THROWS_AS(UnitaryOp(ComplexMatrix::Identity(3, 3)), std::invalid_argument);
  CHECK_NOTHROW(UnitaryOp(ComplexMatrix::Identity(4, 4)));
}

TEST_CASE("frobenius distance examples") {
  std::mt19937 rng(1);
  const UnitaryOp u = random_unitary(rng, 4);
  CHECK(frobenius_distance(u.matrix(), u.matrix()) == 0.0);
  const ComplexMatrix id = ComplexMatrix::Identity(4, 4);
  CHECK(frobenius_distance(id, -id) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK_THROWS_AS(frobenius_distance(id, ComplexMatrix::Identity(2, 2)), std::invalid_argument);
}

TEST_CASE("frobenius distance to U_E at t = 0 by direct subtraction") {
  // U_J(0) = 1, so ||U_E - 1||^2 = 4 |e^{-i pi/4} - 1|^2 = 8 (1 - cos(pi/4)).
  const Complex m = std::exp(-I1 * M_PI / 4.0);
  const Complex p = std::exp(I1 * M_PI / 4.0);
  Eigen::VectorXcd d(4);
  d << m, p, p, m;
  const double dist = frobenius_distance(ComplexMatrix(d.asDiagonal()), ComplexMatrix::Identity(4, 4));
  CHECK(dist == doctest::Approx(2.0 * std::sqrt(2.0) * std::sqrt(1.0 - std::cos(M_PI / 4.0))).epsilon(1e-14));
  CHECK(dist == doctest::Approx(1.5307).epsilon(1e-4));
}

TEST_CASE("frobenius distance is a metric on random unitaries") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_unitary(rng, 4).matrix();
    const auto b = random_unitary(rng, 4).matrix();
    const auto c = random_unitary(rng, 4).matrix();
    CHECK(frobenius_distance(a, b) == frobenius_distance(b, a));
    CHECK(frobenius_distance(a, c) <= frobenius_distance(a, b) + frobenius_distance(b, c) + 1e-12);
  }
}

TEST_CASE("gate fidelity ignores global phase") {
  std::mt19937 rng(3);
  const auto u = random_unitary(rng, 4);
  const UnitaryOp v(std::exp(I1 * 0.7) * u.matrix());
  CHECK(gate_fidelity(u, v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("density state invariants") {
  using C = DensityState::Convention;
  ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
  rho(0, 0) = 1.0;
  CHECK_NOTHROW(DensityState(rho, C::TrueState));
  CHECK_THROWS_AS(DensityState(rho, C::Deviation), std::invalid_argument);
  CHECK_THROWS_AS(DensityState(2.0 * rho, C::TrueState), std::invalid_argument);
  ComplexMatrix neg = ComplexMatrix::Zero(4, 4);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityState(neg, C::TrueState), std::invalid_argument);
  ComplexMatrix nh = spin_op(2, 0, Axis::Z);
  nh(0, 1) = 0.3;
  CHECK_THROWS_AS(DensityState(nh, C::Deviation), std::invalid_argument);
  const DensityState dev(spin_op(2, 0, Axis::Z), C::Deviation);
  CHECK(dev.is_deviation());
}

TEST_CASE("pure state populations and correlation fidelity") {
  Eigen::VectorXcd ket = Eigen::VectorXcd::Zero(4);
  ket(0) = 1.0;
  ket(3) = 1.0;
  const DensityState s = DensityState::pure(ket);
  CHECK(s.populations()(0) == doctest::Approx(0.5));
  CHECK(s.populations()(3) == doctest::Approx(0.5));
  CHECK(correlation_fidelity(s, s) == doctest::Approx(1.0));
  CHECK(correlation_fidelity(ComplexMatrix::Zero(4, 4), s.matrix()) == 0.0);
}

TEST_CASE("unitary action preserves trace and Hermiticity") {
  std::mt19937 rng(11);
  const DensityState dev(spin_op(2, 0, Axis::Z) + spin_op(2, 1, Axis::Z),
                         DensityState::Convention::Deviation);
  DensityState s = dev;
  for (int k = 0; k < 200; ++k) s = random_unitary(rng, 4).apply(s);
  CHECK(std::abs(s.matrix().trace()) < 1e-9);
  CHECK(is_hermitian(s.matrix(), 1e-12));
  CHECK((s.matrix() * s.matrix()).trace().real() ==
        doctest::Approx((dev.matrix() * dev.matrix()).trace().real()).epsilon(1e-9));
}
