#ifndef PQGATE_GATES_HPP
#define PQGATE_GATES_HPP

#include <cmath>
#include <numbers>
#include <random>

#include "pqgate/gate_matrix.hpp"
#include "pqgate/qstate.hpp"
#include "pqgate/rng.hpp"

namespace pqgate {

// ---------------------------------------------------------------------------
// Constructors

template <typename Real = double>
GateMatrix<Real> identity_gate(int arity = 1) {
  const auto dim = Eigen::Index{1} << arity;
  return GateMatrix<Real>(MatrixC<Real>::Identity(dim, dim));
}

/// exp(i alpha sigma_z) = diag(e^{i alpha}, e^{-i alpha}).
template <typename Real = double>
GateMatrix<Real> u_alpha(Real alpha) {
  MatrixC<Real> m = MatrixC<Real>::Zero(2, 2);
  m(0, 0) = std::polar(Real(1), alpha);
  m(1, 1) = std::polar(Real(1), -alpha);
  return GateMatrix<Real>(std::move(m));
}

template <typename Real = double>
GateMatrix<Real> pauli_x() {
  MatrixC<Real> m(2, 2);
  m << 0, 1, 1, 0;
  return GateMatrix<Real>(std::move(m));
}

template <typename Real = double>
GateMatrix<Real> pauli_y() {
  MatrixC<Real> m(2, 2);
  m << 0, Complex<Real>(0, -1), Complex<Real>(0, 1), 0;
  return GateMatrix<Real>(std::move(m));
}

template <typename Real = double>
GateMatrix<Real> pauli_z() {
  MatrixC<Real> m(2, 2);
  m << 1, 0, 0, -1;
  return GateMatrix<Real>(std::move(m));
}

template <typename Real = double>
GateMatrix<Real> hadamard() {
  const Real h = Real(1) / std::sqrt(Real(2));
  MatrixC<Real> m(2, 2);
  m << h, h, h, -h;
  return GateMatrix<Real>(std::move(m));
}

/// `g` controlled on k qubits that precede its targets; fires iff every
/// control is |1>.
template <typename Real>
GateMatrix<Real> multi_controlled(const GateMatrix<Real>& g, int k) {
  detail::require(k >= 1, "multi_controlled needs at least one control");
  detail::require(k + g.arity() <= kMaxQubits, "controlled gate exceeds register limit");
  const auto dim = Eigen::Index{1} << (k + g.arity());
  MatrixC<Real> m = MatrixC<Real>::Identity(dim, dim);
  m.bottomRightCorner(g.dim(), g.dim()) = g.matrix();
  return GateMatrix<Real>(std::move(m));
}

// |0><0| (x) I + |1><1| (x) sigma_x
template <typename Real = double>
GateMatrix<Real> cnot() {
  return multi_controlled(pauli_x<Real>(), 1);
}

template <typename Real = double>
GateMatrix<Real> toffoli() {
  return multi_controlled(pauli_x<Real>(), 2);
}

// ---------------------------------------------------------------------------
// Distance and phase-insensitive comparison

/// Hilbert-Schmidt distance sqrt(Tr[(U-V)^dagger (U-V)]).
template <typename Real>
Real distance(const GateMatrix<Real>& u, const GateMatrix<Real>& v) {
  detail::require(u.arity() == v.arity(), "distance between gates of different arity");
  return (u.matrix() - v.matrix()).norm();
}

/// Largest entrywise deviation between u and v after discarding global phase.
/// The phase is fitted from Tr(u^dagger v), which stays stable when several
/// entries share the largest magnitude.
template <typename Real>
Real phase_insensitive_deviation(const MatrixC<Real>& u, const MatrixC<Real>& v) {
  detail::require(u.rows() == v.rows() && u.cols() == v.cols(), "shape mismatch");
  const Complex<Real> overlap = (u.adjoint() * v).trace();
  const Complex<Real> phase = std::abs(overlap) > Real(0) ? overlap / std::abs(overlap)
                                                          : Complex<Real>(1);
  return (u * phase - v).cwiseAbs().maxCoeff();
}

template <typename Real>
bool equal_up_to_phase(const GateMatrix<Real>& u, const GateMatrix<Real>& v,
                       Real tol = Real(kComposedTol)) {
  return u.arity() == v.arity() && phase_insensitive_deviation(u.matrix(), v.matrix()) <= tol;
}

// ---------------------------------------------------------------------------
// Euler decomposition into three U_alpha factors

/// U = U_{a3} Xc^dagger U_{a2} Xc U_{a1}, Xc = exp(i pi sigma_x / 4), all
/// angles in [0, pi). Xc^dagger U_a Xc = exp(-i a sigma_y), so this is the
/// z-y-z Euler form written with the stored-operation family only.
template <typename Real>
struct EulerAngles {
  Real alpha1 = 0;
  Real alpha2 = 0;
  Real alpha3 = 0;
};

template <typename Real = double>
GateMatrix<Real> euler_conjugator() {
  const Real c = std::cos(std::numbers::pi_v<Real> / 4);
  MatrixC<Real> m(2, 2);
  m << c, Complex<Real>(0, c), Complex<Real>(0, c), c;
  return GateMatrix<Real>(std::move(m));
}

// Reduces an angle into [0, pi); U_{a+pi} = -U_a.
template <typename Real>
Real canonical_angle(Real a) {
  const Real pi = std::numbers::pi_v<Real>;
  Real r = std::fmod(a, pi);
  if (r < 0) r += pi;
  if (r >= pi) r -= pi;
  return r;
}

template <typename Real>
GateMatrix<Real> euler_compose(const EulerAngles<Real>& a) {
  const GateMatrix<Real> xc = euler_conjugator<Real>();
  return u_alpha(a.alpha3) * xc.adjoint() * u_alpha(a.alpha2) * xc * u_alpha(a.alpha1);
}

template <typename Real>
EulerAngles<Real> euler_decompose(const MatrixC<Real>& u) {
  detail::require(u.rows() == 2 && u.cols() == 2, "euler_decompose takes a 2x2 matrix");
  detail::require(GateMatrix<Real>::unitarity_defect(u) <= Real(kExactTol),
                  "euler_decompose input is not unitary");
  // Project onto SU(2): [[x, -conj(y)], [y, conj(x)]].
  const Complex<Real> root = std::sqrt(u.determinant());
  const MatrixC<Real> w = u / root;
  const Complex<Real> x = w(0, 0);
  const Complex<Real> y = w(1, 0);
  // w = [[e^{i(a3+a1)} cos a2, -e^{i(a3-a1)} sin a2], [e^{i(a1-a3)} sin a2, e^{-i(a3+a1)} cos a2]]
  const Real half_turn = std::atan2(std::abs(y), std::abs(x));
  Real a1 = 0, a3 = 0;
  constexpr Real degenerate = Real(1e-13);
  if (std::abs(y) <= degenerate) {
    a1 = std::arg(x);
  } else if (std::abs(x) <= degenerate) {
    a1 = std::arg(y);
  } else {
    a1 = (std::arg(x) + std::arg(y)) / 2;
    a3 = (std::arg(x) - std::arg(y)) / 2;
  }
  return {canonical_angle(a1), canonical_angle(half_turn), canonical_angle(a3)};
}

template <typename Real>
EulerAngles<Real> euler_decompose(const GateMatrix<Real>& u) {
  return euler_decompose(u.matrix());
}

// ---------------------------------------------------------------------------
// Haar-random unitaries

/// Haar-distributed unitary on `arity` qubits: QR of a complex Ginibre matrix
/// with the phases of R's diagonal absorbed into Q.
template <typename Real = double>
GateMatrix<Real> haar_random_unitary(int arity, Rng& rng) {
  const auto dim = Eigen::Index{1} << arity;
  std::normal_distribution<Real> normal;
  MatrixC<Real> z(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) {
      const Real re = normal(rng);
      const Real im = normal(rng);
      z(i, j) = Complex<Real>(re, im);
    }
  Eigen::HouseholderQR<MatrixC<Real>> qr(z);
  MatrixC<Real> q = qr.householderQ() * MatrixC<Real>::Identity(dim, dim);
  const MatrixC<Real> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Complex<Real> d = r(j, j);
    if (std::abs(d) > Real(0)) q.col(j) *= d / std::abs(d);
  }
  return GateMatrix<Real>(std::move(q));
}

}  // namespace pqgate

#endif  // PQGATE_GATES_HPP
