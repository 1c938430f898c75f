#ifndef PQGATE_QSTATE_HPP
#define PQGATE_QSTATE_HPP

#include <cmath>
#include <random>
#include <utility>

#include "pqgate/gate_matrix.hpp"
#include "pqgate/rng.hpp"
#include "pqgate/types.hpp"

namespace pqgate {

/// Normalized pure state of an n-qubit register, 1 <= n <= 16.
///
/// Immutable value: every operation below returns a new state. The amplitude
/// at index k belongs to the basis ket whose bits, read from qubit 0 (most
/// significant) to qubit n-1, spell k.
template <typename Real>
class StateVector {
 public:
  using Vector = VectorC<Real>;

  // Accepts amplitudes whose squared norm is within kComposedTol of one and
  // removes the residual drift.
  explicit StateVector(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
    const auto dim = static_cast<std::size_t>(amplitudes_.size());
    detail::require(dim >= 2 && detail::is_power_of_two(dim),
                    "state length must be 2^n with n >= 1");
    n_qubits_ = detail::log2_exact(dim);
    detail::require(n_qubits_ <= kMaxQubits, "register exceeds 16 qubits");
    const Real norm2 = amplitudes_.squaredNorm();
    detail::require(std::abs(norm2 - Real(1)) <= Real(kComposedTol),
                    "state is not normalized (|psi|^2 = " + std::to_string(double(norm2)) + ")");
    amplitudes_ /= std::sqrt(norm2);
  }

  static StateVector normalize(Vector amplitudes) {
    const Real norm = amplitudes.norm();
    detail::require(norm > Real(0), "cannot normalize the zero vector");
    return StateVector(amplitudes / norm);
  }

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex<Real> operator[](Eigen::Index k) const { return amplitudes_[k]; }

 private:
  Vector amplitudes_;
  int n_qubits_ = 0;
};

/// Hermitian, unit-trace, positive semidefinite operator on n qubits.
template <typename Real>
class DensityMatrix {
 public:
  using Matrix = MatrixC<Real>;

  explicit DensityMatrix(Matrix entries) : entries_(std::move(entries)) {
    detail::require(entries_.rows() == entries_.cols(), "density matrix must be square");
    const auto dim = static_cast<std::size_t>(entries_.rows());
    detail::require(dim >= 2 && detail::is_power_of_two(dim), "density dimension must be 2^n");
    n_qubits_ = detail::log2_exact(dim);
    const Real herm = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
    detail::require(herm <= Real(kExactTol), "density matrix is not Hermitian");
    const Complex<Real> tr = entries_.trace();
    detail::require(std::abs(tr - Complex<Real>(1)) <= Real(kExactTol),
                    "density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
    detail::require(solver.eigenvalues().minCoeff() >= Real(-kComposedTol),
                    "density matrix is not positive semidefinite");
  }

  static DensityMatrix pure(const StateVector<Real>& s) {
    return DensityMatrix(s.amplitudes() * s.amplitudes().adjoint());
  }

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }

 private:
  Matrix entries_;
  int n_qubits_ = 0;
};

struct MeasurementRecord {
  int qubit = 0;
  int outcome = 0;
  double probability = 0.0;
};

using StateVectord = StateVector<double>;
using DensityMatrixd = DensityMatrix<double>;

// ---------------------------------------------------------------------------
// Construction

template <typename Real = double>
StateVector<Real> basis_state(int n, std::size_t index) {
  detail::require(n >= 1 && n <= kMaxQubits, "register size must be in [1, 16]");
  const std::size_t dim = std::size_t{1} << n;
  detail::require(index < dim, "basis index " + std::to_string(index) + " out of range");
  VectorC<Real> v = VectorC<Real>::Zero(static_cast<Eigen::Index>(dim));
  v[static_cast<Eigen::Index>(index)] = Real(1);
  return StateVector<Real>(std::move(v));
}

template <typename Real = double>
StateVector<Real> qubit_state(Complex<Real> a, Complex<Real> b) {
  VectorC<Real> v(2);
  v << a, b;
  return StateVector<Real>::normalize(std::move(v));
}

template <typename Real>
StateVector<Real> tensor(const StateVector<Real>& a, const StateVector<Real>& b) {
  detail::require(a.n_qubits() + b.n_qubits() <= kMaxQubits, "tensor product exceeds 16 qubits");
  VectorC<Real> v(a.dim() * b.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) v.segment(i * b.dim(), b.dim()) = a[i] * b.amplitudes();
  return StateVector<Real>(std::move(v));
}

template <typename Real>
MatrixC<Real> kron(const MatrixC<Real>& a, const MatrixC<Real>& b) {
  MatrixC<Real> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// ---------------------------------------------------------------------------
// Gate application

namespace detail {

// Applies `g` to the `targets` of every column of `data`, in place.
template <typename Real, typename Derived>
void apply_to_columns(Eigen::MatrixBase<Derived>& data, int n_qubits, const MatrixC<Real>& g,
                      std::span<const int> targets) {
  const auto local = local_offsets(targets, n_qubits);
  const QubitList rest = complement(targets, n_qubits);
  const auto bases = local_offsets(rest, n_qubits);
  const auto k = static_cast<Eigen::Index>(local.size());
  VectorC<Real> in(k), out(k);
  for (Eigen::Index col = 0; col < data.cols(); ++col) {
    for (std::size_t base : bases) {
      for (Eigen::Index m = 0; m < k; ++m) in[m] = data(base + local[m], col);
      out.noalias() = g * in;
      for (Eigen::Index m = 0; m < k; ++m) data(base + local[m], col) = out[m];
    }
  }
}

}  // namespace detail

/// Applies `g` to `targets`; targets[0] is the most significant qubit of the
/// gate's local index.
template <typename Real>
StateVector<Real> apply_gate(const StateVector<Real>& s, const GateMatrix<Real>& g,
                             std::span<const int> targets) {
  detail::require(static_cast<int>(targets.size()) == g.arity(),
                  "gate arity " + std::to_string(g.arity()) + " does not match " +
                      std::to_string(targets.size()) + " targets");
  detail::check_qubits(targets, s.n_qubits());
  VectorC<Real> v = s.amplitudes();
  detail::apply_to_columns<Real>(v, s.n_qubits(), g.matrix(), targets);
  return StateVector<Real>(std::move(v));
}

template <typename Real>
StateVector<Real> apply_gate(const StateVector<Real>& s, const GateMatrix<Real>& g,
                             std::initializer_list<int> targets) {
  return apply_gate(s, g, std::span<const int>(targets.begin(), targets.size()));
}

/// Full-register matrix of `g` acting on `targets` of an n-qubit register.
template <typename Real>
GateMatrix<Real> embed(const GateMatrix<Real>& g, std::span<const int> targets, int n_qubits) {
  detail::require(static_cast<int>(targets.size()) == g.arity(), "gate arity mismatch");
  detail::check_qubits(targets, n_qubits);
  const auto dim = Eigen::Index{1} << n_qubits;
  MatrixC<Real> m = MatrixC<Real>::Identity(dim, dim);
  detail::apply_to_columns<Real>(m, n_qubits, g.matrix(), targets);
  return GateMatrix<Real>(std::move(m));
}

// ---------------------------------------------------------------------------
// Measurement

template <typename Real>
Real outcome_probability(const StateVector<Real>& s, int qubit, int outcome) {
  detail::check_qubits(std::span<const int>(&qubit, 1), s.n_qubits());
  const std::size_t mask = std::size_t{1} << bit_position(s.n_qubits(), qubit);
  Real p = 0;
  for (Eigen::Index k = 0; k < s.dim(); ++k) {
    const bool one = (static_cast<std::size_t>(k) & mask) != 0;
    if (one == (outcome == 1)) p += std::norm(s[k]);
  }
  return p;
}

template <typename Real>
struct Postselected {
  Real probability;
  StateVector<Real> state;
};

/// Projects `qubits` onto the basis configuration `bits` and returns the
/// renormalized state of the remaining qubits (in register order) together
/// with the Born probability of that configuration.
template <typename Real>
Postselected<Real> postselect(const StateVector<Real>& s, std::span<const int> qubits,
                              std::span<const int> bits) {
  detail::require(qubits.size() == bits.size(), "one bit per postselected qubit");
  detail::require(static_cast<int>(qubits.size()) < s.n_qubits(),
                  "postselection must leave at least one qubit");
  detail::check_qubits(qubits, s.n_qubits());
  std::size_t fixed = 0;
  for (std::size_t j = 0; j < qubits.size(); ++j) {
    detail::require(bits[j] == 0 || bits[j] == 1, "postselected bits must be 0 or 1");
    if (bits[j]) fixed |= std::size_t{1} << bit_position(s.n_qubits(), qubits[j]);
  }
  const QubitList rest = detail::complement(qubits, s.n_qubits());
  const auto offsets = detail::local_offsets(rest, s.n_qubits());
  VectorC<Real> v(static_cast<Eigen::Index>(offsets.size()));
  for (std::size_t m = 0; m < offsets.size(); ++m) v[m] = s[fixed + offsets[m]];
  const Real p = v.squaredNorm();
  detail::require(p > Real(0), "postselected branch has zero probability");
  return {p, StateVector<Real>(v / std::sqrt(p))};
}

template <typename Real>
Postselected<Real> postselect(const StateVector<Real>& s, std::initializer_list<int> qubits,
                              std::initializer_list<int> bits) {
  return postselect(s, std::span<const int>(qubits.begin(), qubits.size()),
                    std::span<const int>(bits.begin(), bits.size()));
}

/// Collapses `qubit` onto `outcome` without removing it from the register.
template <typename Real>
StateVector<Real> collapse(const StateVector<Real>& s, int qubit, int outcome, Real probability) {
  const std::size_t mask = std::size_t{1} << bit_position(s.n_qubits(), qubit);
  VectorC<Real> v = s.amplitudes();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const bool one = (static_cast<std::size_t>(k) & mask) != 0;
    if (one != (outcome == 1)) v[k] = 0;
  }
  return StateVector<Real>(v / std::sqrt(probability));
}

/// Projective Z-basis measurement of one qubit, sampled by the Born rule.
/// A branch of probability zero is never selected.
template <typename Real>
std::pair<MeasurementRecord, StateVector<Real>> measure_qubit(const StateVector<Real>& s, int qubit,
                                                              Rng& rng) {
  const Real p0 = outcome_probability(s, qubit, 0);
  const Real p1 = outcome_probability(s, qubit, 1);
  const int outcome = rng.uniform() * double(p0 + p1) < double(p0) ? 0 : 1;
  const Real p = outcome == 0 ? p0 : p1;
  return {MeasurementRecord{qubit, outcome, double(p)}, collapse(s, qubit, outcome, p)};
}

// ---------------------------------------------------------------------------
// Reduced states and overlaps

template <typename Real>
DensityMatrix<Real> partial_trace(const DensityMatrix<Real>& rho, std::span<const int> keep) {
  detail::require(!keep.empty(), "partial trace needs at least one kept qubit");
  detail::check_qubits(keep, rho.n_qubits());
  const auto kept = detail::local_offsets(keep, rho.n_qubits());
  const auto traced = detail::local_offsets(detail::complement(keep, rho.n_qubits()), rho.n_qubits());
  const auto d = static_cast<Eigen::Index>(kept.size());
  MatrixC<Real> out = MatrixC<Real>::Zero(d, d);
  const auto& m = rho.entries();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (std::size_t e : traced) out(i, j) += m(kept[i] + e, kept[j] + e);
  // Exact Hermitian symmetrization; summation order can leave ~1e-17 skew.
  out = (out + out.adjoint()).eval() * Real(0.5);
  return DensityMatrix<Real>(std::move(out));
}

template <typename Real>
DensityMatrix<Real> partial_trace(const DensityMatrix<Real>& rho, std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

// Same as partial_trace(DensityMatrix::pure(s), keep) without forming the
// full-register density matrix.
template <typename Real>
DensityMatrix<Real> reduced_density(const StateVector<Real>& s, std::span<const int> keep) {
  detail::require(!keep.empty(), "partial trace needs at least one kept qubit");
  detail::check_qubits(keep, s.n_qubits());
  const auto kept = detail::local_offsets(keep, s.n_qubits());
  const auto traced = detail::local_offsets(detail::complement(keep, s.n_qubits()), s.n_qubits());
  MatrixC<Real> block(static_cast<Eigen::Index>(kept.size()),
                      static_cast<Eigen::Index>(traced.size()));
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t e = 0; e < traced.size(); ++e) block(i, e) = s[kept[i] + traced[e]];
  MatrixC<Real> out = block * block.adjoint();
  out = (out + out.adjoint()).eval() * Real(0.5);
  return DensityMatrix<Real>(std::move(out));
}

template <typename Real>
DensityMatrix<Real> reduced_density(const StateVector<Real>& s, std::initializer_list<int> keep) {
  return reduced_density(s, std::span<const int>(keep.begin(), keep.size()));
}

template <typename Real>
Complex<Real> inner_product(const StateVector<Real>& a, const StateVector<Real>& b) {
  detail::require(a.dim() == b.dim(), "inner product of states with different dimensions");
  return a.amplitudes().dot(b.amplitudes());  // conjugates the left argument
}

// <b| rho_a |b>
template <typename Real>
Real state_fidelity(const StateVector<Real>& a, const StateVector<Real>& b) {
  return std::norm(inner_product(a, b));
}

template <typename Real>
Real state_fidelity(const DensityMatrix<Real>& a, const StateVector<Real>& b) {
  detail::require(a.dim() == b.dim(), "fidelity of operands with different dimensions");
  return std::real(b.amplitudes().dot(a.entries() * b.amplitudes()));
}

template <typename Real>
Complex<Real> expectation(const DensityMatrix<Real>& rho, const MatrixC<Real>& observable) {
  detail::require(observable.rows() == rho.dim(), "observable dimension mismatch");
  return (rho.entries() * observable).trace();
}

// ---------------------------------------------------------------------------
// Haar sampling

/// Pure state drawn from the unitarily invariant measure on an n-qubit
/// register (normalized complex Gaussian vector).
template <typename Real = double>
StateVector<Real> haar_random_state(int n, Rng& rng) {
  detail::require(n >= 1 && n <= kMaxQubits, "register size must be in [1, 16]");
  std::normal_distribution<Real> normal;
  VectorC<Real> v(Eigen::Index{1} << n);
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const Real re = normal(rng);
    const Real im = normal(rng);
    v[k] = Complex<Real>(re, im);
  }
  return StateVector<Real>::normalize(std::move(v));
}

template <typename Real = double>
StateVector<Real> haar_random_qubit(Rng& rng) {
  return haar_random_state<Real>(1, rng);
}

}  // namespace pqgate

#endif  // PQGATE_QSTATE_HPP
