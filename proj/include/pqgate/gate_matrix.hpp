#ifndef PQGATE_GATE_MATRIX_HPP
#define PQGATE_GATE_MATRIX_HPP

#include <utility>

#include "pqgate/types.hpp"

namespace pqgate {

/// Unitary acting on `arity` qubits. Construction checks G^dagger G = I.
template <typename Real>
class GateMatrix {
 public:
  using Matrix = MatrixC<Real>;

  explicit GateMatrix(Matrix matrix) : matrix_(std::move(matrix)) {
    detail::require(matrix_.rows() == matrix_.cols(), "gate matrix must be square");
    detail::require(matrix_.rows() >= 2 &&
                        detail::is_power_of_two(static_cast<std::size_t>(matrix_.rows())),
                    "gate dimension must be a power of two");
    arity_ = detail::log2_exact(static_cast<std::size_t>(matrix_.rows()));
    detail::require(arity_ <= kMaxQubits, "gate arity exceeds register limit");
    const Real defect = unitarity_defect(matrix_);
    detail::require(defect <= Real(kExactTol),
                    "gate matrix is not unitary (defect " + std::to_string(double(defect)) + ")");
  }

  int arity() const { return arity_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }

  GateMatrix adjoint() const { return GateMatrix(matrix_.adjoint(), Trusted{}); }

  friend GateMatrix operator*(const GateMatrix& a, const GateMatrix& b) {
    detail::require(a.arity_ == b.arity_, "gate product needs equal arity");
    return GateMatrix(a.matrix_ * b.matrix_);
  }

  // Largest entry of |G^dagger G - I|.
  static Real unitarity_defect(const Matrix& m) {
    const Matrix gram = m.adjoint() * m;
    return (gram - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
  }

 private:
  struct Trusted {};
  GateMatrix(Matrix matrix, Trusted) : matrix_(std::move(matrix)) {
    arity_ = detail::log2_exact(static_cast<std::size_t>(matrix_.rows()));
  }

  Matrix matrix_;
  int arity_ = 0;
};

using GateMatrixd = GateMatrix<double>;

}  // namespace pqgate

#endif  // PQGATE_GATE_MATRIX_HPP
