// Brute-force reference implementations used only by the tests. They share
// no code with the library beyond the value types.
#ifndef PQGATE_TESTS_ORACLES_HPP
#define PQGATE_TESTS_ORACLES_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

inline int bit(std::size_t index, int qubit, int n) { return static_cast<int>((index >> (n - 1 - qubit)) & 1U); }

// Full 2^n x 2^n matrix of gate g on the ordered target list, element by
// element: <i|G|j> = g(local(i), local(j)) when the spectator bits agree.
inline Mat full_matrix(const Mat& g, const std::vector<int>& targets, int n) {
  const std::size_t dim = std::size_t{1} << n;
  Mat out = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::size_t target_mask = 0;
  for (int t : targets) target_mask |= std::size_t{1} << (n - 1 - t);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      if ((i & ~target_mask) != (j & ~target_mask)) continue;
      std::size_t li = 0, lj = 0;
      for (int t : targets) {
        li = (li << 1) | static_cast<std::size_t>(bit(i, t, n));
        lj = (lj << 1) | static_cast<std::size_t>(bit(j, t, n));
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          g(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(lj));
    }
  return out;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

// Partial trace by explicit summation over the traced-out bits.
inline Mat trace_out(const Mat& rho, const std::vector<int>& keep, int n) {
  const int k = static_cast<int>(keep.size());
  Mat out = Mat::Zero(Eigen::Index{1} << k, Eigen::Index{1} << k);
  const std::size_t dim = std::size_t{1} << n;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      bool same_rest = true;
      for (int q = 0; q < n && same_rest; ++q) {
        bool kept = false;
        for (int kq : keep) kept = kept || kq == q;
        if (!kept && bit(i, q, n) != bit(j, q, n)) same_rest = false;
      }
      if (!same_rest) continue;
      std::size_t li = 0, lj = 0;
      for (int kq : keep) {
        li = (li << 1) | static_cast<std::size_t>(bit(i, kq, n));
        lj = (lj << 1) | static_cast<std::size_t>(bit(j, kq, n));
      }
      out(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(lj)) +=
          rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  return out;
}

inline Mat diag2(cd a, cd b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

inline Mat rot_z(double a) { return diag2(std::polar(1.0, a), std::polar(1.0, -a)); }

inline Vec equatorial(double a) {
  Vec v(2);
  v << std::polar(1.0, a) / std::sqrt(2.0), std::polar(1.0, -a) / std::sqrt(2.0);
  return v;
}

inline double fidelity(const Vec& a, const Vec& b) { return std::norm(a.dot(b)); }

}  // namespace oracle

#endif  // PQGATE_TESTS_ORACLES_HPP
