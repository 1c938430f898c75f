#ifndef PQGATE_TYPES_HPP
#define PQGATE_TYPES_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pqgate {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using VectorC = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using MatrixC = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

using Vector2cd = Eigen::Vector2cd;
using Matrix2cd = Eigen::Matrix2cd;

// Identities that hold exactly in real arithmetic.
inline constexpr double kExactTol = 1e-12;
// Results of composed pipelines (several gates, measurements, traces).
inline constexpr double kComposedTol = 1e-10;

inline constexpr int kMaxQubits = 16;

using QubitList = std::vector<int>;

// Qubit 0 is the leftmost ket factor and the most significant bit of an
// amplitude index.
constexpr std::size_t bit_position(int n_qubits, int qubit) {
  return static_cast<std::size_t>(n_qubits - 1 - qubit);
}

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::domain_error(message);
}

inline bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

inline int log2_exact(std::size_t x) {
  int n = 0;
  while ((std::size_t{1} << n) < x) ++n;
  return n;
}

// Checks that `qubits` are distinct and inside an n-qubit register.
inline void check_qubits(std::span<const int> qubits, int n_qubits) {
  std::uint32_t seen = 0;
  for (int q : qubits) {
    require(q >= 0 && q < n_qubits,
            "qubit index " + std::to_string(q) + " outside register of " +
                std::to_string(n_qubits));
    require((seen & (1u << q)) == 0, "duplicate qubit index " + std::to_string(q));
    seen |= 1u << q;
  }
}

// Register offsets of every basis configuration of `qubits`, with qubits[0]
// the most significant bit of the local index.
inline std::vector<std::size_t> local_offsets(std::span<const int> qubits, int n_qubits) {
  const std::size_t k = qubits.size();
  std::vector<std::size_t> offsets(std::size_t{1} << k, 0);
  for (std::size_t m = 0; m < offsets.size(); ++m) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if ((m >> (k - 1 - j)) & 1u) idx |= std::size_t{1} << bit_position(n_qubits, qubits[j]);
    }
    offsets[m] = idx;
  }
  return offsets;
}

inline QubitList complement(std::span<const int> qubits, int n_qubits) {
  QubitList rest;
  for (int q = 0; q < n_qubits; ++q) {
    bool used = false;
    for (int t : qubits) used = used || (t == q);
    if (!used) rest.push_back(q);
  }
  return rest;
}

}  // namespace detail
}  // namespace pqgate

#endif  // PQGATE_TYPES_HPP
