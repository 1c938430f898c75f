#ifndef PQGATE_BOUNDS_HPP
#define PQGATE_BOUNDS_HPP

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "pqgate/qstate.hpp"
#include "pqgate/rng.hpp"

// Distinguishability of program states and program-register size bounds.
namespace pqgate::bounds {

// tau = 1 for probabilistic gates, 1/2 for approximate ones.
enum class GateKind { probabilistic, approximate };

constexpr double tau(GateKind kind) { return kind == GateKind::probabilistic ? 1.0 : 0.5; }

/// <P_alpha|P_beta> = prod_{l=1..N} cos(2^l (alpha - beta)) for the stored
/// program (x)_{l=1..N} |2^l alpha>.
std::complex<double> program_overlap(double alpha, double beta, int n);

/// Same quantity as a direct inner product of the two program states.
std::complex<double> program_overlap_direct(double alpha, double beta, int n);

/// Program states for alpha_s = pi s / M, s = 0..M-1.
std::vector<StateVectord> discrete_family(int m, int n);

/// Matrix of pairwise inner products N_ij = <psi_i|psi_j>.
class GramMatrix {
 public:
  explicit GramMatrix(Eigen::MatrixXcd entries);
  static GramMatrix of(std::span<const StateVectord> vectors);

  int q() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXcd& entries() const { return entries_; }
  // max_{i != j} |N_ij|
  double max_off_diagonal() const;

 private:
  Eigen::MatrixXcd entries_;
};

struct RankReport {
  int rank = 0;
  double tolerance = 0.0;
  Eigen::VectorXd eigenvalues;  // ascending
};

/// Number of eigenvalues above `tolerance`; defaults to
/// q * machine epsilon * largest eigenvalue.
RankReport gram_rank(const GramMatrix& gram, std::optional<double> tolerance = std::nullopt);

struct LemmaVerdict {
  bool applicable = false;  // max off-diagonal |nu| < 1/q
  bool full_rank = false;
  double max_overlap = 0.0;
  RankReport rank;
};

/// Applicable sets must come out full rank; inapplicable sets carry no claim.
LemmaVerdict lemma_check(std::span<const StateVectord> vectors);

/// Random near-orthonormal sets (q in [2, 8], dimension <= 64) drawn until
/// `instances` of them satisfy the lemma's hypothesis; each is then checked
/// for full rank.
struct LemmaBattery {
  std::size_t instances = 0;   // applicable instances checked
  std::size_t rejected = 0;    // draws that missed the hypothesis
  std::size_t violations = 0;  // applicable but rank deficient
  double largest_overlap = 0.0;
};

LemmaBattery lemma_battery(std::size_t instances, Rng& rng);

struct RemarkReport {
  double mean = 0.0;       // mean spectral radius of N - I over the samples
  double max = 0.0;
  double heuristic = 0.0;  // nu * sqrt(q)
};

/// Spectral radius of N - I for random Hermitian N with unit diagonal and
/// off-diagonal entries nu * e^{i phi}, phi uniform.
RemarkReport remark_statistic(int q, double nu, int samples, Rng& rng);

/// (tau / 2) log2(1 / epsilon), for 0 < epsilon < 1.
double min_register_qubits(double epsilon, GateKind kind);

struct OverlapReport {
  double alpha = 0.0;
  double beta = 0.0;
  int n = 0;
  std::complex<double> overlap;
  double distance = 0.0;  // D(U_alpha, U_beta)
  double epsilon = 0.0;
  // |nu| D / (eps^tau * dim); empty when alpha == beta (distance 0).
  std::optional<double> bound_ratio;
};

/// One report per (alpha, beta, N) triple, ordered alpha-major, then beta,
/// then N in the order given.
std::vector<OverlapReport> bound_scan(std::span<const double> alphas, std::span<const double> betas,
                                      std::span<const int> ns,
                                      GateKind kind = GateKind::probabilistic);

struct ScanSummary {
  std::size_t rows = 0;
  std::size_t ratio_rows = 0;  // rows with a defined bound_ratio
  double max_bound_ratio = 0.0;
  // |nu| never increases with N at fixed (alpha, beta).
  bool overlap_monotone = true;
};

ScanSummary summarize(std::span<const OverlapReport> rows);

/// Evenly spaced angles pi * j / count, j = 0..count-1.
std::vector<double> angle_grid(int count);

}  // namespace pqgate::bounds

#endif  // PQGATE_BOUNDS_HPP
