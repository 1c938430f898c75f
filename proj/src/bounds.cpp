#include "pqgate/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "pqgate/gates.hpp"
#include "pqgate/parallel.hpp"
#include "pqgate/pqg.hpp"

namespace pqgate::bounds {

std::complex<double> program_overlap(double alpha, double beta, int n) {
  detail::require(n >= 1, "program size must be at least 1");
  double product = 1.0;
  for (int l = 1; l <= n; ++l) product *= std::cos(std::ldexp(alpha - beta, l));
  return {product, 0.0};
}

std::complex<double> program_overlap_direct(double alpha, double beta, int n) {
  return inner_product(pqg::program_state(pqg::ProgramSpec(alpha, n)),
                       pqg::program_state(pqg::ProgramSpec(beta, n)));
}

std::vector<StateVectord> discrete_family(int m, int n) {
  detail::require(m >= 2, "discrete family needs M >= 2");
  std::vector<StateVectord> family;
  family.reserve(static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s)
    family.push_back(pqg::program_state(pqg::ProgramSpec(std::numbers::pi * s / m, n)));
  return family;
}

// ---------------------------------------------------------------------------

GramMatrix::GramMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
  detail::require(entries_.rows() == entries_.cols() && entries_.rows() >= 1,
                  "Gram matrix must be square and non-empty");
  detail::require((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= kExactTol,
                  "Gram matrix is not Hermitian");
  for (Eigen::Index i = 0; i < entries_.rows(); ++i)
    detail::require(std::abs(entries_(i, i) - 1.0) <= kExactTol, "Gram matrix diagonal must be 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(entries_, Eigen::EigenvaluesOnly);
  detail::require(solver.eigenvalues().minCoeff() >= -kComposedTol,
                  "Gram matrix is not positive semidefinite");
}

GramMatrix GramMatrix::of(std::span<const StateVectord> vectors) {
  detail::require(!vectors.empty(), "Gram matrix of an empty set");
  const auto q = static_cast<Eigen::Index>(vectors.size());
  Eigen::MatrixXcd g(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    g(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < q; ++j) {
      g(i, j) = inner_product(vectors[i], vectors[j]);
      g(j, i) = std::conj(g(i, j));
    }
  }
  return GramMatrix(std::move(g));
}

double GramMatrix::max_off_diagonal() const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < entries_.rows(); ++i)
    for (Eigen::Index j = 0; j < entries_.cols(); ++j)
      if (i != j) m = std::max(m, std::abs(entries_(i, j)));
  return m;
}

RankReport gram_rank(const GramMatrix& gram, std::optional<double> tolerance) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram.entries(), Eigen::EigenvaluesOnly);
  RankReport report;
  report.eigenvalues = solver.eigenvalues();
  const double largest = report.eigenvalues.maxCoeff();
  report.tolerance = tolerance.value_or(gram.q() * std::numeric_limits<double>::epsilon() * largest);
  report.rank = static_cast<int>((report.eigenvalues.array() > report.tolerance).count());
  return report;
}

LemmaVerdict lemma_check(std::span<const StateVectord> vectors) {
  detail::require(vectors.size() >= 2, "lemma check needs at least two vectors");
  for (const auto& v : vectors)
    detail::require(v.dim() == vectors.front().dim(), "vectors must share a dimension");
  const GramMatrix gram = GramMatrix::of(vectors);
  LemmaVerdict verdict;
  verdict.max_overlap = gram.max_off_diagonal();
  verdict.applicable = verdict.max_overlap < 1.0 / gram.q();
  verdict.rank = gram_rank(gram);
  verdict.full_rank = verdict.rank.rank == gram.q();
  return verdict;
}

LemmaBattery lemma_battery(std::size_t instances, Rng& rng) {
  LemmaBattery battery;
  std::uniform_int_distribution<int> pick_q(2, 8);
  std::uniform_real_distribution<double> pick_spread(0.0, 0.6);
  std::normal_distribution<double> normal;
  while (battery.instances < instances) {
    const int q = pick_q(rng);
    const int min_qubits = detail::log2_exact(static_cast<std::size_t>(q));
    std::uniform_int_distribution<int> pick_n(min_qubits, 6);
    const int n = pick_n(rng);
    const double spread = pick_spread(rng);
    // Columns of a Haar unitary, each tilted by a random Gaussian direction.
    const GateMatrixd basis = haar_random_unitary<double>(n, rng);
    std::vector<StateVectord> vectors;
    for (int i = 0; i < q; ++i) {
      Eigen::VectorXcd g(basis.dim());
      for (Eigen::Index k = 0; k < g.size(); ++k) {
        const double re = normal(rng);
        const double im = normal(rng);
        g[k] = {re, im};
      }
      vectors.push_back(StateVectord::normalize(basis.matrix().col(i) + spread * g.normalized()));
    }
    const LemmaVerdict verdict = lemma_check(vectors);
    if (!verdict.applicable) {
      ++battery.rejected;
      continue;
    }
    ++battery.instances;
    battery.largest_overlap = std::max(battery.largest_overlap, verdict.max_overlap);
    if (!verdict.full_rank) ++battery.violations;
  }
  return battery;
}

RemarkReport remark_statistic(int q, double nu, int samples, Rng& rng) {
  detail::require(q >= 2, "remark statistic needs q >= 2");
  detail::require(nu >= 0.0, "overlap magnitude must be non-negative");
  detail::require(samples >= 1, "remark statistic needs at least one sample");
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  RemarkReport report;
  report.heuristic = nu * std::sqrt(static_cast<double>(q));
  double sum = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::MatrixXcd off = Eigen::MatrixXcd::Zero(q, q);
    for (int i = 0; i < q; ++i)
      for (int j = i + 1; j < q; ++j) {
        off(i, j) = std::polar(nu, phase(rng));
        off(j, i) = std::conj(off(i, j));
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(off, Eigen::EigenvaluesOnly);
    const double radius = solver.eigenvalues().cwiseAbs().maxCoeff();
    sum += radius;
    report.max = std::max(report.max, radius);
  }
  report.mean = sum / samples;
  return report;
}

double min_register_qubits(double epsilon, GateKind kind) {
  detail::require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  return tau(kind) / 2.0 * std::log2(1.0 / epsilon);
}

// ---------------------------------------------------------------------------

std::vector<OverlapReport> bound_scan(std::span<const double> alphas, std::span<const double> betas,
                                      std::span<const int> ns, GateKind kind) {
  detail::require(!alphas.empty() && !betas.empty() && !ns.empty(),
                  "bound scan needs non-empty sample sets");
  constexpr double dim = 2.0;
  const std::size_t per_alpha = betas.size() * ns.size();
  return parallel_map<OverlapReport>(alphas.size() * per_alpha, [&](std::size_t idx) {
    const double a = alphas[idx / per_alpha];
    const double b = betas[(idx % per_alpha) / ns.size()];
    const int n = ns[idx % ns.size()];
    OverlapReport row;
    row.alpha = a;
    row.beta = b;
    row.n = n;
    row.overlap = program_overlap(a, b, n);
    row.distance = distance(u_alpha(a), u_alpha(b));
    row.epsilon = std::ldexp(1.0, -n);
    if (a != b) row.bound_ratio = std::abs(row.overlap) * row.distance /
                                  (std::pow(row.epsilon, tau(kind)) * dim);
    return row;
  });
}

ScanSummary summarize(std::span<const OverlapReport> rows) {
  ScanSummary summary;
  summary.rows = rows.size();
  for (const auto& r : rows) {
    if (!r.bound_ratio) continue;
    ++summary.ratio_rows;
    summary.max_bound_ratio = std::max(summary.max_bound_ratio, *r.bound_ratio);
  }
  std::size_t begin = 0;
  while (begin < rows.size()) {
    std::size_t end = begin;
    while (end < rows.size() && rows[end].alpha == rows[begin].alpha &&
           rows[end].beta == rows[begin].beta)
      ++end;
    std::vector<std::pair<int, double>> by_n;
    for (std::size_t i = begin; i < end; ++i) by_n.emplace_back(rows[i].n, std::abs(rows[i].overlap));
    std::sort(by_n.begin(), by_n.end());
    for (std::size_t i = 1; i < by_n.size(); ++i)
      if (by_n[i].second > by_n[i - 1].second + kExactTol) summary.overlap_monotone = false;
    begin = end;
  }
  return summary;
}

std::vector<double> angle_grid(int count) {
  detail::require(count >= 1, "grid needs at least one point");
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) grid[j] = std::numbers::pi * j / count;
  return grid;
}

}  // namespace pqgate::bounds
