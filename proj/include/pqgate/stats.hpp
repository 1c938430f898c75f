#ifndef PQGATE_STATS_HPP
#define PQGATE_STATS_HPP

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace pqgate::stats {

// Two-sided tail mass beyond 3 standard deviations of a normal law.
inline constexpr double kThreeSigmaTail = 0.0026997960632601866;

struct Summary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
  std::size_t count = 0;
};

Summary summarize(std::span<const double> samples);

/// Proportion test: |observed - expected| <= sigmas * sqrt(p(1-p)/n).
struct ProportionCheck {
  double observed = 0.0;
  double expected = 0.0;
  double sigma = 0.0;
  double z = 0.0;
  bool passed = false;
};

ProportionCheck proportion_check(std::size_t hits, std::size_t trials, double expected,
                                 double sigmas = 3.0);

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double critical = 0.0;  // rejection threshold at the 3-sigma tail mass
  double p_value = 0.0;
  bool rejected = false;
};

/// Goodness of fit of integer counts k = 1, 2, ... against P(k) = 2^-k.
/// Bins with expected count below 5 are pooled into a final tail bin.
ChiSquare geometric_half_fit(const std::map<int, std::size_t>& counts, std::size_t total);

/// Two-sample Kolmogorov-Smirnov statistic for integer-valued samples and
/// the critical value at the 3-sigma tail mass.
struct KolmogorovSmirnov {
  double statistic = 0.0;
  double critical = 0.0;
  bool separated = false;
};

KolmogorovSmirnov ks_two_sample(std::span<const int> a, std::span<const int> b);

}  // namespace pqgate::stats

#endif  // PQGATE_STATS_HPP
