#include "pqgate/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

namespace pqgate::stats {

Summary summarize(std::span<const double> samples) {
  Summary s;
  s.count = samples.size();
  if (samples.empty()) return s;
  double sum = 0.0;
  for (double x : samples) sum += x;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / static_cast<double>(s.count - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(s.count));
  }
  return s;
}

ProportionCheck proportion_check(std::size_t hits, std::size_t trials, double expected,
                                 double sigmas) {
  ProportionCheck c;
  c.expected = expected;
  c.observed = trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials);
  c.sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(trials));
  c.z = c.sigma > 0.0 ? (c.observed - expected) / c.sigma : 0.0;
  c.passed = std::abs(c.observed - expected) <= sigmas * c.sigma;
  return c;
}

ChiSquare geometric_half_fit(const std::map<int, std::size_t>& counts, std::size_t total) {
  const double n = static_cast<double>(total);
  std::vector<double> observed, expected;
  double tail_p = 1.0;
  int k = 1;
  // Open bins while both this bin and the remaining tail keep >= 5 expected.
  while (n * std::ldexp(1.0, -k) >= 5.0 && n * (tail_p - std::ldexp(1.0, -k)) >= 5.0) {
    const auto it = counts.find(k);
    observed.push_back(it == counts.end() ? 0.0 : static_cast<double>(it->second));
    expected.push_back(n * std::ldexp(1.0, -k));
    tail_p -= std::ldexp(1.0, -k);
    ++k;
  }
  double tail_obs = 0.0;
  for (const auto& [value, count] : counts)
    if (value >= k) tail_obs += static_cast<double>(count);
  observed.push_back(tail_obs);
  expected.push_back(n * tail_p);

  ChiSquare out;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    out.statistic += d * d / expected[i];
  }
  out.dof = static_cast<int>(observed.size()) - 1;
  if (out.dof < 1) return out;
  const boost::math::chi_squared dist(out.dof);
  out.critical = boost::math::quantile(boost::math::complement(dist, kThreeSigmaTail));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  out.rejected = out.statistic > out.critical;
  return out;
}

KolmogorovSmirnov ks_two_sample(std::span<const int> a, std::span<const int> b) {
  std::vector<int> xs(a.begin(), a.end()), ys(b.begin(), b.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  KolmogorovSmirnov out;
  if (xs.empty() || ys.empty()) return out;
  std::vector<int> support(xs);
  support.insert(support.end(), ys.begin(), ys.end());
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  const double na = static_cast<double>(xs.size());
  const double nb = static_cast<double>(ys.size());
  for (int v : support) {
    const double fa = static_cast<double>(std::upper_bound(xs.begin(), xs.end(), v) - xs.begin()) / na;
    const double fb = static_cast<double>(std::upper_bound(ys.begin(), ys.end(), v) - ys.begin()) / nb;
    out.statistic = std::max(out.statistic, std::abs(fa - fb));
  }
  // c(a) = sqrt(-ln(a/2) / 2) scaled by the effective sample size.
  const double c = std::sqrt(-std::log(kThreeSigmaTail / 2.0) / 2.0);
  out.critical = c * std::sqrt((na + nb) / (na * nb));
  out.separated = out.statistic > out.critical;
  return out;
}

}  // namespace pqgate::stats
