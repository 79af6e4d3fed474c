#include "subpoisson/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace subpoisson {

CountDistribution::CountDistribution(std::vector<double> probs) : p_(std::move(probs)) {
  for (double v : p_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ParameterDomainError("distribution entries must be finite and nonnegative");
    }
  }
}

CountDistribution CountDistribution::delta(int n, int n_max) {
  if (n < 0) throw ParameterDomainError("delta: n must be nonnegative");
  if (n_max < n) n_max = n;
  std::vector<double> p(static_cast<std::size_t>(n_max) + 1, 0.0);
  p[static_cast<std::size_t>(n)] = 1.0;
  return CountDistribution(std::move(p));
}

CountDistribution CountDistribution::poisson(double mean, double tail, int cap) {
  if (mean < 0.0) throw ParameterDomainError("poisson: mean must be nonnegative");
  std::vector<double> p;
  double logp = -mean;  // log p(0)
  double cum = 0.0;
  for (int n = 0; n <= cap; ++n) {
    if (n > 0) logp += std::log(mean) - std::log(static_cast<double>(n));
    double v = std::exp(logp);
    p.push_back(v);
    cum += v;
    if (n >= mean && 1.0 - cum <= tail) break;
  }
  return CountDistribution(std::move(p));
}

CountDistribution CountDistribution::uniform(int n_max) {
  if (n_max < 0) throw ParameterDomainError("uniform: n_max must be nonnegative");
  std::vector<double> p(static_cast<std::size_t>(n_max) + 1, 1.0 / (n_max + 1));
  return CountDistribution(std::move(p));
}

double CountDistribution::total() const {
  return std::accumulate(p_.begin(), p_.end(), 0.0);
}

double CountDistribution::mean() const {
  double m = 0.0;
  for (std::size_t n = 0; n < p_.size(); ++n) m += static_cast<double>(n) * p_[n];
  return m;
}

double CountDistribution::variance() const {
  double m = mean();
  double v = 0.0;
  for (std::size_t n = 0; n < p_.size(); ++n) {
    double d = static_cast<double>(n) - m;
    v += d * d * p_[n];
  }
  return v;
}

CountDistribution CountDistribution::normalized() const {
  double t = total();
  if (t <= 0.0) throw ConditioningError("cannot normalize a zero distribution");
  std::vector<double> p(p_);
  for (double& v : p) v /= t;
  return CountDistribution(std::move(p));
}

void CountDistribution::check_normalized(double eps) const {
  double t = total();
  if (std::abs(t - 1.0) > eps) {
    throw TruncationError("distribution mass " + std::to_string(t) + " deviates from 1 beyond " +
                              std::to_string(eps),
                          n_max() + 1);
  }
}

CountDistribution convolve(const CountDistribution& a, const CountDistribution& b) {
  if (a.empty() || b.empty()) throw DimensionError("convolve: empty distribution");
  std::vector<double> out(static_cast<std::size_t>(a.n_max() + b.n_max()) + 1, 0.0);
  for (int i = 0; i <= a.n_max(); ++i) {
    if (a[i] == 0.0) continue;
    for (int j = 0; j <= b.n_max(); ++j) out[static_cast<std::size_t>(i + j)] += a[i] * b[j];
  }
  return CountDistribution(std::move(out));
}

double total_variation(const CountDistribution& a, const CountDistribution& b) {
  int n = std::max(a.n_max(), b.n_max());
  double tv = 0.0;
  for (int i = 0; i <= n; ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

int support_bound(std::span<const double> probs, double tail) {
  double cum = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n) {
    cum += probs[n];
    if (1.0 - cum <= tail) return static_cast<int>(n);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace subpoisson
