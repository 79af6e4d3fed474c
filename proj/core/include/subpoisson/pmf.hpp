#pragma once

#include <span>
#include <vector>

#include "subpoisson/errors.hpp"

namespace subpoisson {

/// Truncated probability distribution over a count variable n = 0..n_max.
/// Used both for photon numbers and for detector photocounts; entries are
/// nonnegative and sum to 1 up to the truncation tolerance of the producer.
class CountDistribution {
 public:
  CountDistribution() = default;
  explicit CountDistribution(std::vector<double> probs);

  static CountDistribution delta(int n, int n_max = -1);
  static CountDistribution poisson(double mean, double tail = 1e-13, int cap = 1 << 16);
  static CountDistribution uniform(int n_max);

  int n_max() const { return static_cast<int>(p_.size()) - 1; }
  int size() const { return static_cast<int>(p_.size()); }
  bool empty() const { return p_.empty(); }

  /// Probability of n; 0 outside the stored range.
  double operator[](int n) const {
    return (n >= 0 && n < size()) ? p_[static_cast<std::size_t>(n)] : 0.0;
  }

  std::span<const double> probs() const { return p_; }
  std::vector<double>& raw() { return p_; }

  double total() const;
  double mean() const;
  double variance() const;

  CountDistribution normalized() const;
  /// Throws TruncationError if |total - 1| > eps.
  void check_normalized(double eps) const;

 private:
  std::vector<double> p_;
};

/// Convolution of two count distributions (sum of independent counts).
CountDistribution convolve(const CountDistribution& a, const CountDistribution& b);

/// Total variation distance, treating entries beyond either support as zero.
double total_variation(const CountDistribution& a, const CountDistribution& b);

/// Smallest n_max whose cumulative mass reaches 1 - tail; `probs` may be any
/// nonnegative vector summing to ~1.
int support_bound(std::span<const double> probs, double tail);

}  // namespace subpoisson
