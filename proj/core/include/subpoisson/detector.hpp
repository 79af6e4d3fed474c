#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "subpoisson/distributions.hpp"
#include "subpoisson/pmf.hpp"

namespace subpoisson {

/// iCCD detection region: N active pixels, detection efficiency eta, mean dark
/// count probability D per pixel and pulse.
struct DetectorParams {
  long long N = 1;
  double eta = 1.0;
  double D = 0.0;

  void validate() const;

  /// D = d / N for a total mean dark rate d per pulse.
  static DetectorParams with_total_dark(long long N, double eta, double d);
};

/// T(c, n): probability of c photocounts given n photons in the region.
/// Columns are probability distributions over c = 0..N.
class DetectionMatrix {
 public:
  DetectionMatrix() = default;
  DetectionMatrix(DetectorParams params, int c_max, int n_max, std::vector<double> entries);

  static DetectionMatrix identity(int size);

  double operator()(int c, int n) const {
    return t_[static_cast<std::size_t>(c) * (n_max_ + 1) + n];
  }
  int c_max() const { return c_max_; }
  int n_max() const { return n_max_; }
  const DetectorParams& params() const { return params_; }

  double column_sum(int n) const;
  /// CSV dump (rows c, columns n) for debugging.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<double> t_;
  DetectorParams params_{};
  int c_max_ = -1, n_max_ = -1;
};

/// Exact detection matrix. Evaluated through the registered-pixel occupancy
/// recursion convolved with the dark-count binomial; all terms are positive, so
/// the result is stable for any N (the closed-form alternating binomial sum
/// cancels catastrophically for N ~ 10^3 and c > ~5, see
/// detection_matrix_alternating). Throws if c_max > N.
DetectionMatrix detection_matrix(const DetectorParams& params, int c_max, int n_max);

/// Literal alternating-sum evaluation of the same matrix (log-magnitude terms,
/// compensated summation). Only trustworthy for small N and c; kept as a
/// cross-check of detection_matrix.
DetectionMatrix detection_matrix_alternating(const DetectorParams& params, int c_max, int n_max);

/// Smallest c_max such that every column n <= n_max keeps mass >= 1 - tail,
/// capped at N.
int suggest_c_max(const DetectorParams& params, int n_max, double tail = 1e-13);

/// Pixel-level Monte Carlo of the detection model: n photons land uniformly on
/// N pixels, register with probability eta, dark events fire per pixel with
/// probability D; returns the empirical photocount frequencies over c.
CountDistribution mc_sample_detection(const DetectorParams& params, int n, long long shots,
                                      std::uint64_t seed);

/// One Monte Carlo detector response draw for n photons (used by simulators).
int sample_photocount(const DetectorParams& params, int n, std::mt19937_64& engine);

/// Photocount distribution Sum_n T(c, n) p(n).
CountDistribution forward_photocount(const CountDistribution& dist, const DetectionMatrix& mat);

/// Expected photocount distribution of the signal arm: f_s(c_s) = Sum T_s p_si.
CountDistribution forward_signal_marginal(const JointPhotonDistribution& joint,
                                          const DetectionMatrix& mat_s);

/// Conditional idler photon-number distribution after observing c_s signal
/// photocounts; throws ConditioningError when f_s(c_s) vanishes.
CountDistribution conditional_theoretical(const JointPhotonDistribution& joint,
                                          const DetectionMatrix& mat_s, int c_s);

}  // namespace subpoisson
