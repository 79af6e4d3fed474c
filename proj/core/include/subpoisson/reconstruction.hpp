#pragma once

#include <span>
#include <string>
#include <vector>

#include "subpoisson/detector.hpp"
#include "subpoisson/moments.hpp"
#include "subpoisson/pmf.hpp"

namespace subpoisson {

struct EMConfig {
  int max_iters = 10000;
  double tol = 1e-10;        // relative log-likelihood change
  double floor = 1e-12;      // probability floor (multiplicative updates keep zeros)
  void validate() const;
};

struct EMDiagnostics {
  int iterations = 0;
  double log_likelihood = 0.0;
  bool converged = false;
  bool monotone = true;          // EM guarantee; tracked every step
  double worst_decrease = 0.0;   // largest observed decrease (roundoff scale)
};

/// One multiplicative update of p(n) against the photocount frequencies.
/// `hist` must be normalized; `current` strictly positive on its support.
CountDistribution em_step(const CountDistribution& current, const CountDistribution& hist,
                          const DetectionMatrix& mat);

/// Iterate em_step from `start` until the relative log-likelihood change drops
/// below config.tol or max_iters is hit (result then carries converged=false).
std::pair<CountDistribution, EMDiagnostics> em_run(const CountDistribution& start,
                                                   const CountDistribution& hist,
                                                   const DetectionMatrix& mat,
                                                   const EMConfig& config = {});

/// em_run from the uniform start over n <= n_max.
std::pair<CountDistribution, EMDiagnostics> em_reconstruct(const CountDistribution& hist,
                                                           const DetectionMatrix& mat,
                                                           const EMConfig& config = {});

/// Reconstruction support bound: 4 x mean photocount / eta (configurable factor).
int reconstruction_support(const CountDistribution& hist, double eta, double factor = 4.0);

/// Declination series of the s-ordered intensity quasi-distribution from the
/// Poissonian reference:
///   dP(W) = exp(-W/a) Sum_j c_j L_j(W/a),   a = <W>_s,
///   c_j = (j!/a) Sum_l (-1)^l r^(l) / ((l!)^2 (j-l)!),  r^(l) = <W^l>_s/a^l - 1.
/// The Laguerre argument is +W/a: that choice (and only that choice) makes
/// every j >= 1 term integrate to zero, so the series integrates to zero.
std::vector<double> quasi_delta(const SOrderedMomentSet& moments, std::span<const double> grid,
                                int order);

/// s-ordered intensity quasi-distribution of a Poissonian field of the given
/// mean: a point intensity smoothed by thermal noise mu = (1-s)/2 across
/// `modes` modes (noncentral-chi-squared law, modified Bessel of order M-1).
std::vector<double> poisson_quasi(double mean, double s, double modes,
                                  std::span<const double> grid);

/// Exact s-ordered quasi-distribution of a count distribution: mixture of the
/// smoothed Fock-state kernels. Numerically reliable for mu = (1-s)/2 >~ 0.45
/// (smaller mu alternates catastrophically); used as the reference for the
/// series route.
std::vector<double> exact_quasi(const CountDistribution& dist, double s,
                                std::span<const double> grid);

struct QuasiConfig {
  int order = 10;            // series order J
  int grid_points = 2000;
  double grid_span = 5.0;    // grid covers [0, grid_span * <W>_s]
  double modes = 1.0;        // Poissonian reference modes
  double negativity_rel = 5e-3;  // flag when min < -rel * peak of the reference
};

struct QuasiDistribution {
  double s = 1.0;
  int order = 0;
  std::vector<double> grid;      // W values
  std::vector<double> reference; // Poissonian quasi-distribution, same mean
  std::vector<double> delta;     // declination series
  std::vector<double> total;     // reference + delta
  double min_value = 0.0;
  double min_at = 0.0;
  bool negative = false;
  double series_step = 0.0;      // sup |series(J) - series(J-2)|, truncation scale
};

/// P = P_Pois (matched s-ordered mean) + dP on a grid, with negativity report.
QuasiDistribution quasi_distribution(const CountDistribution& dist, double s,
                                     const QuasiConfig& config = {});

}  // namespace subpoisson
