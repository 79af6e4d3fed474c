#pragma once

#include <span>
#include <vector>

#include "subpoisson/pmf.hpp"

namespace subpoisson {

/// Moments of a count distribution up to order k_max. Index k runs 1..k_max;
/// element [k] of each vector is the order-k moment ([0] is 1 resp. 0).
/// intensity[k] = <W^k> = <n(n-1)...(n-k+1)>, raw[k] = <n^k>,
/// central[k] = <(n - <n>)^k>.
struct MomentSet {
  int k_max = 0;
  std::vector<double> intensity;
  std::vector<double> raw;
  std::vector<double> central;
  double mean = 0.0;      // <n> = <W>
  double tail_bias = 0.0; // upper bound on the truncation bias of intensity[k_max]

  bool tail_warning() const { return tail_bias > 1e-9; }
};

/// Stirling number of the second kind, S(k, l). Stable recurrence
/// S(k+1, l) = l S(k, l) + S(k, l-1). Requires 1 <= l <= k.
double stirling2(int k, int l);

/// Factorial (normally-ordered intensity) moments <W^k> for k = 1..k_max.
std::vector<double> factorial_moments(const CountDistribution& dist, int k_max);

/// <n^k> = Sum_l S(k, l) <W^l>. Input indexed like factorial_moments output
/// (element [k] is order k; [0] ignored).
std::vector<double> stirling_transform(std::span<const double> intensity_moments);

/// Raw and central moments of a Poissonian field of the given mean.
/// Raw moments via the Stirling transform of mean^l; central moments use the
/// closed forms for k <= 5 and the binomial expansion beyond.
struct PoissonMoments {
  std::vector<double> raw;
  std::vector<double> central;
};
PoissonMoments poisson_reference(double mean, int k_max);

/// Central moments <(n - <n>)^k> by direct summation.
std::vector<double> central_moments(const CountDistribution& dist, int k_max);
/// Central moments from raw moments via the binomial expansion around raw[1].
std::vector<double> central_from_raw(std::span<const double> raw);
/// Central intensity moments <(W - <W>)^k> from factorial moments.
std::vector<double> central_intensity_moments(std::span<const double> intensity);

/// Fano factor <(Delta n)^2> / <n>; throws UndefinedValueError for zero mean.
double fano(const CountDistribution& dist);

MomentSet compute_moments(const CountDistribution& dist, int k_max);

/// How added thermal noise enters the s-ordered moments.
///   same_mode: noise superposes on the field amplitude (Cahill-Glauber
///     ordering; the Laguerre closed form). This is what the nonclassicality
///     depth refers to.
///   independent: noise adds as a statistically independent intensity
///     (binomial convolution of factorial moments with k! mu^k).
enum class NoiseCoupling { same_mode, independent };

/// s-ordered intensity moments <W^k>_s, k = 1..k_max.
struct SOrderedMomentSet {
  double s = 1.0;
  double mu = 0.0;  // (1 - s)/2, mean of the added thermal noise
  int k_max = 0;
  NoiseCoupling coupling = NoiseCoupling::same_mode;
  std::vector<double> moments;  // [k] = <W^k>_s, [0] = 1
};

SOrderedMomentSet s_ordered_moments(const CountDistribution& dist, double s, int k_max,
                                    NoiseCoupling coupling = NoiseCoupling::same_mode);

/// Same transform applied to precomputed factorial moments (element [k] is
/// order k, [0] = 1).
std::vector<double> s_ordered_from_factorial(std::span<const double> intensity, double mu,
                                             NoiseCoupling coupling = NoiseCoupling::same_mode);

/// Closed-form route k! mu^k <L_k(-W/mu)> with the Laguerre polynomial expanded
/// over the factorial moments; equals the same_mode transform term by term.
std::vector<double> s_ordered_laguerre(std::span<const double> intensity, double mu);

/// Photon-number element p(k) from a sampled intensity distribution P(W) via
/// quadrature of W^k exp(-W) P(W) / k! on the grid (trapezoid). P must be
/// nonnegative; classical-oracle use only.
double mandel_transform(std::span<const double> grid, std::span<const double> density, int k);

}  // namespace subpoisson
