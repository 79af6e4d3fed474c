#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "subpoisson/pmf.hpp"

namespace subpoisson {

/// Three-component twin-beam model: paired photons plus independent noise on
/// each arm. Each component is an M-mode chaotic field with B mean photons
/// (photon pairs for the p component) per mode.
struct TwinBeamParams {
  double Mp = 1.0, Bp = 0.0;  // pair component
  double Ms = 1.0, Bs = 0.0;  // signal noise
  double Mi = 1.0, Bi = 0.0;  // idler noise

  void validate() const;

  double mean_pairs() const { return Mp * Bp; }
  double mean_signal() const { return Mp * Bp + Ms * Bs; }
  double mean_idler() const { return Mp * Bp + Mi * Bi; }
};

/// p(n; M, B) = Gamma(n+M) / [n! Gamma(M)] * B^n / (1+B)^(n+M), evaluated in
/// log space. M > 0 may be fractional; B >= 0.
CountDistribution mandel_rice_pmf(double M, double B, int n_max);

/// Smallest truncation bound holding mass >= 1 - tail, capped at `cap`.
int mandel_rice_support(double M, double B, double tail = 1e-12, int cap = 1 << 14);

/// Joint photon-number distribution over (n_s, n_i).
class JointPhotonDistribution {
 public:
  JointPhotonDistribution() = default;
  JointPhotonDistribution(int ns_max, int ni_max);

  int ns_max() const { return ns_max_; }
  int ni_max() const { return ni_max_; }

  double operator()(int ns, int ni) const {
    return p_[static_cast<std::size_t>(ns) * (ni_max_ + 1) + ni];
  }
  double& at(int ns, int ni) {
    return p_[static_cast<std::size_t>(ns) * (ni_max_ + 1) + ni];
  }

  double mass() const;
  CountDistribution marginal_signal() const;
  CountDistribution marginal_idler() const;

 private:
  std::vector<double> p_;
  int ns_max_ = -1, ni_max_ = -1;
};

/// Two-fold convolution of the pair component with both noise components.
/// Throws TruncationError (with a suggested bound) if the requested bounds
/// hold less than 1 - eps_trunc of the mass.
JointPhotonDistribution twb_joint_pmf(const TwinBeamParams& params, int ns_max, int ni_max,
                                      double eps_trunc = 1e-9);

/// twb_joint_pmf with adaptive truncation bounds (tail mass <= 1e-12 per axis).
JointPhotonDistribution twb_joint_pmf_auto(const TwinBeamParams& params);

/// One Monte Carlo draw of twin-beam photon numbers.
struct TwbSample {
  int n_s = 0;
  int n_i = 0;
};

/// Stream of (n_s, n_i) samples; Mandel-Rice counts are drawn by compounding a
/// gamma intensity (shape M, mean M*B) with a Poisson count, which is valid for
/// fractional M. Deterministic for a given seed.
class TwbSampler {
 public:
  TwbSampler(const TwinBeamParams& params, std::uint64_t seed);
  TwbSample operator()();

 private:
  int draw_mandel_rice(double M, double B);
  TwinBeamParams params_;
  std::mt19937_64 engine_;
};

}  // namespace subpoisson
