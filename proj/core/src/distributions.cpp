#include "subpoisson/distributions.hpp"

#include <algorithm>
#include <cmath>

namespace subpoisson {

void TwinBeamParams::validate() const {
  if (!(Mp > 0.0) || !(Ms > 0.0) || !(Mi > 0.0)) {
    throw ParameterDomainError("twin-beam mode counts must be positive");
  }
  if (Bp < 0.0 || Bs < 0.0 || Bi < 0.0) {
    throw ParameterDomainError("twin-beam per-mode means must be nonnegative");
  }
  if (!std::isfinite(Mp * Bp)) {
    throw ParameterDomainError("pair mean M_p * B_p must be finite");
  }
}

CountDistribution mandel_rice_pmf(double M, double B, int n_max) {
  if (!(M > 0.0)) throw ParameterDomainError("mandel_rice_pmf: M must be positive");
  if (B < 0.0) throw ParameterDomainError("mandel_rice_pmf: B must be nonnegative");
  if (n_max < 0) throw ParameterDomainError("mandel_rice_pmf: n_max must be nonnegative");
  std::vector<double> p(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (B == 0.0) {
    p[0] = 1.0;
    return CountDistribution(std::move(p));
  }
  const double log_b = std::log(B);
  const double log_1b = std::log1p(B);
  const double lg_m = std::lgamma(M);
  for (int n = 0; n <= n_max; ++n) {
    double logp = std::lgamma(n + M) - std::lgamma(n + 1.0) - lg_m + n * log_b - (n + M) * log_1b;
    p[static_cast<std::size_t>(n)] = std::exp(logp);
  }
  return CountDistribution(std::move(p));
}

int mandel_rice_support(double M, double B, double tail, int cap) {
  if (!(M > 0.0)) throw ParameterDomainError("mandel_rice_support: M must be positive");
  if (B <= 0.0) return 0;
  const double log_b = std::log(B);
  const double log_1b = std::log1p(B);
  const double lg_m = std::lgamma(M);
  double cum = 0.0;
  const double mean = M * B;
  for (int n = 0; n <= cap; ++n) {
    double logp = std::lgamma(n + M) - std::lgamma(n + 1.0) - lg_m + n * log_b - (n + M) * log_1b;
    cum += std::exp(logp);
    if (n >= mean && 1.0 - cum <= tail) return n;
  }
  return cap;
}

JointPhotonDistribution::JointPhotonDistribution(int ns_max, int ni_max)
    : p_(static_cast<std::size_t>(ns_max + 1) * (ni_max + 1), 0.0),
      ns_max_(ns_max),
      ni_max_(ni_max) {}

double JointPhotonDistribution::mass() const {
  double m = 0.0;
  for (double v : p_) m += v;
  return m;
}

CountDistribution JointPhotonDistribution::marginal_signal() const {
  std::vector<double> m(static_cast<std::size_t>(ns_max_) + 1, 0.0);
  for (int ns = 0; ns <= ns_max_; ++ns) {
    double acc = 0.0;
    for (int ni = 0; ni <= ni_max_; ++ni) acc += (*this)(ns, ni);
    m[static_cast<std::size_t>(ns)] = acc;
  }
  return CountDistribution(std::move(m));
}

CountDistribution JointPhotonDistribution::marginal_idler() const {
  std::vector<double> m(static_cast<std::size_t>(ni_max_) + 1, 0.0);
  for (int ns = 0; ns <= ns_max_; ++ns) {
    for (int ni = 0; ni <= ni_max_; ++ni) m[static_cast<std::size_t>(ni)] += (*this)(ns, ni);
  }
  return CountDistribution(std::move(m));
}

JointPhotonDistribution twb_joint_pmf(const TwinBeamParams& params, int ns_max, int ni_max,
                                      double eps_trunc) {
  params.validate();
  if (ns_max < 0 || ni_max < 0) throw ParameterDomainError("twb_joint_pmf: negative bounds");
  const int pair_max = std::min(ns_max, ni_max);
  const CountDistribution pair = mandel_rice_pmf(params.Mp, params.Bp, pair_max);
  const CountDistribution noise_s = mandel_rice_pmf(params.Ms, params.Bs, ns_max);
  const CountDistribution noise_i = mandel_rice_pmf(params.Mi, params.Bi, ni_max);

  JointPhotonDistribution joint(ns_max, ni_max);
  for (int n = 0; n <= pair_max; ++n) {
    const double pn = pair[n];
    if (pn == 0.0) continue;
    for (int ns = n; ns <= ns_max; ++ns) {
      const double w = pn * noise_s[ns - n];
      if (w == 0.0) continue;
      for (int ni = n; ni <= ni_max; ++ni) {
        joint.at(ns, ni) += w * noise_i[ni - n];
      }
    }
  }

  const double mass = joint.mass();
  if (mass < 1.0 - eps_trunc) {
    int suggest_s = mandel_rice_support(params.Mp, params.Bp) +
                    mandel_rice_support(params.Ms, params.Bs);
    int suggest_i = mandel_rice_support(params.Mp, params.Bp) +
                    mandel_rice_support(params.Mi, params.Bi);
    throw TruncationError("twb_joint_pmf: bounds hold mass " + std::to_string(mass),
                          std::max(suggest_s, suggest_i));
  }
  return joint;
}

JointPhotonDistribution twb_joint_pmf_auto(const TwinBeamParams& params) {
  params.validate();
  const double tail = 1e-13;
  int ns = mandel_rice_support(params.Mp, params.Bp, tail) +
           mandel_rice_support(params.Ms, params.Bs, tail);
  int ni = mandel_rice_support(params.Mp, params.Bp, tail) +
           mandel_rice_support(params.Mi, params.Bi, tail);
  return twb_joint_pmf(params, ns, ni, 1e-9);
}

TwbSampler::TwbSampler(const TwinBeamParams& params, std::uint64_t seed)
    : params_(params), engine_(seed) {
  params_.validate();
}

int TwbSampler::draw_mandel_rice(double M, double B) {
  if (B == 0.0) return 0;
  // Gamma(shape M, mean M*B) intensity compounded with a Poisson count: exactly
  // the Mandel-Rice law, valid for fractional M.
  std::gamma_distribution<double> gamma(M, B);
  double intensity = gamma(engine_);
  if (intensity <= 0.0) return 0;
  std::poisson_distribution<int> poisson(intensity);
  return poisson(engine_);
}

TwbSample TwbSampler::operator()() {
  const int pairs = draw_mandel_rice(params_.Mp, params_.Bp);
  const int extra_s = draw_mandel_rice(params_.Ms, params_.Bs);
  const int extra_i = draw_mandel_rice(params_.Mi, params_.Bi);
  return TwbSample{pairs + extra_s, pairs + extra_i};
}

}  // namespace subpoisson
