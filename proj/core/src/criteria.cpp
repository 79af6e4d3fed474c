#include "subpoisson/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace subpoisson {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::nonclassical: return "nonclassical";
    case Verdict::classical: return "classical";
    case Verdict::inapplicable: return "inapplicable";
    case Verdict::unestablished: return "unestablished";
  }
  return "?";
}

namespace {

void require_order(const MomentSet& m, int k) {
  if (k < 2) throw ParameterDomainError("criteria are defined for k >= 2");
  if (k > m.k_max) throw ParameterDomainError("moment set holds orders up to k_max only");
}

void require_mean(const MomentSet& m) {
  if (m.mean <= 0.0) throw UndefinedValueError("criterion undefined for zero-mean field");
}

}  // namespace

double criterion_intensity(const MomentSet& m, int k) {
  require_order(m, k);
  require_mean(m);
  return m.intensity[static_cast<std::size_t>(k)] / std::pow(m.mean, k) - 1.0;
}

double criterion_photon(const MomentSet& m, int k) {
  require_order(m, k);
  require_mean(m);
  const auto ref = poisson_reference(m.raw[1], k);
  return m.raw[static_cast<std::size_t>(k)] / ref.raw[static_cast<std::size_t>(k)] - 1.0;
}

Ratio criterion_intensity_fluctuation(const MomentSet& m, int k) {
  require_order(m, k);
  require_mean(m);
  const auto central_w = central_intensity_moments(m.intensity);
  Ratio r;
  r.value = central_w[static_cast<std::size_t>(k)] / std::pow(m.mean, k);
  r.applicable = (k % 2 == 0);
  return r;
}

FluctuationRatio criterion_photon_fluctuation(const MomentSet& m, int k) {
  require_order(m, k);
  require_mean(m);
  const auto ref = poisson_reference(m.raw[1], k);
  FluctuationRatio r;
  r.value = m.central[static_cast<std::size_t>(k)] / ref.central[static_cast<std::size_t>(k)] - 1.0;
  if (k == 3) {
    r.applicability = (m.mean < 3.0) ? Verdict::classical : Verdict::inapplicable;
  } else if (k >= 5) {
    r.applicability = Verdict::unestablished;
  } else {
    r.applicability = Verdict::classical;
  }
  return r;
}

double criterion_elements(const CountDistribution& dist, int k, double floor) {
  if (k < 2) throw ParameterDomainError("criterion_elements: k must be >= 2");
  const double p0 = dist[0];
  const double p1 = dist[1];
  if (p0 <= floor || p1 <= floor) {
    throw InapplicableCriterionError("criterion_elements: p(0) or p(1) below floor");
  }
  // p~(k) = k! p(k)/p(0); r = p~(k)/p~(1)^k - 1 = k! p(k) p(0)^(k-1) / p(1)^k - 1.
  if (dist[k] <= 0.0) return -1.0;
  double log_r = std::lgamma(k + 1.0) + std::log(dist[k]) + (k - 1.0) * std::log(p0) -
                 k * std::log(p1);
  return std::exp(log_r) - 1.0;
}

DepthResult nonclassicality_depth(std::span<const double> intensity_moments, int k,
                                  const DepthConfig& config) {
  if (k < 2) throw ParameterDomainError("nonclassicality_depth: k must be >= 2");
  if (static_cast<int>(intensity_moments.size()) - 1 < k) {
    throw ParameterDomainError("nonclassicality_depth: moments missing for order k");
  }
  const double mean = intensity_moments[1];
  if (mean <= 0.0) throw UndefinedValueError("nonclassicality_depth: zero-mean field");

  // Scale-free criterion g(mu) = <W^k>_mu / <W>_mu^k - 1; tau = root in mu.
  auto g = [&](double mu) {
    auto ws = (mu == 0.0)
                  ? std::vector<double>(intensity_moments.begin(), intensity_moments.end())
                  : s_ordered_from_factorial(intensity_moments, mu, config.coupling);
    return ws[static_cast<std::size_t>(k)] / std::pow(ws[1], k) - 1.0;
  };

  DepthResult result;
  // Values this close to zero are truncation noise, not nonclassicality.
  const double eps = 1e-10;
  const double g0 = g(0.0);
  if (g0 >= -eps) {
    result.tau = 0.0;
    return result;
  }
  // Coarse scan: find the first sign change and count the rest.
  double lo = 0.0, g_lo = g0;
  double hi = 1.0;
  bool bracketed = false;
  int crossings = 0;
  double prev_mu = 0.0, prev_g = g0;
  for (int i = 1; i <= config.scan_points; ++i) {
    const double mu = static_cast<double>(i) / config.scan_points;
    const double gv = g(mu);
    if (prev_g < 0.0 && gv >= 0.0) {
      ++crossings;
      if (!bracketed) {
        lo = prev_mu;
        g_lo = prev_g;
        hi = mu;
        bracketed = true;
      }
    } else if (prev_g >= 0.0 && gv < 0.0) {
      ++crossings;
    }
    prev_mu = mu;
    prev_g = gv;
  }
  result.multiple_roots = crossings > 1;
  if (!bracketed) {
    result.tau = 1.0;  // criterion survives all the way to s = -1
    return result;
  }
  const double mu_tol = config.s_tol / 2.0;  // tau = (1 - s)/2
  for (int it = 0; it < config.max_iters && hi - lo > mu_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = gm;
    } else {
      hi = mid;
    }
  }
  result.tau = 0.5 * (lo + hi);
  return result;
}

DepthResult nonclassicality_depth(const CountDistribution& dist, int k, const DepthConfig& config) {
  return nonclassicality_depth(factorial_moments(dist, k), k, config);
}

const CriterionEntry* CriteriaReport::find(const std::string& family, int k) const {
  for (const auto& e : entries) {
    if (e.family == family && e.k == k) return &e;
  }
  return nullptr;
}

namespace {

Verdict judge(double value, const std::optional<double>& err, double z, Verdict applicability) {
  if (applicability == Verdict::inapplicable || applicability == Verdict::unestablished) {
    return applicability;
  }
  // The ratios are dimensionless; magnitudes at the truncation-noise scale do
  // not count as a violation.
  constexpr double kZero = 1e-10;
  if (value < -kZero && (!err.has_value() || value + z * (*err) < 0.0)) {
    return Verdict::nonclassical;
  }
  return Verdict::classical;
}

}  // namespace

CriteriaReport full_report(const CountDistribution& dist, const ReportConfig& config) {
  CriteriaReport report;
  report.k_max = config.k_max;
  report.mean = dist.mean();

  MomentSet moments;
  bool have_moments = false;
  try {
    moments = compute_moments(dist, std::max(config.k_max, 2));
    report.fano = fano(dist);
    have_moments = true;
  } catch (const Error&) {
    report.fano = std::numeric_limits<double>::quiet_NaN();
  }

  auto push = [&](CriterionEntry e) { report.entries.push_back(std::move(e)); };

  for (int k = 2; k <= config.k_max; ++k) {
    // Family I with depth.
    CriterionEntry e1{"I", k};
    try {
      if (!have_moments) throw UndefinedValueError("moments unavailable");
      e1.value = criterion_intensity(moments, k);
      e1.verdict = judge(e1.value, std::nullopt, config.z, Verdict::classical);
      if (config.with_depth) {
        auto depth = nonclassicality_depth(moments.intensity, k, config.depth);
        e1.tau = depth.tau;
        e1.multiple_roots = depth.multiple_roots;
      }
    } catch (const Error& err) {
      e1.verdict = Verdict::inapplicable;
      e1.note = err.what();
    }
    push(e1);

    CriterionEntry e2{"II", k};
    try {
      if (!have_moments) throw UndefinedValueError("moments unavailable");
      e2.value = criterion_photon(moments, k);
      e2.verdict = judge(e2.value, std::nullopt, config.z, Verdict::classical);
    } catch (const Error& err) {
      e2.verdict = Verdict::inapplicable;
      e2.note = err.what();
    }
    push(e2);

    CriterionEntry e3{"III", k};
    try {
      if (!have_moments) throw UndefinedValueError("moments unavailable");
      auto r = criterion_intensity_fluctuation(moments, k);
      e3.value = r.value;
      e3.verdict = judge(r.value, std::nullopt, config.z,
                         r.applicable ? Verdict::classical : Verdict::inapplicable);
    } catch (const Error& err) {
      e3.verdict = Verdict::inapplicable;
      e3.note = err.what();
    }
    push(e3);

    CriterionEntry e4{"IV", k};
    try {
      if (!have_moments) throw UndefinedValueError("moments unavailable");
      auto r = criterion_photon_fluctuation(moments, k);
      e4.value = r.value;
      e4.verdict = judge(r.value, std::nullopt, config.z, r.applicability);
    } catch (const Error& err) {
      e4.verdict = Verdict::inapplicable;
      e4.note = err.what();
    }
    push(e4);
  }

  for (int k = 2; k <= config.k_max_elements; ++k) {
    CriterionEntry e5{"V", k};
    try {
      e5.value = criterion_elements(dist, k, config.element_floor);
      e5.verdict = judge(e5.value, std::nullopt, config.z, Verdict::classical);
    } catch (const Error& err) {
      e5.verdict = Verdict::inapplicable;
      e5.note = err.what();
    }
    push(e5);
  }
  return report;
}

void apply_verdicts(CriteriaReport& report, double z) {
  for (auto& e : report.entries) {
    if (e.verdict == Verdict::inapplicable || e.verdict == Verdict::unestablished) continue;
    e.verdict = judge(e.value, e.std_error, z, Verdict::classical);
  }
}

}  // namespace subpoisson
