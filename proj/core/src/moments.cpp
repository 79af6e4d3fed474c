#include "subpoisson/moments.hpp"

#include <algorithm>
#include <cmath>

namespace subpoisson {

double stirling2(int k, int l) {
  if (l < 1 || l > k) throw ParameterDomainError("stirling2: requires 1 <= l <= k");
  // S(k+1, l) = l S(k, l) + S(k, l-1); row-by-row in a single buffer.
  std::vector<double> row(static_cast<std::size_t>(k) + 1, 0.0);
  row[1] = 1.0;  // S(1, 1)
  for (int kk = 2; kk <= k; ++kk) {
    for (int ll = std::min(kk, k); ll >= 1; --ll) {
      row[static_cast<std::size_t>(ll)] =
          ll * row[static_cast<std::size_t>(ll)] + (ll >= 1 ? row[static_cast<std::size_t>(ll) - 1] : 0.0);
    }
  }
  return row[static_cast<std::size_t>(l)];
}

std::vector<double> factorial_moments(const CountDistribution& dist, int k_max) {
  if (k_max < 1) throw ParameterDomainError("factorial_moments: k_max must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(k_max) + 1, 0.0);
  w[0] = 1.0;
  std::vector<double> falling(static_cast<std::size_t>(dist.size()), 1.0);
  for (int k = 1; k <= k_max; ++k) {
    double acc = 0.0;
    for (int n = 0; n < dist.size(); ++n) {
      falling[static_cast<std::size_t>(n)] *= std::max(0.0, static_cast<double>(n - (k - 1)));
      acc += falling[static_cast<std::size_t>(n)] * dist[n];
    }
    w[static_cast<std::size_t>(k)] = acc;
  }
  return w;
}

std::vector<double> stirling_transform(std::span<const double> intensity_moments) {
  const int k_max = static_cast<int>(intensity_moments.size()) - 1;
  if (k_max < 1) throw ParameterDomainError("stirling_transform: need at least order 1");
  std::vector<double> raw(static_cast<std::size_t>(k_max) + 1, 0.0);
  raw[0] = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    double acc = 0.0;
    for (int l = 1; l <= k; ++l) {
      acc += stirling2(k, l) * intensity_moments[static_cast<std::size_t>(l)];
    }
    raw[static_cast<std::size_t>(k)] = acc;
  }
  return raw;
}

PoissonMoments poisson_reference(double mean, int k_max) {
  if (mean < 0.0) throw ParameterDomainError("poisson_reference: mean must be nonnegative");
  if (k_max < 1) throw ParameterDomainError("poisson_reference: k_max must be >= 1");
  std::vector<double> intensity(static_cast<std::size_t>(k_max) + 1, 0.0);
  intensity[0] = 1.0;
  for (int k = 1; k <= k_max; ++k) intensity[static_cast<std::size_t>(k)] = std::pow(mean, k);
  PoissonMoments out;
  out.raw = stirling_transform(intensity);
  out.central.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  // <(dn)^2> = <(dn)^3> = mean, <(dn)^4> = mean + 3 mean^2, <(dn)^5> = mean + 10 mean^2.
  if (k_max >= 2) out.central[2] = mean;
  if (k_max >= 3) out.central[3] = mean;
  if (k_max >= 4) out.central[4] = mean + 3.0 * mean * mean;
  if (k_max >= 5) out.central[5] = mean + 10.0 * mean * mean;
  if (k_max >= 6) {
    // Beyond the tabulated orders: binomial expansion of the raw moments.
    auto central = central_from_raw(out.raw);
    for (int k = 6; k <= k_max; ++k) out.central[static_cast<std::size_t>(k)] = central[static_cast<std::size_t>(k)];
  }
  return out;
}

std::vector<double> central_moments(const CountDistribution& dist, int k_max) {
  if (k_max < 1) throw ParameterDomainError("central_moments: k_max must be >= 1");
  const double mean = dist.mean();
  std::vector<double> c(static_cast<std::size_t>(k_max) + 1, 0.0);
  c[0] = 1.0;
  for (int n = 0; n < dist.size(); ++n) {
    const double d = static_cast<double>(n) - mean;
    double pw = d;
    for (int k = 2; k <= k_max; ++k) {
      pw *= d;
      c[static_cast<std::size_t>(k)] += pw * dist[n];
    }
  }
  return c;
}

std::vector<double> central_from_raw(std::span<const double> raw) {
  const int k_max = static_cast<int>(raw.size()) - 1;
  if (k_max < 1) throw ParameterDomainError("central_from_raw: need at least order 1");
  const double mean = raw[1];
  std::vector<double> c(static_cast<std::size_t>(k_max) + 1, 0.0);
  c[0] = 1.0;
  for (int k = 2; k <= k_max; ++k) {
    double acc = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      acc += binom * std::pow(-mean, k - j) * raw[static_cast<std::size_t>(j)];
      binom = binom * (k - j) / (j + 1.0);
    }
    c[static_cast<std::size_t>(k)] = acc;
  }
  return c;
}

std::vector<double> central_intensity_moments(std::span<const double> intensity) {
  return central_from_raw(intensity);  // same binomial expansion about <W>
}

double fano(const CountDistribution& dist) {
  const double mean = dist.mean();
  if (mean <= 0.0) throw UndefinedValueError("fano: zero-mean distribution");
  return dist.variance() / mean;
}

MomentSet compute_moments(const CountDistribution& dist, int k_max) {
  MomentSet m;
  m.k_max = k_max;
  m.intensity = factorial_moments(dist, k_max);
  m.raw = stirling_transform(m.intensity);
  m.central = central_moments(dist, k_max);
  m.mean = m.intensity[1];
  // Truncation bias bound: weight of the top state at the highest order.
  const int top = dist.n_max();
  double falling = 1.0;
  for (int t = 0; t < k_max; ++t) falling *= std::max(0.0, static_cast<double>(top - t));
  m.tail_bias = falling * dist[top];
  return m;
}

namespace {

double log_factorial(int n) { return std::lgamma(n + 1.0); }

double binomial(int n, int k) {
  return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

}  // namespace

std::vector<double> s_ordered_from_factorial(std::span<const double> intensity, double mu,
                                             NoiseCoupling coupling) {
  const int k_max = static_cast<int>(intensity.size()) - 1;
  if (k_max < 1) throw ParameterDomainError("s_ordered_from_factorial: need at least order 1");
  if (mu < 0.0) throw ParameterDomainError("s_ordered_from_factorial: negative noise mean");
  std::vector<double> out(static_cast<std::size_t>(k_max) + 1, 0.0);
  out[0] = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    // same_mode:   <W^k>_mu = Sum_j k!/j! C(k,j) mu^(k-j) <W^j>
    //              (noise superposed on the field amplitude; equals the
    //              Laguerre closed form k! mu^k <L_k(-W/mu)> term by term)
    // independent: <W^k>_mu = Sum_j C(k,j) (k-j)! mu^(k-j) <W^j>
    //              (noise intensity added; thermal factorial moments m! mu^m)
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) {
      double coeff = std::exp(log_factorial(k) - log_factorial(j));
      if (coupling == NoiseCoupling::same_mode) coeff *= binomial(k, j);
      acc += coeff * std::pow(mu, k - j) * intensity[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

SOrderedMomentSet s_ordered_moments(const CountDistribution& dist, double s, int k_max,
                                    NoiseCoupling coupling) {
  if (s < -1.0 || s > 1.0) throw ParameterDomainError("s_ordered_moments: s must lie in [-1, 1]");
  SOrderedMomentSet out;
  out.s = s;
  out.mu = (1.0 - s) / 2.0;
  out.k_max = k_max;
  out.coupling = coupling;
  auto intensity = factorial_moments(dist, k_max);
  out.moments = (out.mu == 0.0) ? intensity : s_ordered_from_factorial(intensity, out.mu, coupling);
  return out;
}

std::vector<double> s_ordered_laguerre(std::span<const double> intensity, double mu) {
  const int k_max = static_cast<int>(intensity.size()) - 1;
  if (k_max < 1) throw ParameterDomainError("s_ordered_laguerre: need at least order 1");
  std::vector<double> out(static_cast<std::size_t>(k_max) + 1, 0.0);
  out[0] = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    // k! mu^k <L_k(-W/mu)> with L_k(x) = Sum_j C(k,j) (-x)^j / j!.
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) {
      const double coeff = binomial(k, j) / std::exp(log_factorial(j));
      acc += coeff * std::pow(1.0 / mu, j) * intensity[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(k)] = std::exp(log_factorial(k)) * std::pow(mu, k) * acc;
  }
  return out;
}

double mandel_transform(std::span<const double> grid, std::span<const double> density, int k) {
  if (grid.size() != density.size() || grid.size() < 2) {
    throw DimensionError("mandel_transform: grid/density size mismatch");
  }
  if (k < 0) throw ParameterDomainError("mandel_transform: k must be nonnegative");
  for (double v : density) {
    if (v < 0.0) throw ParameterDomainError("mandel_transform: density must be nonnegative");
  }
  const double log_kfac = log_factorial(k);
  auto integrand = [&](std::size_t i) {
    const double w = grid[i];
    if (w <= 0.0) return k == 0 ? density[i] * std::exp(-w) : 0.0;
    return density[i] * std::exp(k * std::log(w) - w - log_kfac);
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    acc += 0.5 * (integrand(i) + integrand(i + 1)) * (grid[i + 1] - grid[i]);
  }
  return acc;
}

}  // namespace subpoisson
