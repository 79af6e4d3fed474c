#include "subpoisson/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace subpoisson {

namespace {

/// log( I_nu(z) exp(-z) ) for nu >= 0, z >= 0: power series below z = 100,
/// large-argument expansion beyond.
double log_bessel_i_scaled(double nu, double z) {
  if (z <= 0.0) {
    return (nu == 0.0) ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  if (z < 100.0) {
    const double log_half = std::log(0.5 * z);
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    for (int m = 0; m < 512; ++m) {
      const double lt = (nu + 2.0 * m) * log_half - std::lgamma(m + 1.0) -
                        std::lgamma(nu + m + 1.0);
      logs.push_back(lt);
      peak = std::max(peak, lt);
      if (m > z && lt < peak - 60.0) break;
    }
    double sum = 0.0;
    for (double lt : logs) sum += std::exp(lt - peak);
    return peak + std::log(sum) - z;
  }
  const double m4 = 4.0 * nu * nu;
  const double u = 8.0 * z;
  const double corr = 1.0 - (m4 - 1.0) / u + (m4 - 1.0) * (m4 - 9.0) / (2.0 * u * u) -
                      (m4 - 1.0) * (m4 - 9.0) * (m4 - 25.0) / (6.0 * u * u * u);
  return -0.5 * std::log(2.0 * std::numbers::pi * z) + std::log(corr);
}

}  // namespace

void EMConfig::validate() const {
  if (!(tol > 0.0)) throw ParameterDomainError("em: tol must be positive");
  if (floor < 0.0) throw ParameterDomainError("em: floor must be nonnegative");
  if (max_iters < 1) throw ParameterDomainError("em: max_iters must be >= 1");
}

namespace {

// Multinomial log-likelihood Sum_c f(c) log q(c) with q = T p.
double log_likelihood(const CountDistribution& hist, const std::vector<double>& q) {
  double ll = 0.0;
  for (int c = 0; c < static_cast<int>(q.size()); ++c) {
    const double f = hist[c];
    if (f <= 0.0) continue;
    if (q[static_cast<std::size_t>(c)] <= 0.0) {
      throw ModelMismatchError("EM: forward model assigns zero probability to observed counts");
    }
    ll += f * std::log(q[static_cast<std::size_t>(c)]);
  }
  return ll;
}

std::vector<double> forward(const std::vector<double>& p, const DetectionMatrix& mat) {
  std::vector<double> q(static_cast<std::size_t>(mat.c_max()) + 1, 0.0);
  for (int c = 0; c <= mat.c_max(); ++c) {
    double acc = 0.0;
    for (int n = 0; n < static_cast<int>(p.size()); ++n) acc += mat(c, n) * p[static_cast<std::size_t>(n)];
    q[static_cast<std::size_t>(c)] = acc;
  }
  return q;
}

std::vector<double> update(const std::vector<double>& p, const CountDistribution& hist,
                           const DetectionMatrix& mat, const std::vector<double>& q,
                           double floor) {
  std::vector<double> next(p.size());
  for (int n = 0; n < static_cast<int>(p.size()); ++n) {
    double mult = 0.0;
    for (int c = 0; c <= std::min(mat.c_max(), hist.n_max()); ++c) {
      const double f = hist[c];
      if (f <= 0.0) continue;
      mult += f * mat(c, n) / q[static_cast<std::size_t>(c)];
    }
    next[static_cast<std::size_t>(n)] = p[static_cast<std::size_t>(n)] * mult;
  }
  double total = 0.0;
  for (double v : next) total += v;
  if (total <= 0.0) throw ModelMismatchError("EM: update annihilated the distribution");
  for (double& v : next) v = std::max(v / total, floor);
  total = 0.0;
  for (double v : next) total += v;
  for (double& v : next) v /= total;
  return next;
}

}  // namespace

CountDistribution em_step(const CountDistribution& current, const CountDistribution& hist,
                          const DetectionMatrix& mat) {
  if (current.n_max() > mat.n_max()) throw DimensionError("em_step: support exceeds matrix");
  if (hist.n_max() > mat.c_max()) throw DimensionError("em_step: histogram exceeds matrix rows");
  std::vector<double> p(current.probs().begin(), current.probs().end());
  auto q = forward(p, mat);
  log_likelihood(hist, q);  // throws on model mismatch where data exist
  return CountDistribution(update(p, hist, mat, q, 0.0));
}

std::pair<CountDistribution, EMDiagnostics> em_run(const CountDistribution& start,
                                                   const CountDistribution& hist,
                                                   const DetectionMatrix& mat,
                                                   const EMConfig& config) {
  config.validate();
  if (start.n_max() > mat.n_max()) throw DimensionError("em_run: support exceeds matrix");
  if (hist.n_max() > mat.c_max()) throw DimensionError("em_run: histogram exceeds matrix rows");

  std::vector<double> p(start.probs().begin(), start.probs().end());
  {
    double total = 0.0;
    for (double& v : p) total += (v = std::max(v, config.floor));
    for (double& v : p) v /= total;
  }

  EMDiagnostics diag;
  double ll_prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < config.max_iters; ++it) {
    auto q = forward(p, mat);
    const double ll = log_likelihood(hist, q);
    if (it > 0) {
      const double drop = ll_prev - ll;
      if (drop > 0.0) {
        diag.worst_decrease = std::max(diag.worst_decrease, drop);
        // The update is an exact EM step for the multinomial mixture model, so
        // any decrease is roundoff; anything visible means a real bug.
        if (drop > 1e-8 * (1.0 + std::abs(ll))) diag.monotone = false;
      }
      if (std::abs(ll - ll_prev) < config.tol * (1.0 + std::abs(ll))) {
        diag.converged = true;
        diag.iterations = it;
        diag.log_likelihood = ll;
        return {CountDistribution(std::move(p)), diag};
      }
    }
    ll_prev = ll;
    p = update(p, hist, mat, q, config.floor);
    diag.iterations = it + 1;
    diag.log_likelihood = ll;
  }
  diag.converged = false;
  return {CountDistribution(std::move(p)), diag};
}

std::pair<CountDistribution, EMDiagnostics> em_reconstruct(const CountDistribution& hist,
                                                           const DetectionMatrix& mat,
                                                           const EMConfig& config) {
  return em_run(CountDistribution::uniform(mat.n_max()), hist, mat, config);
}

int reconstruction_support(const CountDistribution& hist, double eta, double factor) {
  if (!(eta > 0.0)) throw ParameterDomainError("reconstruction_support: eta must be positive");
  const double mean = hist.mean();
  return std::max(8, static_cast<int>(std::ceil(factor * std::max(mean, 1.0) / eta)));
}

namespace {

// L_j(x) for j = 0..order via the three-term recurrence, per grid point.
void laguerre_column(int order, double x, std::vector<double>& out) {
  out[0] = 1.0;
  if (order >= 1) out[1] = 1.0 - x;
  for (int j = 1; j < order; ++j) {
    out[static_cast<std::size_t>(j) + 1] =
        ((2.0 * j + 1.0 - x) * out[static_cast<std::size_t>(j)] - j * out[static_cast<std::size_t>(j) - 1]) /
        (j + 1.0);
  }
}

std::vector<double> series_coefficients(const SOrderedMomentSet& moments, int order) {
  const double a = moments.moments[1];
  if (!(a > 0.0)) throw UndefinedValueError("quasi_delta: zero s-ordered mean");
  // r^(l): deviation of the normalized s-ordered moments from those of the
  // Poissonian field with the same s-ordered mean. At s = 1 the reference
  // moments are a^l and this is the plain ratio-minus-one; at s < 1 the
  // matched reference keeps the declination of a Poissonian field identically
  // zero, which is what makes the decomposition against the smoothed
  // Poissonian reference consistent.
  std::vector<double> reference(static_cast<std::size_t>(order) + 1, 0.0);
  if (moments.mu == 0.0) {
    for (int l = 0; l <= order; ++l) reference[static_cast<std::size_t>(l)] = std::pow(a, l);
  } else {
    const double point = std::max(a - moments.mu, 0.0);
    std::vector<double> powers(static_cast<std::size_t>(order) + 1, 1.0);
    for (int l = 1; l <= order; ++l) powers[static_cast<std::size_t>(l)] = std::pow(point, l);
    reference = s_ordered_from_factorial(powers, moments.mu, moments.coupling);
  }
  std::vector<double> r(static_cast<std::size_t>(order) + 1, 0.0);
  for (int l = 2; l <= order; ++l) {
    r[static_cast<std::size_t>(l)] =
        (moments.moments[static_cast<std::size_t>(l)] - reference[static_cast<std::size_t>(l)]) /
        std::pow(a, l);
  }
  // c_j = (j!/a) Sum_l (-1)^l r^(l) / ((l!)^2 (j-l)!)
  std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
  for (int j = 2; j <= order; ++j) {
    double acc = 0.0;
    for (int l = 2; l <= j; ++l) {
      const double coeff = std::exp(std::lgamma(j + 1.0) - 2.0 * std::lgamma(l + 1.0) -
                                    std::lgamma(j - l + 1.0));
      acc += ((l % 2 == 0) ? coeff : -coeff) * r[static_cast<std::size_t>(l)];
    }
    c[static_cast<std::size_t>(j)] = acc / a;
  }
  return c;
}

}  // namespace

std::vector<double> quasi_delta(const SOrderedMomentSet& moments, std::span<const double> grid,
                                int order) {
  if (order < 0) throw ParameterDomainError("quasi_delta: negative series order");
  if (order > moments.k_max) {
    throw ParameterDomainError("quasi_delta: series order exceeds available moments");
  }
  const double a = moments.moments[1];
  const auto c = series_coefficients(moments, order);
  std::vector<double> out(grid.size(), 0.0);
  std::vector<double> lag(static_cast<std::size_t>(order) + 1, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i] / a;
    laguerre_column(order, x, lag);
    double acc = 0.0;
    for (int j = 2; j <= order; ++j) acc += c[static_cast<std::size_t>(j)] * lag[static_cast<std::size_t>(j)];
    out[i] = std::exp(-x) * acc;
  }
  return out;
}

std::vector<double> poisson_quasi(double mean, double s, double modes,
                                  std::span<const double> grid) {
  if (!(s < 1.0)) throw ParameterDomainError("poisson_quasi: s = 1 is a point mass");
  if (s < -1.0) throw ParameterDomainError("poisson_quasi: s must lie in [-1, 1)");
  if (!(modes > 0.0)) throw ParameterDomainError("poisson_quasi: modes must be positive");
  if (mean < 0.0) throw ParameterDomainError("poisson_quasi: negative mean");
  const double mu = (1.0 - s) / 2.0;
  std::vector<double> out(grid.size(), 0.0);
  const double m = modes;
  if (mean == 0.0) {
    // Pure added noise: Gamma(M) law of total mean mu.
    const double scale = mu / m;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double w = grid[i];
      if (w < 0.0) continue;
      if (w == 0.0) {
        out[i] = (m == 1.0) ? 1.0 / scale : (m > 1.0 ? 0.0 : std::numeric_limits<double>::infinity());
        continue;
      }
      out[i] = std::exp((m - 1.0) * std::log(w) - w / scale - std::lgamma(m) - m * std::log(scale));
    }
    return out;
  }
  // Point intensity I smoothed by thermal noise mu over M modes:
  // (1/mu) (W/I)^((M-1)/2) exp(-(W+I)/mu) I_(M-1)(2 sqrt(W I)/mu),
  // evaluated with the exponentially scaled Bessel function.
  const double intensity = mean;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = grid[i];
    if (w <= 0.0) {
      out[i] = (m == 1.0 && w == 0.0) ? std::exp(-intensity / mu) / mu : 0.0;
      continue;
    }
    const double z = 2.0 * std::sqrt(w * intensity) / mu;
    const double log_density = -std::log(mu) + 0.5 * (m - 1.0) * std::log(w / intensity) -
                               (w + intensity) / mu + z + log_bessel_i_scaled(m - 1.0, z);
    out[i] = std::exp(log_density);
  }
  return out;
}

std::vector<double> exact_quasi(const CountDistribution& dist, double s,
                                std::span<const double> grid) {
  if (!(s < 1.0)) throw ParameterDomainError("exact_quasi: s = 1 is singular");
  const double mu = (1.0 - s) / 2.0;
  // Smoothed Fock kernel: R_n(W) = (1/mu) ((mu-1)/mu)^n e^(-W/mu) L_n(W/(mu(1-mu))).
  // Terms alternate in n for mu < 1; reliable while |(1-mu)/mu| stays modest.
  std::vector<double> out(grid.size(), 0.0);
  const int n_top = dist.n_max();
  std::vector<double> lag(static_cast<std::size_t>(n_top) + 1, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = grid[i];
    if (w < 0.0) continue;
    double acc = 0.0;
    if (mu == 1.0) {
      // Q function: Sum_n p(n) W^n e^-W / n!
      for (int n = 0; n <= n_top; ++n) {
        if (dist[n] == 0.0) continue;
        if (w == 0.0) {
          if (n == 0) acc += dist[0];
          continue;
        }
        acc += dist[n] * std::exp(n * std::log(w) - w - std::lgamma(n + 1.0));
      }
    } else {
      laguerre_column(n_top, w / (mu * (1.0 - mu)), lag);
      const double ratio = (mu - 1.0) / mu;
      double pw = 1.0;
      for (int n = 0; n <= n_top; ++n) {
        if (dist[n] != 0.0) acc += dist[n] * pw * lag[static_cast<std::size_t>(n)];
        pw *= ratio;
      }
      acc *= std::exp(-w / mu) / mu;
    }
    out[i] = acc;
  }
  return out;
}

QuasiDistribution quasi_distribution(const CountDistribution& dist, double s,
                                     const QuasiConfig& config) {
  if (config.order < 2) throw ParameterDomainError("quasi_distribution: order must be >= 2");
  QuasiDistribution out;
  out.s = s;
  out.order = config.order;

  const auto moments = s_ordered_moments(dist, s, config.order);
  const double a = moments.moments[1];
  out.grid.resize(static_cast<std::size_t>(config.grid_points));
  for (int i = 0; i < config.grid_points; ++i) {
    out.grid[static_cast<std::size_t>(i)] = config.grid_span * a * i / (config.grid_points - 1);
  }

  out.delta = quasi_delta(moments, out.grid, config.order);
  // Reference Poissonian matched to the s-ordered mean: point intensity a - mu
  // plus the same added noise.
  const double point = std::max(a - moments.mu, 0.0);
  out.reference = poisson_quasi(point, s, config.modes, out.grid);
  out.total.resize(out.grid.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    out.total[i] = out.reference[i] + out.delta[i];
    peak = std::max(peak, out.reference[i]);
  }
  auto lower = quasi_delta(moments, out.grid, config.order - 2);
  double step = 0.0;
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    step = std::max(step, std::abs(out.delta[i] - lower[i]));
  }
  out.series_step = step;

  std::size_t arg_min = 0;
  for (std::size_t i = 1; i < out.grid.size(); ++i) {
    if (out.total[i] < out.total[arg_min]) arg_min = i;
  }
  out.min_value = out.total[arg_min];
  out.min_at = out.grid[arg_min];
  // Negativity must clear both the reference scale and the series' own
  // truncation scale; dips inside the series step are unresolved, not
  // evidence of nonclassicality.
  out.negative = out.min_value < -std::max(config.negativity_rel * peak, 2.0 * out.series_step);
  return out;
}

}  // namespace subpoisson
