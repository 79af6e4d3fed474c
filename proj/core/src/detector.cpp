#include "subpoisson/detector.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace subpoisson {

namespace {

// log C(n, k) for possibly large n.
double log_binom(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// P(j pixels hold at least one registered photon | n photons), j = 0..min(n, c_cap),
// for all n = 0..n_max. Row n of the result has n+1 entries (clipped at c_cap).
std::vector<std::vector<double>> occupancy_table(const DetectorParams& p, int n_max, int c_cap) {
  const double n_pixels = static_cast<double>(p.N);
  std::vector<std::vector<double>> q(static_cast<std::size_t>(n_max) + 1);
  q[0] = {1.0};
  for (int m = 0; m < n_max; ++m) {
    const auto& cur = q[static_cast<std::size_t>(m)];
    const int top = std::min(m + 1, c_cap);
    std::vector<double> next(static_cast<std::size_t>(top) + 1, 0.0);
    for (int j = 0; j < static_cast<int>(cur.size()); ++j) {
      const double stay = 1.0 - p.eta + p.eta * j / n_pixels;
      next[static_cast<std::size_t>(j)] += cur[static_cast<std::size_t>(j)] * stay;
      if (j + 1 <= top) {
        next[static_cast<std::size_t>(j) + 1] +=
            cur[static_cast<std::size_t>(j)] * p.eta * (n_pixels - j) / n_pixels;
      }
    }
    q[static_cast<std::size_t>(m) + 1] = std::move(next);
  }
  return q;
}

}  // namespace

void DetectorParams::validate() const {
  if (N < 1) throw ParameterDomainError("detector: N must be >= 1");
  if (!(eta >= 0.0) || !(eta <= 1.0)) throw ParameterDomainError("detector: eta must lie in [0, 1]");
  if (!(D >= 0.0) || !(D < 1.0)) throw ParameterDomainError("detector: D must lie in [0, 1)");
}

DetectorParams DetectorParams::with_total_dark(long long N, double eta, double d) {
  DetectorParams p{N, eta, N > 0 ? d / static_cast<double>(N) : 0.0};
  p.validate();
  return p;
}

DetectionMatrix::DetectionMatrix(DetectorParams params, int c_max, int n_max,
                                 std::vector<double> entries)
    : t_(std::move(entries)), params_(params), c_max_(c_max), n_max_(n_max) {
  if (t_.size() != static_cast<std::size_t>(c_max_ + 1) * (n_max_ + 1)) {
    throw DimensionError("detection matrix: entry count does not match bounds");
  }
}

DetectionMatrix DetectionMatrix::identity(int size) {
  std::vector<double> t(static_cast<std::size_t>(size) * size, 0.0);
  for (int i = 0; i < size; ++i) t[static_cast<std::size_t>(i) * size + i] = 1.0;
  DetectorParams params{size, 1.0, 0.0};
  return DetectionMatrix(params, size - 1, size - 1, std::move(t));
}

double DetectionMatrix::column_sum(int n) const {
  double acc = 0.0;
  for (int c = 0; c <= c_max_; ++c) acc += (*this)(c, n);
  return acc;
}

void DetectionMatrix::write_csv(std::ostream& out) const {
  out << "c";
  for (int n = 0; n <= n_max_; ++n) out << ",n" << n;
  out << "\n";
  out.precision(17);
  for (int c = 0; c <= c_max_; ++c) {
    out << c;
    for (int n = 0; n <= n_max_; ++n) out << ',' << (*this)(c, n);
    out << "\n";
  }
}

DetectionMatrix detection_matrix(const DetectorParams& params, int c_max, int n_max) {
  params.validate();
  if (c_max > params.N) {
    throw ParameterDomainError("detection_matrix: c_max exceeds the pixel count");
  }
  if (c_max < 0 || n_max < 0) throw ParameterDomainError("detection_matrix: negative bounds");

  const auto occ = occupancy_table(params, n_max, c_max);

  // Dark clicks on the N - j unoccupied pixels: Binomial(N - j, D).
  // dark[j][k] = P(k dark clicks | j occupied), k <= c_max - j. A term ratio
  // recurrence keeps full precision; lgamma at N ~ 10^4 would shed ~5 digits.
  std::vector<std::vector<double>> dark(static_cast<std::size_t>(std::min(c_max, n_max)) + 1);
  for (int j = 0; j < static_cast<int>(dark.size()); ++j) {
    const double m = static_cast<double>(params.N) - j;
    std::vector<double> row(static_cast<std::size_t>(c_max - j) + 1, 0.0);
    row[0] = params.D == 0.0 ? 1.0 : std::exp(m * std::log1p(-params.D));
    if (params.D > 0.0) {
      const double odds = params.D / (1.0 - params.D);
      for (int k = 1; k <= c_max - j; ++k) {
        row[static_cast<std::size_t>(k)] =
            row[static_cast<std::size_t>(k) - 1] * odds * (m - k + 1) / k;
      }
    }
    dark[static_cast<std::size_t>(j)] = std::move(row);
  }

  std::vector<double> t(static_cast<std::size_t>(c_max + 1) * (n_max + 1), 0.0);
  for (int n = 0; n <= n_max; ++n) {
    const auto& qn = occ[static_cast<std::size_t>(n)];
    const int j_top = std::min(static_cast<int>(qn.size()) - 1, c_max);
    for (int j = 0; j <= j_top; ++j) {
      const double w = qn[static_cast<std::size_t>(j)];
      if (w <= 0.0) continue;
      const auto& dk = dark[static_cast<std::size_t>(j)];
      for (int k = 0; k < static_cast<int>(dk.size()); ++k) {
        t[static_cast<std::size_t>(j + k) * (n_max + 1) + n] += w * dk[static_cast<std::size_t>(k)];
      }
    }
  }
  return DetectionMatrix(params, c_max, n_max, std::move(t));
}

DetectionMatrix detection_matrix_alternating(const DetectorParams& params, int c_max, int n_max) {
  params.validate();
  if (c_max > params.N) {
    throw ParameterDomainError("detection_matrix_alternating: c_max exceeds the pixel count");
  }
  const double n_pixels = static_cast<double>(params.N);
  const double log_1d = std::log1p(-params.D);
  std::vector<double> t(static_cast<std::size_t>(c_max + 1) * (n_max + 1), 0.0);

  for (int c = 0; c <= c_max; ++c) {
    const double log_outer = log_binom(n_pixels, c);
    for (int n = 0; n <= n_max; ++n) {
      // T = C(N,c) Sum_l (-1)^l C(c,l) (1-D)^(N-c+l) (1 - eta (N-c+l)/N)^n,
      // accumulated as signed terms around the peak magnitude.
      long double pos = 0.0L, pos_c = 0.0L, neg = 0.0L, neg_c = 0.0L;
      double log_peak = -1e300;
      std::vector<double> logs(static_cast<std::size_t>(c) + 1);
      for (int l = 0; l <= c; ++l) {
        const double base = 1.0 - params.eta * (n_pixels - c + l) / n_pixels;
        double lt;
        if (base <= 0.0) {
          lt = (n == 0) ? log_binom(c, l) + (n_pixels - c + l) * log_1d : -1e300;
        } else {
          lt = log_binom(c, l) + (n_pixels - c + l) * log_1d + n * std::log(base);
        }
        logs[static_cast<std::size_t>(l)] = lt;
        log_peak = std::max(log_peak, lt);
      }
      for (int l = 0; l <= c; ++l) {
        const long double v = std::exp(static_cast<long double>(logs[static_cast<std::size_t>(l)] - log_peak));
        if (l % 2 == 0) {
          long double y = v - pos_c, s = pos + y;
          pos_c = (s - pos) - y;
          pos = s;
        } else {
          long double y = v - neg_c, s = neg + y;
          neg_c = (s - neg) - y;
          neg = s;
        }
      }
      const long double sum = pos - neg;
      double value = (sum <= 0.0L)
                         ? 0.0
                         : std::exp(log_outer + log_peak + std::log(static_cast<double>(sum)));
      value = std::clamp(value, 0.0, 1.0);
      t[static_cast<std::size_t>(c) * (n_max + 1) + n] = value;
    }
  }
  return DetectionMatrix(params, c_max, n_max, std::move(t));
}

int suggest_c_max(const DetectorParams& params, int n_max, double tail) {
  params.validate();
  const int hard_cap = static_cast<int>(std::min<long long>(params.N, n_max + 64LL));
  DetectionMatrix trial = detection_matrix(params, hard_cap, n_max);
  // The column mass over c <= bound is monotone in the bound; take the worst column.
  std::vector<double> cum(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int c = 0; c <= hard_cap; ++c) {
    bool all_covered = true;
    for (int n = 0; n <= n_max; ++n) {
      cum[static_cast<std::size_t>(n)] += trial(c, n);
      if (1.0 - cum[static_cast<std::size_t>(n)] > tail) all_covered = false;
    }
    if (all_covered) return c;
  }
  return hard_cap;
}

CountDistribution mc_sample_detection(const DetectorParams& params, int n, long long shots,
                                      std::uint64_t seed) {
  params.validate();
  if (n < 0) throw ParameterDomainError("mc_sample_detection: n must be nonnegative");
  if (shots < 1) throw ParameterDomainError("mc_sample_detection: shots must be >= 1");
  std::mt19937_64 engine(seed);
  std::vector<long long> hist;
  for (long long s = 0; s < shots; ++s) {
    int c = sample_photocount(params, n, engine);
    if (c >= static_cast<int>(hist.size())) hist.resize(static_cast<std::size_t>(c) + 1, 0);
    ++hist[static_cast<std::size_t>(c)];
  }
  std::vector<double> freq(hist.size());
  for (std::size_t i = 0; i < hist.size(); ++i) {
    freq[i] = static_cast<double>(hist[i]) / static_cast<double>(shots);
  }
  return CountDistribution(std::move(freq));
}

int sample_photocount(const DetectorParams& params, int n, std::mt19937_64& engine) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<long long> pixel(0, params.N - 1);
  // Clicked pixels stay few; a flat list beats a hash set here.
  std::vector<long long> clicked;
  clicked.reserve(16);
  auto mark = [&clicked](long long p) {
    if (std::find(clicked.begin(), clicked.end(), p) == clicked.end()) clicked.push_back(p);
  };
  for (int i = 0; i < n; ++i) {
    if (unit(engine) < params.eta) mark(pixel(engine));
  }
  if (params.D > 0.0) {
    // k ~ Binomial(N, D) pixels fire dark events; they form a uniform distinct
    // k-subset. Draw them by rejection against earlier dark picks (k << N);
    // overlap with photon pixels is allowed and counts once.
    std::binomial_distribution<long long> darks(params.N, params.D);
    const long long k = darks(engine);
    std::vector<long long> dark_pixels;
    dark_pixels.reserve(static_cast<std::size_t>(k));
    for (long long i = 0; i < k; ++i) {
      long long p = pixel(engine);
      while (std::find(dark_pixels.begin(), dark_pixels.end(), p) != dark_pixels.end()) {
        p = pixel(engine);
      }
      dark_pixels.push_back(p);
      mark(p);
    }
  }
  return static_cast<int>(clicked.size());
}

CountDistribution forward_photocount(const CountDistribution& dist, const DetectionMatrix& mat) {
  if (dist.n_max() > mat.n_max()) {
    throw DimensionError("forward_photocount: distribution support exceeds matrix columns");
  }
  std::vector<double> out(static_cast<std::size_t>(mat.c_max()) + 1, 0.0);
  for (int c = 0; c <= mat.c_max(); ++c) {
    double acc = 0.0;
    for (int n = 0; n <= dist.n_max(); ++n) acc += mat(c, n) * dist[n];
    out[static_cast<std::size_t>(c)] = acc;
  }
  return CountDistribution(std::move(out));
}

CountDistribution forward_signal_marginal(const JointPhotonDistribution& joint,
                                          const DetectionMatrix& mat_s) {
  return forward_photocount(joint.marginal_signal(), mat_s);
}

CountDistribution conditional_theoretical(const JointPhotonDistribution& joint,
                                          const DetectionMatrix& mat_s, int c_s) {
  if (c_s < 0 || c_s > mat_s.c_max()) {
    throw ConditioningError("conditional_theoretical: c_s outside the matrix range");
  }
  if (joint.ns_max() > mat_s.n_max()) {
    throw DimensionError("conditional_theoretical: joint support exceeds matrix columns");
  }
  std::vector<double> w(static_cast<std::size_t>(joint.ni_max()) + 1, 0.0);
  for (int ns = 0; ns <= joint.ns_max(); ++ns) {
    const double ts = mat_s(c_s, ns);
    if (ts == 0.0) continue;
    for (int ni = 0; ni <= joint.ni_max(); ++ni) w[static_cast<std::size_t>(ni)] += ts * joint(ns, ni);
  }
  double f = 0.0;
  for (double v : w) f += v;
  if (f < 1e-300) {
    throw ConditioningError("conditional_theoretical: f_s(c_s) vanishes at c_s = " +
                            std::to_string(c_s));
  }
  for (double& v : w) v /= f;
  return CountDistribution(std::move(w));
}

}  // namespace subpoisson
