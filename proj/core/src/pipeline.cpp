#include "subpoisson/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "subpoisson/parallel.hpp"
#include "subpoisson/rng.hpp"

namespace subpoisson {

JointHistogram::JointHistogram(int cs_max, int ci_max)
    : counts_(static_cast<std::size_t>(cs_max + 1) * (ci_max + 1), 0),
      cs_max_(cs_max),
      ci_max_(ci_max) {
  if (cs_max < 0 || ci_max < 0) throw ParameterDomainError("joint histogram: negative bounds");
}

void JointHistogram::add(int cs, int ci, long long count) {
  if (cs < 0 || ci < 0) throw ParameterDomainError("joint histogram: negative counts index");
  if (cs > cs_max_ || ci > ci_max_) {
    // Grow to fit; simulation outcomes set the bounds.
    const int new_cs = std::max(cs, cs_max_);
    const int new_ci = std::max(ci, ci_max_);
    JointHistogram bigger(new_cs, new_ci);
    for (int a = 0; a <= cs_max_; ++a) {
      for (int b = 0; b <= ci_max_; ++b) bigger.at(a, b) = (*this)(a, b);
    }
    *this = std::move(bigger);
  }
  at(cs, ci) += count;
}

long long JointHistogram::shots() const {
  long long total = 0;
  for (long long v : counts_) total += v;
  return total;
}

std::vector<long long> JointHistogram::signal_counts() const {
  std::vector<long long> out(static_cast<std::size_t>(cs_max_) + 1, 0);
  for (int a = 0; a <= cs_max_; ++a) {
    for (int b = 0; b <= ci_max_; ++b) out[static_cast<std::size_t>(a)] += (*this)(a, b);
  }
  return out;
}

std::vector<long long> JointHistogram::idler_counts() const {
  std::vector<long long> out(static_cast<std::size_t>(ci_max_) + 1, 0);
  for (int a = 0; a <= cs_max_; ++a) {
    for (int b = 0; b <= ci_max_; ++b) out[static_cast<std::size_t>(b)] += (*this)(a, b);
  }
  return out;
}

namespace {

CountDistribution normalize_counts(const std::vector<long long>& counts, long long shots) {
  std::vector<double> p(counts.size(), 0.0);
  if (shots > 0) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      p[i] = static_cast<double>(counts[i]) / static_cast<double>(shots);
    }
  }
  return CountDistribution(std::move(p));
}

}  // namespace

CountDistribution JointHistogram::signal_marginal() const {
  return normalize_counts(signal_counts(), shots());
}

CountDistribution JointHistogram::idler_marginal() const {
  return normalize_counts(idler_counts(), shots());
}

JointHistogram simulate_joint(const TwinBeamParams& params, const DetectorParams& det_s,
                              const DetectorParams& det_i, long long shots, std::uint64_t seed) {
  params.validate();
  det_s.validate();
  det_i.validate();
  if (shots < 0) throw ParameterDomainError("simulate_joint: negative shot count");
  JointHistogram joint(0, 0);
  TwbSampler sampler(params, derive_seed(seed, 1));
  std::mt19937_64 det_engine(derive_seed(seed, 2));
  for (long long s = 0; s < shots; ++s) {
    const TwbSample sample = sampler();
    const int cs = sample_photocount(det_s, sample.n_s, det_engine);
    const int ci = sample_photocount(det_i, sample.n_i, det_engine);
    joint.add(cs, ci);
  }
  return joint;
}

std::pair<CountDistribution, long long> condition_histogram(const JointHistogram& joint, int c_s) {
  if (c_s < 0 || c_s > joint.cs_max()) {
    throw ConditioningError("condition_histogram: no data at c_s = " + std::to_string(c_s));
  }
  std::vector<long long> row(static_cast<std::size_t>(joint.ci_max()) + 1, 0);
  long long total = 0;
  for (int ci = 0; ci <= joint.ci_max(); ++ci) {
    row[static_cast<std::size_t>(ci)] = joint(c_s, ci);
    total += joint(c_s, ci);
  }
  if (total == 0) {
    throw ConditioningError("condition_histogram: empty slice at c_s = " + std::to_string(c_s));
  }
  return {normalize_counts(row, total), total};
}

// ---------------------------------------------------------------------------
// Twin-beam model fit
// ---------------------------------------------------------------------------

namespace {

struct FitWorkspace {
  const JointHistogram& joint;
  DetectionMatrix mat_s;
  DetectionMatrix mat_i;
  int n_cap;
  double observed_ll_floor;
};

// Forward joint photocount distribution under the candidate parameters,
// restricted to the observed box and renormalized there.
double fit_log_likelihood(const FitWorkspace& ws, const TwinBeamParams& params) {
  const double tail = 1e-10;
  int ns = mandel_rice_support(params.Mp, params.Bp, tail, ws.n_cap) +
           mandel_rice_support(params.Ms, params.Bs, tail, ws.n_cap);
  int ni = mandel_rice_support(params.Mp, params.Bp, tail, ws.n_cap) +
           mandel_rice_support(params.Mi, params.Bi, tail, ws.n_cap);
  if (ns > ws.n_cap || ni > ws.n_cap) {
    return -1e15 * (1.0 + static_cast<double>(std::max(ns, ni)) / ws.n_cap);
  }
  JointPhotonDistribution pj = twb_joint_pmf(params, ns, ni, 1e-6);

  const int cs_top = ws.joint.cs_max();
  const int ci_top = ws.joint.ci_max();
  // F = T_s P T_i^T via an intermediate (cs, ni) contraction.
  std::vector<double> half(static_cast<std::size_t>(cs_top + 1) * (ni + 1), 0.0);
  for (int cs = 0; cs <= cs_top; ++cs) {
    for (int n_s = 0; n_s <= ns; ++n_s) {
      const double t = ws.mat_s(cs, n_s);
      if (t == 0.0) continue;
      for (int n_i = 0; n_i <= ni; ++n_i) {
        half[static_cast<std::size_t>(cs) * (ni + 1) + n_i] += t * pj(n_s, n_i);
      }
    }
  }
  std::vector<double> model(static_cast<std::size_t>(cs_top + 1) * (ci_top + 1), 0.0);
  double mass = 0.0;
  for (int cs = 0; cs <= cs_top; ++cs) {
    for (int ci = 0; ci <= ci_top; ++ci) {
      double acc = 0.0;
      for (int n_i = 0; n_i <= ni; ++n_i) {
        acc += ws.mat_i(ci, n_i) * half[static_cast<std::size_t>(cs) * (ni + 1) + n_i];
      }
      model[static_cast<std::size_t>(cs) * (ci_top + 1) + ci] = acc;
      mass += acc;
    }
  }
  if (!(mass > 0.0)) return -1e15;
  double ll = 0.0;
  const double log_mass = std::log(mass);
  for (int cs = 0; cs <= cs_top; ++cs) {
    for (int ci = 0; ci <= ci_top; ++ci) {
      const long long f = ws.joint(cs, ci);
      if (f == 0) continue;
      const double q = model[static_cast<std::size_t>(cs) * (ci_top + 1) + ci];
      if (q <= 0.0) return -1e15;
      ll += static_cast<double>(f) * (std::log(q) - log_mass);
    }
  }
  return ll;
}

TwinBeamParams params_from_log(const std::array<double, 6>& x) {
  return TwinBeamParams{std::exp(x[0]), std::exp(x[1]), std::exp(x[2]),
                        std::exp(x[3]), std::exp(x[4]), std::exp(x[5])};
}

struct SimplexResult {
  std::array<double, 6> x;
  double value = -std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

// Nelder-Mead maximization of fn over R^6 (log-parameter space).
SimplexResult nelder_mead(const std::function<double(const std::array<double, 6>&)>& fn,
                          const std::array<double, 6>& start, double step, int max_iters,
                          double tol) {
  constexpr int dim = 6;
  struct Vertex {
    std::array<double, 6> x;
    double f;
  };
  int evals = 0;
  auto eval = [&](const std::array<double, 6>& x) {
    ++evals;
    return fn(x);
  };
  std::vector<Vertex> simplex;
  simplex.push_back({start, eval(start)});
  for (int d = 0; d < dim; ++d) {
    auto x = start;
    x[static_cast<std::size_t>(d)] += step;
    simplex.push_back({x, eval(x)});
  }
  auto by_quality = [](const Vertex& a, const Vertex& b) { return a.f > b.f; };
  for (int it = 0; it < max_iters; ++it) {
    std::sort(simplex.begin(), simplex.end(), by_quality);
    // Absolute spread in nats: differences of interest are O(1).
    if (std::abs(simplex.front().f - simplex.back().f) < tol) {
      break;
    }
    std::array<double, 6> centroid{};
    for (int v = 0; v < dim; ++v) {
      for (int d = 0; d < dim; ++d) centroid[static_cast<std::size_t>(d)] += simplex[static_cast<std::size_t>(v)].x[static_cast<std::size_t>(d)] / dim;
    }
    auto blend = [&](double coeff) {
      std::array<double, 6> x;
      for (int d = 0; d < dim; ++d) {
        x[static_cast<std::size_t>(d)] = centroid[static_cast<std::size_t>(d)] +
                                         coeff * (centroid[static_cast<std::size_t>(d)] -
                                                  simplex.back().x[static_cast<std::size_t>(d)]);
      }
      return x;
    };
    auto reflected = blend(1.0);
    double fr = eval(reflected);
    if (fr > simplex.front().f) {
      auto expanded = blend(2.0);
      double fe = eval(expanded);
      simplex.back() = fe > fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
      continue;
    }
    if (fr > simplex[dim - 1].f) {
      simplex.back() = {reflected, fr};
      continue;
    }
    auto contracted = blend(-0.5);
    double fc = eval(contracted);
    if (fc > simplex.back().f) {
      simplex.back() = {contracted, fc};
      continue;
    }
    for (int v = 1; v <= dim; ++v) {
      for (int d = 0; d < dim; ++d) {
        simplex[static_cast<std::size_t>(v)].x[static_cast<std::size_t>(d)] =
            0.5 * (simplex[static_cast<std::size_t>(v)].x[static_cast<std::size_t>(d)] +
                   simplex[0].x[static_cast<std::size_t>(d)]);
      }
      simplex[static_cast<std::size_t>(v)].f = eval(simplex[static_cast<std::size_t>(v)].x);
    }
  }
  std::sort(simplex.begin(), simplex.end(), by_quality);
  return {simplex.front().x, simplex.front().f, evals};
}

}  // namespace

double twb_joint_log_likelihood(const JointHistogram& joint, const TwinBeamParams& params,
                                const DetectorParams& det_s, const DetectorParams& det_i) {
  const int n_cap = 360;
  FitWorkspace ws{joint, detection_matrix(det_s, joint.cs_max(), n_cap),
                  detection_matrix(det_i, joint.ci_max(), n_cap), n_cap, 0.0};
  return fit_log_likelihood(ws, params);
}

FitResult fit_twb(const JointHistogram& joint, const DetectorParams& det_s,
                  const DetectorParams& det_i, const FitConfig& config) {
  det_s.validate();
  det_i.validate();
  if (joint.shots() < 10000) {
    throw ParameterDomainError("fit_twb: need at least 1e4 shots for a meaningful fit");
  }
  const int n_cap = 360;
  FitWorkspace ws{joint, detection_matrix(det_s, joint.cs_max(), n_cap),
                  detection_matrix(det_i, joint.ci_max(), n_cap), n_cap, 0.0};

  auto objective = [&](const std::array<double, 6>& x) {
    return fit_log_likelihood(ws, params_from_log(x));
  };

  // Restart windows (log-uniform): pair component near the observed scale,
  // noise components broad and weakly identified.
  const double mean_cs = joint.signal_marginal().mean();
  const double scale = std::max(mean_cs / std::max(det_s.eta, 1e-3), 0.5);

  std::vector<SimplexResult> results(static_cast<std::size_t>(config.restarts));
  parallel_for(config.restarts, resolve_threads(config.threads), [&](int r) {
    std::mt19937_64 engine(derive_seed(config.seed, 100 + static_cast<std::uint64_t>(r)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) {
      return std::log(lo) + unit(engine) * (std::log(hi) - std::log(lo));
    };
    std::array<double, 6> start{
        log_uniform(10.0, 1500.0),                    // Mp
        std::log(scale) - log_uniform(10.0, 1500.0),  // Bp ~ scale / Mp
        log_uniform(0.005, 2.0),                      // Ms
        log_uniform(0.05, 20.0),                      // Bs
        log_uniform(0.005, 2.0),                      // Mi
        log_uniform(0.05, 20.0),                      // Bi
    };
    start[1] = std::log(scale) - start[0];
    // The likelihood has a long M_p * B_p ridge; a single simplex collapses on
    // it early. Re-seed the simplex at the incumbent with shrinking steps
    // until a round stops paying.
    SimplexResult best = nelder_mead(objective, start, 0.4, config.max_iters, config.tol);
    for (double step : {0.1, 0.03, 0.01}) {
      SimplexResult next = nelder_mead(objective, best.x, step, config.max_iters, config.tol);
      next.evaluations += best.evaluations;
      const double gain = next.value - best.value;
      best = next;
      if (gain < 0.01) break;
    }
    results[static_cast<std::size_t>(r)] = best;
  });

  int best = -1;
  for (int r = 0; r < config.restarts; ++r) {
    if (best < 0 || results[static_cast<std::size_t>(r)].value > results[static_cast<std::size_t>(best)].value) {
      best = r;
    }
  }
  const auto& won = results[static_cast<std::size_t>(best)];
  if (!std::isfinite(won.value) || won.value <= -1e14) {
    throw FitFailureError("fit_twb: all restarts stagnated outside the feasible region");
  }
  FitResult out;
  out.params = params_from_log(won.x);
  out.log_likelihood = won.value;
  out.best_restart = best;
  for (const auto& r : results) out.evaluations += r.evaluations;
  return out;
}

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

namespace {

JointHistogram resample_joint(const JointHistogram& joint, std::mt19937_64& engine) {
  const long long shots = joint.shots();
  JointHistogram out(joint.cs_max(), joint.ci_max());
  long long remaining = shots;
  double remaining_mass = 1.0;
  for (int cs = 0; cs <= joint.cs_max() && remaining > 0; ++cs) {
    for (int ci = 0; ci <= joint.ci_max() && remaining > 0; ++ci) {
      const double p = static_cast<double>(joint(cs, ci)) / static_cast<double>(shots);
      if (p <= 0.0) continue;
      const double cond = std::min(1.0, p / remaining_mass);
      long long draw;
      if (cond >= 1.0) {
        draw = remaining;
      } else {
        std::binomial_distribution<long long> binom(remaining, cond);
        draw = binom(engine);
      }
      out.at(cs, ci) = draw;
      remaining -= draw;
      remaining_mass -= p;
    }
  }
  return out;
}

}  // namespace

std::vector<double> bootstrap_errors(
    const JointHistogram& joint,
    const std::function<std::vector<double>(const JointHistogram&)>& statistic, int replicas,
    std::uint64_t seed, int threads) {
  if (replicas < 2) throw ParameterDomainError("bootstrap_errors: need at least 2 replicas");
  std::vector<std::vector<double>> values(static_cast<std::size_t>(replicas));
  parallel_for(replicas, resolve_threads(threads), [&](int r) {
    std::mt19937_64 engine(derive_seed(seed, 5000 + static_cast<std::uint64_t>(r)));
    values[static_cast<std::size_t>(r)] = statistic(resample_joint(joint, engine));
  });
  const std::size_t dims = values.front().size();
  for (const auto& v : values) {
    if (v.size() != dims) throw DimensionError("bootstrap_errors: replica statistic size varies");
  }
  std::vector<double> err(dims, 0.0);
  for (std::size_t d = 0; d < dims; ++d) {
    double sum = 0.0, sum2 = 0.0;
    int used = 0;
    for (const auto& v : values) {
      if (!std::isfinite(v[d])) continue;
      sum += v[d];
      sum2 += v[d] * v[d];
      ++used;
    }
    if (used >= 2) {
      const double mean = sum / used;
      const double var = std::max(0.0, sum2 / used - mean * mean) * used / (used - 1.0);
      err[d] = std::sqrt(var);
    } else {
      err[d] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return err;
}

// ---------------------------------------------------------------------------
// Post-selection sweep
// ---------------------------------------------------------------------------

namespace {

// Criteria report from intensity moments alone (naive eta^-k rescaling track):
// families I (with depth), II, III, IV; family V has no elements to use.
CriteriaReport report_from_intensity(const std::vector<double>& intensity,
                                     const ReportConfig& config) {
  CriteriaReport report;
  report.k_max = config.k_max;
  MomentSet m;
  m.k_max = static_cast<int>(intensity.size()) - 1;
  m.intensity = intensity;
  m.raw = stirling_transform(intensity);
  m.central = central_from_raw(m.raw);
  m.mean = intensity[1];
  report.mean = m.mean;
  report.fano = m.mean > 0.0 ? m.central[2] / m.mean : std::numeric_limits<double>::quiet_NaN();

  for (int k = 2; k <= config.k_max; ++k) {
    CriterionEntry e1{"I", k};
    try {
      e1.value = criterion_intensity(m, k);
      if (config.with_depth) {
        auto depth = nonclassicality_depth(m.intensity, k, config.depth);
        e1.tau = depth.tau;
        e1.multiple_roots = depth.multiple_roots;
      }
    } catch (const Error& err) {
      e1.value = std::numeric_limits<double>::quiet_NaN();
      e1.verdict = Verdict::inapplicable;
      e1.note = err.what();
    }
    report.entries.push_back(std::move(e1));

    CriterionEntry e2{"II", k};
    try {
      e2.value = criterion_photon(m, k);
    } catch (const Error& err) {
      e2.value = std::numeric_limits<double>::quiet_NaN();
      e2.verdict = Verdict::inapplicable;
      e2.note = err.what();
    }
    report.entries.push_back(std::move(e2));

    CriterionEntry e3{"III", k};
    try {
      auto r = criterion_intensity_fluctuation(m, k);
      e3.value = r.value;
      if (!r.applicable) e3.verdict = Verdict::inapplicable;
    } catch (const Error& err) {
      e3.value = std::numeric_limits<double>::quiet_NaN();
      e3.verdict = Verdict::inapplicable;
      e3.note = err.what();
    }
    report.entries.push_back(std::move(e3));

    CriterionEntry e4{"IV", k};
    try {
      auto r = criterion_photon_fluctuation(m, k);
      e4.value = r.value;
      if (r.applicability != Verdict::classical) e4.verdict = r.applicability;
    } catch (const Error& err) {
      e4.value = std::numeric_limits<double>::quiet_NaN();
      e4.verdict = Verdict::inapplicable;
      e4.note = err.what();
    }
    report.entries.push_back(std::move(e4));
  }
  apply_verdicts(report, config.z);
  return report;
}

struct SliceContext {
  const SweepConfig& config;
  DetectorParams det_i;
  DetectionMatrix em_matrix;  // shared across bootstrap replicas
  int n_support = 0;
};

SliceResult analyze_slice(const JointHistogram& joint, int cs, const SliceContext& ctx) {
  SliceResult slice;
  slice.cs = cs;
  const long long shots = joint.shots();
  try {
    auto [hist, slice_shots] = condition_histogram(joint, cs);
    slice.shots = slice_shots;
    slice.fs = static_cast<double>(slice_shots) / static_cast<double>(shots);
    slice.low_statistics = slice_shots < ctx.config.low_statistics_threshold;
    slice.conditional_hist = hist;

    slice.mean_photocount = hist.mean();
    slice.mean_naive = hist.mean() / ctx.det_i.eta;

    slice.photocount = full_report(hist, ctx.config.report);

    auto [rec, diag] = em_run(CountDistribution::uniform(ctx.em_matrix.n_max()), hist,
                              ctx.em_matrix, ctx.config.em);
    slice.reconstructed_dist = rec;
    slice.em = diag;
    slice.mean_reconstructed = rec.mean();
    slice.reconstructed = full_report(rec, ctx.config.report);

    // Naive track: intensity moments of the photocounts rescaled by eta^-k.
    auto w = factorial_moments(hist, std::max(ctx.config.report.k_max, 2));
    for (int k = 1; k < static_cast<int>(w.size()); ++k) {
      w[static_cast<std::size_t>(k)] /= std::pow(ctx.det_i.eta, k);
    }
    slice.naive = report_from_intensity(w, ctx.config.report);
  } catch (const ConditioningError& err) {
    slice.conditioned = false;
    slice.note = err.what();
  }
  return slice;
}

// Statistic layout shared by the sweep and its bootstrap replicas.
void collect_report_stats(const CriteriaReport& report, std::vector<double>& out) {
  for (const auto& e : report.entries) {
    out.push_back(e.value);
    if (e.family == "I") out.push_back(e.tau);
  }
}

// An unconditioned slice contributes only the four fixed slots; conditioned
// replicas of an unconditioned main slice cannot occur (resampling never
// populates empty cells), so widths always line up.
std::vector<double> collect_slice_stats(const SliceResult& slice) {
  std::vector<double> out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.push_back(slice.conditioned ? slice.fs : nan);
  out.push_back(slice.conditioned ? slice.mean_photocount : nan);
  out.push_back(slice.conditioned ? slice.mean_reconstructed : nan);
  out.push_back(slice.conditioned ? slice.mean_naive : nan);
  if (slice.conditioned) {
    collect_report_stats(slice.photocount, out);
    collect_report_stats(slice.reconstructed, out);
    collect_report_stats(*slice.naive, out);
  }
  return out;
}

void assign_report_errors(CriteriaReport& report, std::span<const double> err, std::size_t& cursor) {
  for (auto& e : report.entries) {
    e.std_error = err[cursor++];
    if (e.family == "I") e.tau_err = err[cursor++];
  }
}

}  // namespace

SweepResult sweep_postselect(const JointHistogram& joint, const DetectorParams& det_i,
                             const SweepConfig& config,
                             const std::optional<TwinBeamParams>& model,
                             const std::optional<DetectorParams>& det_s) {
  det_i.validate();
  if (config.cs_min < 0 || config.cs_max < config.cs_min) {
    throw ParameterDomainError("sweep_postselect: bad c_s range");
  }
  SweepResult result;
  result.config = config;
  result.model_supplied = model.has_value();

  const int slices = config.cs_max - config.cs_min + 1;
  const int threads = resolve_threads(config.threads);

  // Per-slice EM matrices, shared with bootstrap replicas.
  std::vector<SliceContext> contexts;
  contexts.reserve(static_cast<std::size_t>(slices));
  for (int i = 0; i < slices; ++i) {
    const int cs = config.cs_min + i;
    int n_support = 16;
    try {
      auto [hist, n_shots] = condition_histogram(joint, cs);
      (void)n_shots;
      n_support = reconstruction_support(hist, det_i.eta, config.support_factor);
    } catch (const ConditioningError&) {
      // keep the default; the slice will be flagged unconditioned anyway
    }
    const int c_top = std::max(suggest_c_max(det_i, n_support, 1e-13), joint.ci_max());
    contexts.push_back(SliceContext{config, det_i,
                                    detection_matrix(det_i, c_top, n_support), n_support});
  }

  result.slices.resize(static_cast<std::size_t>(slices));
  parallel_for(slices, threads, [&](int i) {
    result.slices[static_cast<std::size_t>(i)] =
        analyze_slice(joint, config.cs_min + i, contexts[static_cast<std::size_t>(i)]);
  });

  // Model-predicted track.
  if (model.has_value()) {
    if (!det_s.has_value()) {
      throw ParameterDomainError("sweep_postselect: model track requires signal detector params");
    }
    det_s->validate();
    const JointPhotonDistribution pj = twb_joint_pmf_auto(*model);
    const DetectionMatrix mat_s =
        detection_matrix(*det_s, std::max(config.cs_max, joint.cs_max()), pj.ns_max());
    const CountDistribution fs_theo = forward_photocount(pj.marginal_signal(), mat_s);
    parallel_for(slices, threads, [&](int i) {
      auto& slice = result.slices[static_cast<std::size_t>(i)];
      const int cs = config.cs_min + i;
      slice.fs_theo = fs_theo[cs];
      try {
        CountDistribution cond = conditional_theoretical(pj, mat_s, cs);
        slice.model_dist = cond;
        slice.mean_model_photon = cond.mean();
        slice.model = full_report(cond, config.report);
        const auto& ctx = contexts[static_cast<std::size_t>(i)];
        const DetectionMatrix mat_cond =
            detection_matrix(det_i, ctx.em_matrix.c_max(), cond.n_max());
        slice.mean_model_photocount = forward_photocount(cond, mat_cond).mean();
      } catch (const Error& err) {
        if (!slice.note.empty()) slice.note += "; ";
        slice.note += "model: " + std::string(err.what());
      }
    });
  }

  // Bootstrap errors over the whole sweep statistic vector.
  if (config.bootstrap_replicas >= 2) {
    auto statistic = [&](const JointHistogram& resampled) {
      std::vector<double> stats;
      for (int i = 0; i < slices; ++i) {
        SliceResult s = analyze_slice(resampled, config.cs_min + i, contexts[static_cast<std::size_t>(i)]);
        if (s.conditioned) {
          auto one = collect_slice_stats(s);
          stats.insert(stats.end(), one.begin(), one.end());
        } else {
          // Pad with NaN to the same width as the main slice.
          auto reference = collect_slice_stats(result.slices[static_cast<std::size_t>(i)]);
          stats.insert(stats.end(), reference.size(), std::numeric_limits<double>::quiet_NaN());
        }
      }
      return stats;
    };
    const auto err = bootstrap_errors(joint, statistic, config.bootstrap_replicas, config.seed,
                                      config.threads);
    std::size_t cursor = 0;
    for (auto& slice : result.slices) {
      if (!slice.conditioned) {
        cursor += collect_slice_stats(slice).size();
        continue;
      }
      cursor++;  // fs error not attached (realization probability)
      slice.mean_photocount_err = err[cursor++];
      slice.mean_reconstructed_err = err[cursor++];
      cursor++;  // naive mean error mirrors the photocount one
      assign_report_errors(slice.photocount, err, cursor);
      assign_report_errors(slice.reconstructed, err, cursor);
      assign_report_errors(*slice.naive, err, cursor);
      apply_verdicts(slice.photocount, config.report.z);
      apply_verdicts(slice.reconstructed, config.report.z);
      apply_verdicts(*slice.naive, config.report.z);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Figure datasets
// ---------------------------------------------------------------------------

namespace {

void csv_value(std::ostream& out, double v) {
  if (std::isfinite(v)) {
    out << v;
  }  // empty field for NaN
}

}  // namespace

std::vector<std::string> known_figures() {
  return {"fig2a", "fig2b", "fig3", "fig4", "fig5", "fig6"};
}

void emit_figure_data(const SweepResult& sweep, const std::string& figure_id, std::ostream& out) {
  out.precision(12);
  if (figure_id == "fig2a") {
    out << "cs,f_s,f_s_theo\n";
    for (const auto& s : sweep.slices) {
      out << s.cs << ',';
      csv_value(out, s.conditioned ? s.fs : std::numeric_limits<double>::quiet_NaN());
      out << ',';
      csv_value(out, sweep.model_supplied ? s.fs_theo : std::numeric_limits<double>::quiet_NaN());
      out << '\n';
    }
    return;
  }
  if (figure_id == "fig2b") {
    out << "cs,mean_photocount,mean_photocount_err,mean_reconstructed,mean_reconstructed_err,"
           "mean_model_photon,mean_model_photocount,mean_naive\n";
    for (const auto& s : sweep.slices) {
      out << s.cs << ',';
      csv_value(out, s.mean_photocount);
      out << ',';
      csv_value(out, s.mean_photocount_err);
      out << ',';
      csv_value(out, s.mean_reconstructed);
      out << ',';
      csv_value(out, s.mean_reconstructed_err);
      out << ',';
      csv_value(out, sweep.model_supplied ? s.mean_model_photon
                                          : std::numeric_limits<double>::quiet_NaN());
      out << ',';
      csv_value(out, sweep.model_supplied ? s.mean_model_photocount
                                          : std::numeric_limits<double>::quiet_NaN());
      out << ',';
      csv_value(out, s.mean_naive);
      out << '\n';
    }
    return;
  }
  auto emit_entries = [&](const std::string& family_a, const std::string& family_b,
                          bool taus) {
    out << (taus ? "cs,k,track,tau,tau_err\n" : "cs,k,track,family,value,err\n");
    for (const auto& s : sweep.slices) {
      auto walk = [&](const CriteriaReport* report, const char* track) {
        if (report == nullptr) return;
        for (const auto& e : report->entries) {
          if (e.family != family_a && e.family != family_b) continue;
          if (taus && e.family != "I") continue;
          out << s.cs << ',' << e.k << ',' << track << ',';
          if (taus) {
            csv_value(out, e.tau);
            out << ',';
            csv_value(out, e.tau_err);
          } else {
            out << e.family << ',';
            csv_value(out, e.value);
            out << ',';
            csv_value(out, e.std_error.value_or(std::numeric_limits<double>::quiet_NaN()));
          }
          out << '\n';
        }
      };
      if (!s.conditioned) continue;
      walk(&s.photocount, "photocount");
      walk(&s.reconstructed, "reconstructed");
      walk(s.model.has_value() ? &*s.model : nullptr, "model");
      walk(s.naive.has_value() ? &*s.naive : nullptr, "naive");
    }
  };
  if (figure_id == "fig3") {
    emit_entries("I", "II", false);
    return;
  }
  if (figure_id == "fig4") {
    emit_entries("I", "I", true);
    return;
  }
  if (figure_id == "fig5") {
    out << "cs,k,family,value,err\n";
    for (const auto& s : sweep.slices) {
      if (!s.conditioned) continue;
      for (const auto& e : s.photocount.entries) {
        if (e.family != "III" && e.family != "IV") continue;
        out << s.cs << ',' << e.k << ',' << e.family << ',';
        csv_value(out, e.value);
        out << ',';
        csv_value(out, e.std_error.value_or(std::numeric_limits<double>::quiet_NaN()));
        out << '\n';
      }
    }
    return;
  }
  if (figure_id == "fig6") {
    out << "cs,k,value,err\n";
    for (const auto& s : sweep.slices) {
      if (!s.conditioned) continue;
      for (const auto& e : s.photocount.entries) {
        if (e.family != "V") continue;
        out << s.cs << ',' << e.k << ',';
        csv_value(out, e.value);
        out << ',';
        csv_value(out, e.std_error.value_or(std::numeric_limits<double>::quiet_NaN()));
        out << '\n';
      }
    }
    return;
  }
  throw ParameterDomainError("emit_figure_data: unknown figure id '" + figure_id + "'");
}

}  // namespace subpoisson
