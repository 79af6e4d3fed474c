#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "subpoisson/criteria.hpp"
#include "subpoisson/detector.hpp"
#include "subpoisson/distributions.hpp"
#include "subpoisson/reconstruction.hpp"

namespace subpoisson {

/// 2D joint signal-idler photocount histogram f(c_s, c_i) with total shots.
class JointHistogram {
 public:
  JointHistogram() = default;
  JointHistogram(int cs_max, int ci_max);

  long long operator()(int cs, int ci) const {
    return counts_[static_cast<std::size_t>(cs) * (ci_max_ + 1) + ci];
  }
  long long& at(int cs, int ci) {
    return counts_[static_cast<std::size_t>(cs) * (ci_max_ + 1) + ci];
  }
  void add(int cs, int ci, long long count = 1);

  int cs_max() const { return cs_max_; }
  int ci_max() const { return ci_max_; }
  long long shots() const;

  std::vector<long long> signal_counts() const;      // f_s(c_s) raw counts
  std::vector<long long> idler_counts() const;
  CountDistribution signal_marginal() const;         // normalized
  CountDistribution idler_marginal() const;

 private:
  std::vector<long long> counts_;
  int cs_max_ = -1, ci_max_ = -1;
};

/// Simulate a joint histogram: twin-beam photon pairs through both detector
/// models, `shots` repetitions. Deterministic for a given seed.
JointHistogram simulate_joint(const TwinBeamParams& params, const DetectorParams& det_s,
                              const DetectorParams& det_i, long long shots, std::uint64_t seed);

/// Normalized conditional idler histogram at signal photocount c_s together
/// with the number of shots in the slice. Throws ConditioningError on an
/// empty slice.
std::pair<CountDistribution, long long> condition_histogram(const JointHistogram& joint, int c_s);

struct FitConfig {
  int restarts = 8;
  int max_iters = 2000;      // simplex iterations per round
  double tol = 1e-3;         // simplex value spread, nats
  std::uint64_t seed = 1;    // restart initialization
  int threads = 0;
};

struct FitResult {
  TwinBeamParams params;
  double log_likelihood = 0.0;
  int best_restart = -1;
  int evaluations = 0;
};

/// Maximum-likelihood fit of the three-component twin-beam model to a joint
/// photocount histogram: multinomial likelihood of the forward-modeled joint
/// photocount distribution, Nelder-Mead over log-parameters with multistart.
FitResult fit_twb(const JointHistogram& joint, const DetectorParams& det_s,
                  const DetectorParams& det_i, const FitConfig& config = {});

/// Multinomial log-likelihood of the joint histogram under given parameters
/// (the objective maximized by fit_twb).
double twb_joint_log_likelihood(const JointHistogram& joint, const TwinBeamParams& params,
                                const DetectorParams& det_s, const DetectorParams& det_i);

/// Multinomial bootstrap: resample the joint histogram at its own shot count,
/// apply `statistic`, return the standard deviation per component across
/// replicas. NaN replica entries are ignored per component.
std::vector<double> bootstrap_errors(const JointHistogram& joint,
                                     const std::function<std::vector<double>(const JointHistogram&)>& statistic,
                                     int replicas, std::uint64_t seed, int threads = 0);

struct SweepConfig {
  int cs_min = 1;
  int cs_max = 10;
  ReportConfig report;
  EMConfig em;
  int bootstrap_replicas = 0;
  std::uint64_t seed = 1;
  int threads = 0;
  long long low_statistics_threshold = 100;
  double support_factor = 4.0;   // reconstruction n_max = factor * <c>/eta
};

/// One post-selection slice: criteria on the photocount histogram, on the
/// EM-reconstructed photon distribution, and (when the model is supplied) on
/// the model-predicted conditional distribution.
struct SliceResult {
  int cs = 0;
  double fs = 0.0;                    // realization probability
  double fs_theo = 0.0;               // model prediction (when available)
  long long shots = 0;
  bool low_statistics = false;
  bool conditioned = true;            // false when the slice was empty
  std::string note;

  double mean_photocount = 0.0;
  double mean_photocount_err = 0.0;
  double mean_reconstructed = 0.0;
  double mean_reconstructed_err = 0.0;
  double mean_naive = 0.0;            // <c>/eta, no dark-count correction
  double mean_model_photon = 0.0;
  double mean_model_photocount = 0.0;

  CriteriaReport photocount;
  CriteriaReport reconstructed;
  std::optional<CriteriaReport> model;
  std::optional<CriteriaReport> naive;  // intensity moments scaled by eta^-k

  CountDistribution conditional_hist;
  CountDistribution reconstructed_dist;
  std::optional<CountDistribution> model_dist;
  EMDiagnostics em;
};

struct SweepResult {
  std::vector<SliceResult> slices;
  SweepConfig config;
  bool model_supplied = false;
};

/// Post-selection sweep over c_s with optional model track and bootstrap
/// errors. Sparse or empty slices are carried with flags, never dropped.
SweepResult sweep_postselect(const JointHistogram& joint, const DetectorParams& det_i,
                             const SweepConfig& config,
                             const std::optional<TwinBeamParams>& model = std::nullopt,
                             const std::optional<DetectorParams>& det_s = std::nullopt);

/// Figure-ready CSV datasets flattened from a sweep. Known ids: fig2a, fig2b,
/// fig3, fig4, fig5, fig6. Throws ParameterDomainError on unknown ids.
void emit_figure_data(const SweepResult& sweep, const std::string& figure_id, std::ostream& out);
std::vector<std::string> known_figures();

}  // namespace subpoisson
