#pragma once

#include <optional>
#include <string>
#include <vector>

#include "subpoisson/moments.hpp"
#include "subpoisson/pmf.hpp"

namespace subpoisson {

enum class Verdict { nonclassical, classical, inapplicable, unestablished };

std::string to_string(Verdict v);

/// r_W^(k) = <W^k>/<W>^k - 1; negative values flag k-th order nonclassicality.
double criterion_intensity(const MomentSet& m, int k);

/// r_n^(k) = <n^k>/<n^k>_Pois - 1 at equal mean.
double criterion_photon(const MomentSet& m, int k);

/// r_dW^(k) = <(Delta W)^k>/<W>^k. Meaningful as a nonclassicality test only
/// for even k; `applicable` is false for odd k.
struct Ratio {
  double value = 0.0;
  bool applicable = true;
};
Ratio criterion_intensity_fluctuation(const MomentSet& m, int k);

/// r_dn^(k) = <(Delta n)^k>/<(Delta n)^k>_Pois - 1. k = 3 indicates
/// nonclassicality only when <W> < 3; orders k >= 5 are reported but their
/// verdict is `unestablished`.
struct FluctuationRatio {
  double value = 0.0;
  Verdict applicability = Verdict::classical;  // inapplicable / unestablished when limited
};
FluctuationRatio criterion_photon_fluctuation(const MomentSet& m, int k);

/// r_p^(k) = p~(k)/p~(1)^k - 1 with p~(k) = k! p(k)/p(0). Throws
/// InapplicableCriterionError when p(0) or p(1) is below `floor`.
double criterion_elements(const CountDistribution& dist, int k, double floor = 1e-12);

struct DepthConfig {
  double s_tol = 1e-6;     // bisection tolerance on the ordering parameter
  int max_iters = 200;
  int scan_points = 256;   // coarse scan for bracketing / multiple-root detection
  NoiseCoupling coupling = NoiseCoupling::same_mode;
};

struct DepthResult {
  double tau = 0.0;        // in [0, 1]
  bool multiple_roots = false;
};

/// Nonclassicality depth tau^(k) = (1 - s_th)/2: the least added thermal noise
/// that removes the order-k intensity criterion. 0 when the field is already
/// classical at s = 1; 1 when the criterion survives even at s = -1. Multiple
/// sign changes of the criterion along s return the smallest-noise root with a
/// warning flag.
DepthResult nonclassicality_depth(const CountDistribution& dist, int k,
                                  const DepthConfig& config = {});
DepthResult nonclassicality_depth(std::span<const double> intensity_moments, int k,
                                  const DepthConfig& config = {});

struct CriterionEntry {
  std::string family;   // "I".."V"
  int k = 0;
  double value = 0.0;
  std::optional<double> std_error;
  Verdict verdict = Verdict::classical;
  double tau = 0.0;               // family I only
  double tau_err = 0.0;           // filled by bootstrap when available
  bool multiple_roots = false;
  std::string note;               // failure reason when a family cannot be evaluated
};

struct CriteriaReport {
  int k_max = 0;
  double mean = 0.0;
  double fano = 0.0;
  std::vector<CriterionEntry> entries;

  const CriterionEntry* find(const std::string& family, int k) const;
};

struct ReportConfig {
  int k_max = 5;
  int k_max_elements = 9;   // family V is cheap and stable to higher order
  double z = 1.0;           // verdict needs value + z * std_error < 0
  double element_floor = 1e-12;
  DepthConfig depth;
  bool with_depth = true;
};

/// Families I-V (plus depth for family I) on one distribution. Entries that
/// cannot be evaluated are carried with verdict `inapplicable` and a note
/// rather than aborting the report.
CriteriaReport full_report(const CountDistribution& dist, const ReportConfig& config = {});

/// Re-derive verdicts once bootstrap errors are attached.
void apply_verdicts(CriteriaReport& report, double z);

}  // namespace subpoisson
