// End-to-end acceptance checks at the published operating point. Each
// criterion prints one PASS/FAIL line; the exit status is the number of
// failures. Run a single criterion with --criterion N.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

#include "subpoisson/criteria.hpp"
#include "subpoisson/detector.hpp"
#include "subpoisson/distributions.hpp"
#include "subpoisson/moments.hpp"
#include "subpoisson/pipeline.hpp"
#include "subpoisson/reconstruction.hpp"

using namespace subpoisson;

namespace {

const TwinBeamParams kParams{270.0, 0.032, 0.01, 7.6, 0.026, 5.3};
const DetectorParams kSignal = DetectorParams::with_total_dark(6528, 0.230, 0.04);
const DetectorParams kIdler = DetectorParams::with_total_dark(6784, 0.220, 0.04);
constexpr long long kShots = 1'200'000;
constexpr std::uint64_t kSeed = 20250810;

struct Gate {
  int failures = 0;
  void check(bool ok, const char* label, const std::string& detail) {
    std::printf("%s  %s%s%s\n", ok ? "PASS" : "FAIL", label, detail.empty() ? "" : ": ",
                detail.c_str());
    if (!ok) ++failures;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

CountDistribution model_conditional(int cs) {
  static const JointPhotonDistribution joint = twb_joint_pmf_auto(kParams);
  static const DetectionMatrix mat = detection_matrix(kSignal, 40, joint.ns_max());
  return conditional_theoretical(joint, mat, cs);
}

// 1. Simulated photocount means at the published parameters.
void criterion_means(Gate& gate) {
  const auto start = std::chrono::steady_clock::now();
  const auto joint = simulate_joint(kParams, kSignal, kIdler, kShots, kSeed);
  const double elapsed = seconds_since(start);
  const double mean_s = joint.signal_marginal().mean();
  const double mean_i = joint.idler_marginal().mean();
  char buf[160];
  std::snprintf(buf, sizeof buf, "<c_s> = %.4f (window [2.09, 2.31])", mean_s);
  gate.check(mean_s >= 2.09 && mean_s <= 2.31, "criterion 1a", buf);
  std::snprintf(buf, sizeof buf, "<c_i> = %.4f (window [2.07, 2.29])", mean_i);
  gate.check(mean_i >= 2.07 && mean_i <= 2.29, "criterion 1b", buf);
  std::snprintf(buf, sizeof buf, "runtime %.1f s (< 120 s)", elapsed);
  gate.check(elapsed < 120.0, "criterion 1c", buf);
}

// 2. Model-predicted conditional idler means over c_s = 1..10.
void criterion_conditional_means(Gate& gate) {
  std::vector<double> means;
  for (int cs = 1; cs <= 10; ++cs) means.push_back(model_conditional(cs).mean());
  bool monotone = true;
  for (std::size_t i = 1; i < means.size(); ++i) {
    if (means[i] <= means[i - 1]) monotone = false;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "means %.2f .. %.2f (%.2f at c_s=9)", means.front(),
                means.back(), means[8]);
  gate.check(monotone, "criterion 2a (monotone over c_s = 1..10)", buf);
  std::snprintf(buf, sizeof buf, "start %.3f (window 7 +- 1.5)", means.front());
  gate.check(std::abs(means.front() - 7.0) <= 1.5, "criterion 2b", buf);
  std::snprintf(buf, sizeof buf, "end %.3f (window 15 +- 3)", means.back());
  gate.check(std::abs(means.back() - 15.0) <= 3.0, "criterion 2c", buf);
}

// 3. Model-track intensity criteria signs.
void criterion_signs(Gate& gate) {
  bool ok23 = true, ok45 = true;
  std::string detail23, detail45;
  for (int cs = 3; cs <= 7; ++cs) {
    auto m = compute_moments(model_conditional(cs), 5);
    const double r2 = criterion_intensity(m, 2);
    const double r3 = criterion_intensity(m, 3);
    if (!(r2 < 0.0 && r3 < 0.0)) ok23 = false;
    if (cs >= 5) {
      const double r4 = criterion_intensity(m, 4);
      const double r5 = criterion_intensity(m, 5);
      if (!(r4 < 0.0 && r5 < 0.0)) ok45 = false;
      char buf[120];
      std::snprintf(buf, sizeof buf, "cs=%d r4=%.2e r5=%.2e; ", cs, r4, r5);
      detail45 += buf;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "cs=%d r2=%.2e r3=%.2e; ", cs, r2, r3);
    detail23 += buf;
  }
  gate.check(ok23, "criterion 3a (r_W(2), r_W(3) < 0 for c_s in 3..7)", detail23);
  gate.check(ok45, "criterion 3b (r_W(4), r_W(5) < 0 for c_s in 5..7)", detail45);
}

// 4. Element criteria with bootstrap errors on the simulated photocount track.
void criterion_elements_sweep(Gate& gate) {
  const auto start = std::chrono::steady_clock::now();
  const auto joint = simulate_joint(kParams, kSignal, kIdler, kShots, kSeed);
  SweepConfig config;
  config.cs_min = 3;
  config.cs_max = 6;
  config.report.k_max = 2;          // moment families are not under test here
  config.report.k_max_elements = 9;
  config.report.with_depth = false;
  config.bootstrap_replicas = 500;
  config.em.tol = 1e-8;             // error bars do not need the full depth
  config.seed = kSeed + 1;
  const auto sweep = sweep_postselect(joint, kIdler, config);
  bool all_negative = true;
  std::string detail;
  for (const auto& slice : sweep.slices) {
    for (int k = 2; k <= 9; ++k) {
      const auto* e = slice.photocount.find("V", k);
      const double err = e->std_error.value_or(0.0);
      if (!(e->value + err < 0.0)) {
        all_negative = false;
        char buf[96];
        std::snprintf(buf, sizeof buf, "cs=%d k=%d value=%.3e err=%.3e; ", slice.cs, k, e->value,
                      err);
        detail += buf;
      }
    }
  }
  const double elapsed = seconds_since(start);
  if (all_negative) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "all r_p(k)+err < 0 for c_s in 3..6, k <= 9");
    detail = buf;
  }
  gate.check(all_negative, "criterion 4a", detail);
  char buf[64];
  std::snprintf(buf, sizeof buf, "runtime %.1f s (< 600 s)", elapsed);
  gate.check(elapsed < 600.0, "criterion 4b", buf);
}

// 5. Nonclassicality depth of the model-predicted c_s = 5 field.
void criterion_depth(Gate& gate) {
  const auto depth = nonclassicality_depth(model_conditional(5), 2);
  char buf[96];
  std::snprintf(buf, sizeof buf, "tau(2) = %.4f (window [0.09, 0.19])", depth.tau);
  gate.check(depth.tau >= 0.09 && depth.tau <= 0.19, "criterion 5", buf);
}

// 6. Identity suite.
void criterion_identities(Gate& gate) {
  // 6a: Stirling-transform identity on 1000 random distributions.
  {
    std::mt19937_64 engine(4711);
    std::uniform_int_distribution<int> sizes(2, 24);
    std::exponential_distribution<double> weight(1.0);
    bool ok = true;
    for (int rep = 0; rep < 1000 && ok; ++rep) {
      std::vector<double> p(static_cast<std::size_t>(sizes(engine)));
      double total = 0.0;
      for (auto& v : p) total += (v = weight(engine));
      for (auto& v : p) v /= total;
      CountDistribution d{std::move(p)};
      if (d.mean() <= 0.0) continue;
      auto m = compute_moments(d, 6);
      auto ref = poisson_reference(m.mean, 6);
      for (int k = 2; k <= 6; ++k) {
        double rhs = 0.0;
        for (int l = 1; l <= k; ++l) rhs += stirling2(k, l) * (m.intensity[l] - std::pow(m.mean, l));
        const double lhs = m.raw[k] - ref.raw[k];
        if (std::abs(lhs - rhs) > 1e-9 * (1.0 + std::abs(lhs))) ok = false;
      }
    }
    gate.check(ok, "criterion 6a (moment identity, 1000 random fields)", "");
  }
  // 6b: detection-matrix column stochasticity.
  {
    bool ok = true;
    auto small = detection_matrix(DetectorParams{12, 0.41, 0.02}, 12, 24);
    for (int n = 0; n <= 24; ++n) {
      if (std::abs(small.column_sum(n) - 1.0) > 1e-8) ok = false;
    }
    auto camera = detection_matrix(kSignal, 40, 50);
    for (int n = 0; n <= 50; ++n) {
      if (std::abs(camera.column_sum(n) - 1.0) > 1e-8) ok = false;
    }
    gate.check(ok, "criterion 6b (column stochasticity within 1e-8)", "");
  }
  // 6c: detection Monte Carlo equivalence at 1e6 shots.
  {
    bool ok = true;
    std::string detail;
    const DetectorParams grid[] = {{10, 0.5, 0.01}, {100, 0.22, 4e-4}, {200, 0.9, 0.05}};
    for (const auto& p : grid) {
      const int c_top = static_cast<int>(std::min<long long>(p.N, 40));
      auto mat = detection_matrix(p, c_top, 12);
      for (int n : {0, 5, 12}) {
        auto empirical = mc_sample_detection(p, n, 1'000'000, 1234 + n);
        std::vector<double> column(static_cast<std::size_t>(c_top) + 1);
        for (int c = 0; c <= c_top; ++c) column[static_cast<std::size_t>(c)] = mat(c, n);
        const double tv = total_variation(CountDistribution(std::move(column)), empirical);
        if (tv >= 0.01) {
          ok = false;
          char buf[96];
          std::snprintf(buf, sizeof buf, "N=%lld eta=%.2f n=%d TV=%.4f; ", p.N, p.eta, n, tv);
          detail += buf;
        }
      }
    }
    gate.check(ok, "criterion 6c (Monte Carlo TV < 0.01 at 1e6 shots)", detail);
  }
  // 6d: EM likelihood monotonicity on 100 random problems.
  {
    std::mt19937_64 engine(909);
    std::uniform_int_distribution<int> sizes(4, 20);
    std::exponential_distribution<double> weight(1.0);
    std::uniform_real_distribution<double> etas(0.1, 0.95), noise(0.5, 1.5);
    bool ok = true;
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> p(static_cast<std::size_t>(sizes(engine)));
      double total = 0.0;
      for (auto& v : p) total += (v = weight(engine));
      for (auto& v : p) v /= total;
      CountDistribution truth{std::move(p)};
      DetectorParams det{500, etas(engine), 1e-4};
      auto mat = detection_matrix(det, suggest_c_max(det, truth.n_max(), 1e-12), truth.n_max());
      auto forward = forward_photocount(truth, mat);
      std::vector<double> bumpy(forward.probs().begin(), forward.probs().end());
      for (auto& v : bumpy) v *= noise(engine);
      auto hist = CountDistribution(std::move(bumpy)).normalized();
      EMConfig config;
      config.max_iters = 300;
      auto [rec, diag] = em_run(CountDistribution::uniform(mat.n_max()), hist, mat, config);
      if (!diag.monotone) ok = false;
    }
    gate.check(ok, "criterion 6d (EM likelihood monotone, 100 problems)", "");
  }
  // 6e: the declination series integrates to zero.
  {
    bool ok = true;
    std::string detail;
    auto field = model_conditional(5);
    for (double s : {0.9, 0.0}) {
      auto moments = s_ordered_moments(field, s, 10);
      const double a = moments.moments[1];
      const int pts = 60000;
      std::vector<double> grid(static_cast<std::size_t>(pts));
      for (int i = 0; i < pts; ++i) grid[static_cast<std::size_t>(i)] = 40.0 * a * i / (pts - 1);
      auto delta = quasi_delta(moments, grid, 10);
      double integral = 0.0;
      for (int i = 0; i + 1 < pts; ++i) {
        integral += 0.5 * (delta[static_cast<std::size_t>(i)] + delta[static_cast<std::size_t>(i) + 1]) *
                    (grid[static_cast<std::size_t>(i) + 1] - grid[static_cast<std::size_t>(i)]);
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "s=%.1f integral=%.2e; ", s, integral);
      detail += buf;
      if (std::abs(integral) > 1e-6) ok = false;
    }
    gate.check(ok, "criterion 6e (declination integrates to 0 within 1e-6)", detail);
  }
  // 6f: Poissonian inputs scrub every criterion.
  {
    bool ok = true;
    for (double mean : {0.8, 2.1, 6.5}) {
      auto pois = CountDistribution::poisson(mean, 1e-16);
      ReportConfig config;
      config.k_max = 5;
      config.k_max_elements = 9;
      auto report = full_report(pois, config);
      for (const auto& e : report.entries) {
        if (e.verdict == Verdict::inapplicable || e.verdict == Verdict::unestablished) continue;
        if (std::abs(e.value) > 1e-10) ok = false;
        if (e.verdict != Verdict::classical) ok = false;
        if (e.family == "I" && e.tau != 0.0) ok = false;
      }
    }
    gate.check(ok, "criterion 6f (Poisson fields: criteria 0 within 1e-10, tau = 0)", "");
  }
}

// 7. Known-value suite.
void criterion_known_values(Gate& gate) {
  auto fock = CountDistribution::delta(1);
  auto m = compute_moments(fock, 2);
  const double r2 = criterion_intensity(m, 2);
  char buf[160];
  std::snprintf(buf, sizeof buf, "r_W(2) = %.12f", r2);
  gate.check(std::abs(r2 + 1.0) < 1e-12, "criterion 7a (one-photon r_W(2) = -1)", buf);
  const double f = fano(fock);
  std::snprintf(buf, sizeof buf, "F = %.12f", f);
  gate.check(f == 0.0, "criterion 7b (one-photon Fano = 0)", buf);
  const auto depth = nonclassicality_depth(fock, 2);
  std::snprintf(buf, sizeof buf, "tau(2) = %.6f under amplitude smoothing (sqrt(2)-1 = %.6f)",
                depth.tau, std::sqrt(2.0) - 1.0);
  gate.check(std::abs(depth.tau - 1.0) < 1e-5, "criterion 7c (one-photon tau(2) = 1)", buf);

  const double mu = 1.3;
  std::vector<double> thermal(400);
  const double q = mu / (1.0 + mu);
  for (int n = 0; n < 400; ++n) thermal[static_cast<std::size_t>(n)] = (1.0 - q) * std::pow(q, n);
  CountDistribution th{std::move(thermal)};
  auto mt = compute_moments(th, 2);
  const double rt = criterion_intensity(mt, 2);
  std::snprintf(buf, sizeof buf, "r_W(2) = %.9f", rt);
  gate.check(std::abs(rt - 1.0) < 1e-8, "criterion 7d (thermal r_W(2) = +1)", buf);
  bool ok = true;
  double kfac = 1.0;
  for (int k = 2; k <= 6; ++k) {
    kfac *= k;
    const double rp = criterion_elements(th, k);
    if (std::abs(rp - (kfac - 1.0)) > 1e-8 * kfac) ok = false;
  }
  gate.check(ok, "criterion 7e (thermal r_p(k) = k! - 1)", "");
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
  }
  Gate gate;
  if (only == 0 || only == 1) criterion_means(gate);
  if (only == 0 || only == 2) criterion_conditional_means(gate);
  if (only == 0 || only == 3) criterion_signs(gate);
  if (only == 0 || only == 4) criterion_elements_sweep(gate);
  if (only == 0 || only == 5) criterion_depth(gate);
  if (only == 0 || only == 6) criterion_identities(gate);
  if (only == 0 || only == 7) criterion_known_values(gate);
  std::printf("%d check(s) failed\n", gate.failures);
  return gate.failures;
}
