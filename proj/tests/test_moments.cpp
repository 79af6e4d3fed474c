#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "subpoisson/distributions.hpp"
#include "subpoisson/moments.hpp"

using namespace subpoisson;

TEST_SUITE_BEGIN("moments");

TEST_CASE("stirling numbers: diagonal, base cases, explicit-sum oracle") {
  CHECK(stirling2(1, 1) == 1.0);
  for (int k = 1; k <= 10; ++k) CHECK(stirling2(k, k) == 1.0);
  CHECK(stirling2(3, 2) == doctest::Approx(oracle::stirling2_sum(3, 2)));
  CHECK(stirling2(3, 2) == 3.0);
  for (int k = 1; k <= 12; ++k) {
    for (int l = 1; l <= k; ++l) {
      CHECK(stirling2(k, l) == doctest::Approx(oracle::stirling2_sum(k, l)).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(stirling2(3, 4), ParameterDomainError);
  CHECK_THROWS_AS(stirling2(3, 0), ParameterDomainError);
}

TEST_CASE("factorial moments of a Poissonian field are powers of the mean") {
  auto p = CountDistribution::poisson(2.5, 1e-16);
  auto w = factorial_moments(p, 6);
  for (int k = 1; k <= 6; ++k) CHECK(w[k] == doctest::Approx(std::pow(2.5, k)).epsilon(1e-10));
}

TEST_CASE("factorial moments of a one-photon field") {
  auto p = CountDistribution::delta(1);
  auto w = factorial_moments(p, 3);
  CHECK(w[1] == 1.0);
  CHECK(w[2] == 0.0);
  CHECK(w[3] == 0.0);
}

TEST_CASE("factorial moments of a thermal field are k! mu^k") {
  const double mu = 0.8;
  auto p = oracle::thermal_pmf(mu, 160);
  auto w = factorial_moments(p, 5);
  double kfac = 1.0;
  for (int k = 1; k <= 5; ++k) {
    kfac *= k;
    CHECK(w[k] == doctest::Approx(kfac * std::pow(mu, k)).epsilon(1e-9));
  }
}

TEST_CASE("stirling transform identities at low order") {
  std::mt19937_64 engine(31337);
  for (int rep = 0; rep < 20; ++rep) {
    auto d = oracle::random_distribution(engine);
    auto w = factorial_moments(d, 2);
    auto raw = stirling_transform(w);
    CHECK(raw[1] == doctest::Approx(w[1]).epsilon(1e-12));            // <n> = <W>
    CHECK(raw[2] == doctest::Approx(w[1] + w[2]).epsilon(1e-12));     // <n^2> = <W> + <W^2>
  }
}

TEST_CASE("stirling transform equals direct raw moments on random distributions") {
  std::mt19937_64 engine(777);
  for (int rep = 0; rep < 100; ++rep) {
    auto d = oracle::random_distribution(engine);
    auto raw = stirling_transform(factorial_moments(d, 6));
    for (int k = 1; k <= 6; ++k) {
      const double direct = oracle::raw_moment(d, k);
      CHECK(raw[k] == doctest::Approx(direct).epsilon(1e-10));
    }
  }
}

TEST_CASE("poisson reference central moments match the closed forms") {
  const double mean = 3.4;
  auto ref = poisson_reference(mean, 5);
  CHECK(ref.central[2] == doctest::Approx(mean));
  CHECK(ref.central[3] == doctest::Approx(mean));
  CHECK(ref.central[4] == doctest::Approx(mean + 3.0 * mean * mean));
  CHECK(ref.central[5] == doctest::Approx(mean + 10.0 * mean * mean));
  // zero-mean field: everything vanishes
  auto zero = poisson_reference(0.0, 4);
  for (int k = 1; k <= 4; ++k) {
    CHECK(zero.raw[k] == 0.0);
    CHECK(zero.central[k] == 0.0);
  }
  // direct check against a finely truncated Poisson pmf
  auto p = CountDistribution::poisson(mean, 1e-16);
  for (int k = 2; k <= 5; ++k) {
    CHECK(ref.central[k] == doctest::Approx(oracle::central_moment(p, k)).epsilon(1e-9));
    CHECK(ref.raw[k] == doctest::Approx(oracle::raw_moment(p, k)).epsilon(1e-9));
  }
}

TEST_CASE("central moments: k=1 vanishes, Poisson variance, random oracle") {
  auto p = CountDistribution::poisson(1.9, 1e-15);
  auto c = central_moments(p, 2);
  CHECK(std::abs(c[1]) < 1e-12);
  CHECK(c[2] == doctest::Approx(1.9).epsilon(1e-10));
  std::mt19937_64 engine(12);
  for (int rep = 0; rep < 100; ++rep) {
    auto d = oracle::random_distribution(engine);
    auto cm = central_moments(d, 6);
    for (int k = 2; k <= 6; ++k) {
      CHECK(cm[k] == doctest::Approx(oracle::central_moment(d, k)).epsilon(1e-10));
    }
  }
}

TEST_CASE("fano factor known values") {
  CHECK(fano(CountDistribution::poisson(4.2, 1e-15)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fano(CountDistribution::delta(5)) == doctest::Approx(0.0));
  const double mu = 1.3;
  CHECK(fano(oracle::thermal_pmf(mu, 300)) == doctest::Approx(1.0 + mu).epsilon(1e-8));
  CHECK_THROWS_AS(fano(CountDistribution::delta(0)), UndefinedValueError);
}

TEST_CASE("eq-4 style identity: raw-moment excess equals Stirling-weighted intensity excess") {
  std::mt19937_64 engine(2024);
  for (int rep = 0; rep < 1000; ++rep) {
    auto d = oracle::random_distribution(engine);
    auto m = compute_moments(d, 6);
    auto ref = poisson_reference(m.mean, 6);
    for (int k = 2; k <= 6; ++k) {
      double rhs = 0.0;
      for (int l = 1; l <= k; ++l) {
        rhs += stirling2(k, l) * (m.intensity[l] - std::pow(m.mean, l));
      }
      const double lhs = m.raw[k] - ref.raw[k];
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  }
}

TEST_CASE("s-ordered moments: s = 1 returns the factorial moments") {
  auto d = oracle::thermal_pmf(0.9, 200);
  auto w = factorial_moments(d, 5);
  auto s1 = s_ordered_moments(d, 1.0, 5);
  for (int k = 1; k <= 5; ++k) CHECK(s1.moments[k] == doctest::Approx(w[k]).epsilon(1e-12));
}

TEST_CASE("s-ordered mean is additive: coherent <W>=1 at s=0 gives 1.5") {
  auto d = CountDistribution::poisson(1.0, 1e-15);
  auto s0 = s_ordered_moments(d, 0.0, 2);
  CHECK(s0.moments[1] == doctest::Approx(1.5).epsilon(1e-10));
  auto s0i = s_ordered_moments(d, 0.0, 2, NoiseCoupling::independent);
  CHECK(s0i.moments[1] == doctest::Approx(1.5).epsilon(1e-10));
}

TEST_CASE("same-mode transform equals the Laguerre closed form term by term") {
  std::mt19937_64 engine(5150);
  std::uniform_real_distribution<double> mus(0.05, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    auto d = oracle::random_distribution(engine);
    auto w = factorial_moments(d, 8);
    const double mu = mus(engine);
    auto direct = s_ordered_from_factorial(w, mu, NoiseCoupling::same_mode);
    auto laguerre = s_ordered_laguerre(w, mu);
    for (int k = 1; k <= 8; ++k) {
      CHECK(direct[k] == doctest::Approx(laguerre[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("same-mode moments match Rician moments for a coherent field") {
  // |sqrt(I) + G|^2 with E|G|^2 = mu: E[W] = I + mu, E[W^2] = I^2 + 4 mu I + 2 mu^2.
  auto d = CountDistribution::poisson(2.0, 1e-15);
  const double mu = 0.35;
  auto w = s_ordered_from_factorial(factorial_moments(d, 2), mu, NoiseCoupling::same_mode);
  CHECK(w[1] == doctest::Approx(2.0 + mu).epsilon(1e-10));
  CHECK(w[2] == doctest::Approx(4.0 + 4.0 * mu * 2.0 + 2.0 * mu * mu).epsilon(1e-10));
}

TEST_CASE("independent-noise transform is the factorial-moment convolution") {
  // One-photon field: <W^2>_mu = 2 mu + 2 mu^2 and <W>_mu = 1 + mu, equal at mu = 1.
  auto d = CountDistribution::delta(1);
  auto w = factorial_moments(d, 2);
  for (double mu : {0.25, 0.5, 1.0}) {
    auto s = s_ordered_from_factorial(w, mu, NoiseCoupling::independent);
    CHECK(s[1] == doctest::Approx(1.0 + mu).epsilon(1e-12));
    CHECK(s[2] == doctest::Approx(2.0 * mu + 2.0 * mu * mu).epsilon(1e-12));
  }
  auto at_one = s_ordered_from_factorial(w, 1.0, NoiseCoupling::independent);
  CHECK(at_one[2] == doctest::Approx(at_one[1] * at_one[1]).epsilon(1e-12));
  // Cross-check against an explicit pmf convolution with a thermal field.
  const double mu = 0.6;
  auto convolved = convolve(d, oracle::thermal_pmf(mu, 400));
  auto direct = factorial_moments(convolved, 4);
  auto algebra = s_ordered_from_factorial(factorial_moments(d, 4), mu, NoiseCoupling::independent);
  for (int k = 1; k <= 4; ++k) CHECK(direct[k] == doctest::Approx(algebra[k]).epsilon(1e-7));
}

TEST_CASE("s-ordered moments are continuous and nondecreasing in added noise") {
  auto d = oracle::thermal_pmf(0.6, 200);
  auto w = factorial_moments(d, 5);
  for (auto coupling : {NoiseCoupling::same_mode, NoiseCoupling::independent}) {
    double prev[6] = {0, 0, 0, 0, 0, 0};
    bool first = true;
    for (double mu = 0.0; mu <= 1.0001; mu += 0.02) {
      auto s = s_ordered_from_factorial(w, mu, coupling);
      if (!first) {
        for (int k = 1; k <= 5; ++k) CHECK(s[k] >= prev[k] - 1e-12);
      }
      for (int k = 1; k <= 5; ++k) prev[k] = s[k];
      first = false;
    }
  }
}

TEST_CASE("s outside [-1, 1] is rejected") {
  auto d = CountDistribution::poisson(1.0, 1e-12);
  CHECK_THROWS_AS(s_ordered_moments(d, 1.5, 3), ParameterDomainError);
  CHECK_THROWS_AS(s_ordered_moments(d, -1.5, 3), ParameterDomainError);
}

TEST_CASE("mandel transform: point mass gives Poisson elements") {
  // Narrow spike at W = lambda on a fine grid.
  const double lambda = 2.3;
  const int pts = 40001;
  std::vector<double> grid(pts), density(pts, 0.0);
  const double lo = lambda - 0.02, hi = lambda + 0.02;
  for (int i = 0; i < pts; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (pts - 1);
  for (int i = 0; i < pts; ++i) {
    const double x = grid[static_cast<std::size_t>(i)] - lambda;
    density[static_cast<std::size_t>(i)] = std::exp(-x * x / (2e-6)) / std::sqrt(2e-6 * M_PI);
  }
  auto poisson = CountDistribution::poisson(lambda, 1e-14);
  for (int k = 0; k <= 8; ++k) {
    CHECK(mandel_transform(grid, density, k) == doctest::Approx(poisson[k]).epsilon(1e-3));
  }
}

TEST_CASE("mandel transform: exponential intensity gives the thermal law") {
  const double mu = 0.9;
  const int pts = 20000;
  std::vector<double> grid(pts), density(pts);
  for (int i = 0; i < pts; ++i) {
    grid[static_cast<std::size_t>(i)] = 40.0 * i / (pts - 1);
    density[static_cast<std::size_t>(i)] = std::exp(-grid[static_cast<std::size_t>(i)] / mu) / mu;
  }
  for (int k = 0; k <= 6; ++k) {
    const double expected = std::pow(mu, k) / std::pow(1.0 + mu, k + 1);
    CHECK(mandel_transform(grid, density, k) == doctest::Approx(expected).epsilon(1e-5));
  }
}

TEST_CASE("mandel transform: gamma intensity reproduces mandel_rice_pmf") {
  const double M = 3.0, B = 0.7;
  const int pts = 30000;
  std::vector<double> grid(pts);
  for (int i = 0; i < pts; ++i) grid[static_cast<std::size_t>(i)] = 60.0 * i / (pts - 1);
  auto density = oracle::gamma_density(M, B, grid);
  auto mr = mandel_rice_pmf(M, B, 20);
  for (int k = 0; k <= 10; ++k) {
    CHECK(mandel_transform(grid, density, k) == doctest::Approx(mr[k]).epsilon(1e-5));
  }
}

TEST_CASE("mandel transform then factorial moments recovers grid intensity moments") {
  const double M = 2.0, B = 1.1;
  const int pts = 40000;
  std::vector<double> grid(pts);
  for (int i = 0; i < pts; ++i) grid[static_cast<std::size_t>(i)] = 120.0 * i / (pts - 1);
  auto density = oracle::gamma_density(M, B, grid);
  std::vector<double> elements;
  for (int k = 0; k <= 80; ++k) elements.push_back(mandel_transform(grid, density, k));
  CountDistribution photon{std::move(elements)};
  auto w = factorial_moments(photon, 3);
  for (int k = 1; k <= 3; ++k) {
    std::vector<double> wk(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) wk[i] = std::pow(grid[i], k) * density[i];
    const double direct = oracle::trapezoid(grid, wk);
    CHECK(w[k] == doctest::Approx(direct).epsilon(1e-6));
  }
}

TEST_CASE("mandel transform rejects negative densities") {
  std::vector<double> grid{0.0, 1.0, 2.0};
  std::vector<double> density{0.1, -0.2, 0.1};
  CHECK_THROWS_AS(mandel_transform(grid, density, 1), ParameterDomainError);
}

TEST_SUITE_END();
