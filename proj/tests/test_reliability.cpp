#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "pdduq/models.hpp"
#include "pdduq/reliability.hpp"
#include "pdduq/special.hpp"

using namespace pdduq;

namespace {

PerformanceModel vector_model(int N, int K, std::function<void(std::span<const double>, std::span<double>)> f) {
  return PerformanceModel("test", N, K, std::move(f));
}

PddSurrogate build(const PerformanceModel& y, const std::vector<Marginal>& in, int S, int m, int out = 0) {
  PddOptions o;
  o.S = S;
  o.m = m;
  return compute_coefficients(y, in, o).surrogates.at(out);
}

std::vector<DesignBinding> shared_bindings(int N) {
  DesignBinding mu{0, "mu", {}}, sg{1, "sigma", {}};
  for (int i = 0; i < N; ++i) {
    mu.targets.push_back({i, ParameterRole::Mean});
    sg.targets.push_back({i, ParameterRole::Stdev});
  }
  return {mu, sg};
}

CgfModel cgf(double k1, double k2, double k3, double k4) { return make_cgf({k1, k2, k3, k4}); }

// Raw moments of N(mu, 1) and their mu-derivatives.
void gaussian_moments(double mu, std::vector<double>& m, std::vector<std::vector<double>>& dm) {
  m = {mu, mu * mu + 1, mu * mu * mu + 3 * mu, std::pow(mu, 4) + 6 * mu * mu + 3};
  dm = {{1.0}, {2 * mu}, {3 * mu * mu + 3}, {4 * mu * mu * mu + 12 * mu}};
}

ReliabilityReport example3_spa(int N, double mu, double sigma) {
  std::vector<Marginal> in(N, Marginal::gaussian(mu, sigma));
  PddOptions o;
  o.S = 2;
  o.m = 3;
  auto s = compute_coefficients(gauss_sum_model(N), in, o).surrogates.at(0);
  MomentOptions mo;
  mo.Q = 4;
  return spa_reliability(s, shared_bindings(N), mo);
}

}  // namespace

TEST_CASE("cumulants from moments") {
  auto k = cumulants_from_moments({0, 1, 0, 3});
  CHECK(k[0] == 0.0);
  CHECK(k[1] == 1.0);
  CHECK(k[2] == 0.0);
  CHECK(k[3] == 0.0);
  k = cumulants_from_moments({1, 2, 6, 24});
  CHECK(k[0] == doctest::Approx(1));
  CHECK(k[1] == doctest::Approx(1));
  CHECK(k[2] == doctest::Approx(2));
  CHECK(k[3] == doctest::Approx(6));
  CHECK_THROWS_WITH(cumulants_from_moments({1, 1}), "degenerate response variance");
  CHECK_THROWS_AS(make_cgf({0, 1, 0, 0, 1}), std::invalid_argument);
}

TEST_CASE("cumulant sensitivities agree with finite differences") {
  // Moments of a skewed family m(d) and their derivatives.
  auto mom = [](double d) {
    return std::vector<double>{d, 2 * d * d + 1, std::pow(d, 3) + 4 * d, 3 * std::pow(d, 4) + d * d + 5};
  };
  const double d = 0.7, h = 1e-6;
  auto m = mom(d);
  std::vector<std::vector<double>> dm(4, std::vector<double>(1));
  auto mp = mom(d + h), mn = mom(d - h);
  for (int r = 0; r < 4; ++r) dm[r][0] = (mp[r] - mn[r]) / (2 * h);
  auto k = cumulants_from_moments(m);
  auto dk = cumulant_sensitivities(m, k, dm);
  auto kp = cumulants_from_moments(mp), kn = cumulants_from_moments(mn);
  for (int r = 0; r < 4; ++r) CHECK(dk[r][0] == doctest::Approx((kp[r] - kn[r]) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("saddlepoint bracket examples") {
  auto b = saddlepoint_bracket(cgf(0, 1, 1, 0.4));
  CHECK(b.case_id == 1);
  CHECK(b.t_l == doctest::Approx((-1 + std::sqrt(0.2)) / 0.4).epsilon(1e-14));
  CHECK(b.t_l == doctest::Approx(-1.3820).epsilon(1e-4));
  CHECK(std::isinf(b.t_u));
  b = saddlepoint_bracket(cgf(0, 1, 0, 0));
  CHECK(b.case_id == 6);
  CHECK(std::isinf(b.t_l));
  CHECK(std::isinf(b.t_u));
  b = saddlepoint_bracket(cgf(0, 1, -2, 0));
  CHECK(b.case_id == 7);
  CHECK(b.t_u == 0.5);
  b = saddlepoint_bracket(cgf(0, 2, 2, 1));
  CHECK(b.case_id == 3);
  REQUIRE(b.excluded_point.has_value());
  CHECK(cgf(0, 2, 2, 1).K2(*b.excluded_point) == doctest::Approx(0.0));
}

TEST_CASE("bracket soundness over all eight cases") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.1, 3.0);
  std::vector<int> hits(9, 0);
  for (int trial = 0; trial < 400; ++trial) {
    const int want = 1 + trial % 8;
    double k2 = U(rng);
    const double a = U(rng);
    double k3 = 0, k4 = 0;
    switch (want) {
      case 1: k3 = a; k4 = 0.4 * k3 * k3 / (2 * k2); break;
      case 2: k3 = -a; k4 = 0.4 * k3 * k3 / (2 * k2); break;
      case 3: k2 = 2; k3 = 2 * (trial % 2 ? 1 : -1); k4 = 1; break;
      case 4: k3 = a * (trial % 2 ? 1 : -1); k4 = 2 * k3 * k3 / (2 * k2); break;
      case 5: k3 = a; break;
      case 6: break;
      case 7: k3 = -a; break;
      case 8: k3 = a * (trial % 2 ? 1 : -1); k4 = -U(rng); break;
    }
    const CgfModel c = cgf(U(rng) - 1.5, k2, k3, k4);
    const auto b = saddlepoint_bracket(c);
    REQUIRE(b.case_id == want);
    ++hits[b.case_id];
    CHECK(b.t_l < 0.0);
    CHECK(b.t_u > 0.0);
    const double lo = std::isfinite(b.t_l) ? b.t_l : -50.0, hi = std::isfinite(b.t_u) ? b.t_u : 50.0;
    std::uniform_real_distribution<double> T(lo, hi);
    for (int i = 0; i < 1000; ++i) {
      const double t = T(rng);
      if (t == lo || (b.excluded_point && t == *b.excluded_point)) continue;
      REQUIRE(c.K2(t) > 0.0);
    }
  }
  for (int cs = 1; cs <= 8; ++cs) CHECK(hits[cs] == 50);
}

TEST_CASE("saddlepoint solve examples and infeasibility") {
  CHECK(solve_saddlepoint(cgf(0, 1, 0, 0), saddlepoint_bracket(cgf(0, 1, 0, 0)), 1.0) == doctest::Approx(1.0));
  CHECK(solve_saddlepoint(cgf(0, 1, 0, 0), saddlepoint_bracket(cgf(0, 1, 0, 0)), 0.0) == 0.0);
  const auto c = cgf(1, 1, 2, 6);
  const double xi = c.K1(0.1);
  const double t = solve_saddlepoint(c, saddlepoint_bracket(c), xi);
  CHECK(t == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::abs(c.K1(t) - xi) <= 1e-12 * (1 + std::abs(xi)));
  // Case 7: K' attains at most K'(0.5).
  const auto c7 = cgf(0, 1, -2, 0);
  const double top = c7.K1(0.5);
  try {
    solve_saddlepoint(c7, saddlepoint_bracket(c7), top + 1.0);
    FAIL("expected infeasible");
  } catch (const SaddlepointInfeasible& e) {
    CHECK(std::isinf(e.attainable_lo));
    CHECK(e.attainable_hi == doctest::Approx(top));
    CHECK(std::string(e.what()).find("saddlepoint infeasible") != std::string::npos);
  }
  CHECK_THROWS_AS(solve_saddlepoint(c7, saddlepoint_bracket(c7), top), SaddlepointInfeasible);
  // Residual tolerance across random skewed cumulants.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int i = 0; i < 200; ++i) {
    const auto cc = cgf(5 * U(rng), 0.1 + std::abs(U(rng)) * 10, U(rng), 0.5 + U(rng));
    const auto b = saddlepoint_bracket(cc);
    const double x = cc.K1(std::clamp(2 * U(rng), b.t_l * 0.99, b.t_u * 0.99));
    const double ts = solve_saddlepoint(cc, b, x);
    CHECK(std::abs(cc.K1(ts) - x) <= 1e-12 * (1 + std::abs(x)));
  }
}

TEST_CASE("SPA examples") {
  const auto g = cgf(0, 1, 0, 0);
  CHECK(spa_cdf(g, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(spa_evaluate(g, 0.0).limit_branch);
  CHECK(spa_cdf(g, -3.0) == doctest::Approx(1.349898e-3).epsilon(1e-6));
  CHECK(spa_pdf(g, 0.0) == doctest::Approx(0.3989423).epsilon(1e-7));
  CHECK(spa_failure_probability(cgf(3, 1, 0, 0)) == doctest::Approx(normal_cdf(-3.0)).epsilon(1e-12));
  CHECK(spa_failure_probability(g) == doctest::Approx(0.5));
  // Exponential(1): F(mean) = 1 - 1/e; the limiting expansion gives 0.633.
  const auto e = cgf(1, 1, 2, 6);
  const auto p = spa_evaluate(e, 1.0);
  CHECK(p.limit_branch);
  CHECK(p.cdf == doctest::Approx(0.5 + 2.0 / (6.0 * std::sqrt(2 * M_PI))).epsilon(1e-12));
  CHECK(std::abs(p.cdf - (1 - std::exp(-1.0))) < 2e-3);
}

TEST_CASE("SPA is exact for Gaussian cumulants") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> K1(-5, 5), K2(0.1, 10), Z(-8, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const double k1 = K1(rng), k2 = K2(rng);
    const auto c = cgf(k1, k2, 0, 0);
    int tested = 0;
    while (tested < 100) {
      const double xi = k1 + Z(rng) * std::sqrt(k2);
      const auto p = spa_evaluate(c, xi);
      if (p.limit_branch) continue;
      ++tested;
      CHECK(std::abs(p.cdf - normal_cdf((xi - k1) / std::sqrt(k2))) <= 1e-12);
    }
    // Points just outside the limit window.
    for (double s : {-1.0, 1.0}) {
      const double xi = k1 + s * 1.01 * spa_limit_threshold(c) * k2;
      CHECK(std::abs(spa_cdf(c, xi) - normal_cdf((xi - k1) / std::sqrt(k2))) <= 1e-12);
    }
  }
}

namespace {

// Cumulants of a + b X.
CgfModel affine_cgf(const Marginal& X, double a, double b) {
  std::vector<double> m(4);
  for (int r = 1; r <= 4; ++r) {
    double v = 0.0;
    for (int j = 0; j <= r; ++j)
      v += binomial(r, j) * std::pow(a, r - j) * std::pow(b, j) * (j == 0 ? 1.0 : X.raw_moment(j));
    m[r - 1] = v;
  }
  return make_cgf(cumulants_from_moments(m));
}

}  // namespace

TEST_CASE("SPA CDF is monotone for leptokurtic cumulants") {
  std::vector<Marginal> fam{Marginal::exponential(1.0), Marginal::weibull(1.0, 1.5), Marginal::lognormal(1.0, 0.3),
                            Marginal::lognormal(1.0, 0.6), Marginal::gaussian(1.0, 2.0)};
  for (const auto& X : fam) {
    for (double bsc : {1.0, -0.5, 3.0}) {
      const auto c = affine_cgf(X, 0.3, bsc);
      REQUIRE(c.kappa[3] >= -1e-12);
      const double mu = c.kappa[0], sd = std::sqrt(c.kappa[1]);
      double prev = -1.0;
      for (int i = 0; i <= 400; ++i) {
        const double xi = mu - 4.0 * sd + 8.0 * sd * i / 400.0;
        double F;
        try {
          F = spa_cdf(c, xi);
        } catch (const SaddlepointInfeasible&) {
          continue;
        }
        INFO(X.describe(), " b=", bsc, " xi=", xi);
        CHECK(F >= prev - 1e-12);
        prev = F;
      }
    }
  }
}

TEST_CASE("Lugannani-Rice is not monotone when K'' nearly vanishes") {
  // Documented limitation. Here K'' dips to 0.024 near t = 4.4.
  const auto c = cgf(0.351864, 1.04942, -0.461505, 0.103839);
  CHECK(spa_cdf(c, 1.97186) < spa_cdf(c, 1.94186));
  // Negative fourth cumulant: K'' vanishes at both finite bracket ends.
  const auto u = affine_cgf(Marginal::uniform(-1.0, 2.0), 0.3, 1.0);
  CHECK(saddlepoint_bracket(u).case_id == 8);
  CHECK(spa_cdf(u, 0.2) < spa_cdf(u, 0.10718));
}

TEST_CASE("SPA sensitivity examples") {
  for (double mu : {0.0, 3.0}) {
    std::vector<double> m;
    std::vector<std::vector<double>> dm;
    gaussian_moments(mu, m, dm);
    const auto k = cumulants_from_moments(m);
    const auto c = make_cgf(k);
    const auto s = spa_cdf_sensitivity(c, cumulant_sensitivities(m, k, dm), 0.0);
    CHECK(s[0] == doctest::Approx(-normal_pdf(mu)).epsilon(1e-6));
  }
}

TEST_CASE("SPA cumulant partials agree with finite differences") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1, 1);
  const std::vector<std::vector<double>> eye{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  int checked = 0;
  while (checked < 40) {
    std::array<double, 4> k{U(rng), 1 + 0.5 * U(rng), 0.4 * U(rng), 0.2 * U(rng)};
    const double xi = 2.5 * U(rng);
    const auto c = make_cgf({k[0], k[1], k[2], k[3]});
    SpaPoint p;
    try {
      p = spa_evaluate(c, xi);
    } catch (const SaddlepointInfeasible&) {
      continue;
    }
    if (std::abs(p.t_s) < 0.05) continue;
    const auto s = spa_cdf_sensitivity(c, eye, xi);
    const double h = 1e-6;
    bool ok = true;
    std::vector<double> fd(4);
    for (int r = 0; r < 4 && ok; ++r) {
      auto kp = k, kn = k;
      kp[r] += h;
      kn[r] -= h;
      try {
        fd[r] = (spa_cdf(make_cgf({kp[0], kp[1], kp[2], kp[3]}), xi) -
                 spa_cdf(make_cgf({kn[0], kn[1], kn[2], kn[3]}), xi)) /
                (2 * h);
      } catch (const SaddlepointInfeasible&) {
        ok = false;
      }
    }
    if (!ok) continue;
    ++checked;
    for (int r = 0; r < 4; ++r) CHECK(s[r] == doctest::Approx(fd[r]).epsilon(1e-6).scale(1e-3));
  }
}

TEST_CASE("SPA pipeline on an exact Gaussian surrogate") {
  auto y = vector_model(1, 1, [](std::span<const double> x, std::span<double> o) { o[0] = x[0]; });
  for (double mu : {0.0, 3.0}) {
    std::vector<Marginal> in{Marginal::gaussian(mu, 1.0)};
    const auto s = build(y, in, 1, 1);
    MomentOptions mo;
    DesignBinding b{0, "mu", {{0, ParameterRole::Mean}}};
    const auto r = spa_reliability(s, {b}, mo);
    CHECK(r.method == "PDD-SPA");
    CHECK(r.p_f == doctest::Approx(normal_cdf(-mu)).epsilon(1e-9));
    CHECK(r.sensitivities[0] == doctest::Approx(-normal_pdf(mu)).epsilon(1e-6));
    CHECK(r.diagnostics.contains("saddlepoint"));
  }
  std::vector<Marginal> in{Marginal::gaussian(0, 1)};
  const auto s = build(y, in, 1, 1);
  EventSpec series{EventKind::Series, {0}};
  CHECK_THROWS_WITH_AS(spa_reliability(series, {s}, {}, MomentOptions{}),
                       doctest::Contains("PDD-MCS"), std::invalid_argument);
  MomentOptions q5;
  q5.Q = 5;
  CHECK_THROWS_AS(spa_reliability(s, {}, q5), std::invalid_argument);
}

TEST_CASE("PDD-MCS examples") {
  std::vector<Marginal> in{Marginal::gaussian(0, 1)};
  auto y = vector_model(1, 2, [](std::span<const double> x, std::span<double> o) {
    o[0] = x[0];
    o[1] = -x[0];
  });
  PddOptions po;
  po.S = 1;
  po.m = 1;
  const auto build_all = compute_coefficients(y, in, po);
  const auto& s = build_all.surrogates;
  McsOptions mo;
  mo.samples = 1'000'000;
  mo.seed = 2024;
  DesignBinding b{0, "mu", {{0, ParameterRole::Mean}}};
  const auto r = mcs_failure_probability({EventKind::Component, {0}}, s, {b}, mo);
  CHECK(std::abs(r.p_f - 0.5) <= 3 * 0.0005);
  CHECK(r.p_f_se == doctest::Approx(std::sqrt(r.p_f * (1 - r.p_f) / 1e6)));
  CHECK(std::abs(r.sensitivities[0] + normal_pdf(0)) <= 4 * r.sensitivity_se[0]);
  mo.samples = 100'000;
  CHECK(mcs_failure_probability({EventKind::Series, {0, 1}}, s, {}, mo).p_f == 1.0);
  CHECK(mcs_failure_probability({EventKind::Parallel, {0, 1}}, s, {}, mo).p_f == 0.0);
  // A surrogate that never fails.
  auto safe = vector_model(1, 1, [](std::span<const double>, std::span<double> o) { o[0] = 1.0; });
  const auto sc = build(safe, in, 1, 1);
  const auto rs = mcs_failure_probability({}, {sc}, {b}, mo);
  CHECK(rs.p_f == 0.0);
  CHECK(rs.sensitivities[0] == 0.0);
}

TEST_CASE("PDD-MCS score estimator is unbiased across seeds") {
  auto y = vector_model(1, 1, [](std::span<const double> x, std::span<double> o) { o[0] = x[0]; });
  const double mu = 0.5;
  std::vector<Marginal> in{Marginal::gaussian(mu, 1.0)};
  const auto s = build(y, in, 1, 1);
  DesignBinding b{0, "mu", {{0, ParameterRole::Mean}}};
  McsOptions mo;
  mo.samples = 20'000;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    mo.seed = seed;
    const auto r = mcs_failure_probability({}, {s}, {b}, mo);
    CHECK(std::abs(r.sensitivities[0] + normal_pdf(mu)) <= 4 * r.sensitivity_se[0]);
  }
}

TEST_CASE("MCS CDF examples") {
  auto y = vector_model(1, 1, [](std::span<const double> x, std::span<double> o) { o[0] = x[0]; });
  std::vector<Marginal> in{Marginal::gaussian(0, 1)};
  const auto s = build(y, in, 1, 1);
  DesignBinding b{0, "mu", {{0, ParameterRole::Mean}}};
  McsOptions mo;
  mo.samples = 50'000;
  const auto r = mcs_cdf(s, {0.0, 1e6}, {b}, mo);
  CHECK(std::abs(r.cdf[0] - 0.5) <= 4 * r.se[0]);
  CHECK(r.cdf[1] == 1.0);
  CHECK(std::abs(r.sensitivities[1][0]) < 4.0 / std::sqrt(5e4));
  const auto csv = r.to_csv();
  CHECK(csv.rfind("xi,cdf,se,mu\r\n", 0) == 0);
}

TEST_CASE("PDD-MCS matches crude MCS on an exactly reproduced cubic") {
  std::vector<Marginal> in(4, Marginal::exponential(1.0));
  PddOptions o;
  o.S = 3;
  o.m = 3;
  o.n = 4;
  const auto model = cubic4_model();
  const auto s = compute_coefficients(model, in, o).surrogates.at(0);
  DesignBinding b{0, "lambda", {}};
  for (int i = 0; i < 4; ++i) b.targets.push_back({i, ParameterRole::Rate});
  std::vector<double> xi;
  for (int g = 0; g <= 20; ++g) xi.push_back(-400.0 + 45.0 * g);
  McsOptions mo;
  mo.samples = 100'000;
  mo.seed = 77;
  const auto a = mcs_cdf(s, xi, {b}, mo);
  const auto c = crude_mcs_cdf(model, 0, in, xi, {b}, mo);
  for (std::size_t g = 0; g < xi.size(); ++g) {
    CHECK(std::abs(a.cdf[g] - c.cdf[g]) <= 1e-12);
    CHECK(std::abs(a.sensitivities[g][0] - c.sensitivities[g][0]) <= 1e-12);
  }
}

TEST_CASE("crude MCS baselines") {
  auto y = vector_model(1, 1, [](std::span<const double> x, std::span<double> o) { o[0] = x[0]; });
  std::vector<Marginal> in{Marginal::gaussian(0.5, 1.0)};
  DesignBinding b{0, "mu", {{0, ParameterRole::Mean}}};
  McsOptions mo;
  mo.samples = 200'000;
  const auto sf = crude_mcs_sf({}, y, in, {b}, mo);
  CHECK(sf.model_evaluations == 200'000);
  CHECK(std::abs(sf.p_f - normal_cdf(-0.5)) <= 4 * sf.p_f_se);
  CHECK(std::abs(sf.sensitivities[0] + normal_pdf(0.5)) <= 4 * sf.sensitivity_se[0]);
  const auto fd = crude_mcs_fd({}, y, in, {b}, mo, 1e-2);
  CHECK(fd.model_evaluations == 400'000);
  CHECK(fd.p_f == sf.p_f);
  CHECK(std::abs(fd.sensitivities[0] + normal_pdf(0.5)) <= 4 * fd.sensitivity_se[0] + 1e-3);
}

TEST_CASE("MCS results do not depend on the worker count") {
  std::vector<Marginal> in(3, Marginal::exponential(1.0));
  auto y = vector_model(3, 2, [](std::span<const double> x, std::span<double> o) {
    o[0] = 2.0 - x[0] - x[1] * x[2];
    o[1] = 3.0 - x[0] * x[1] - x[2];
  });
  PddOptions po;
  po.S = 2;
  po.m = 2;
  const auto s = compute_coefficients(y, in, po).surrogates;
  DesignBinding b{0, "lambda", {{0, ParameterRole::Rate}, {1, ParameterRole::Rate}, {2, ParameterRole::Rate}}};
  McsOptions mo;
  mo.samples = 30'001;
  mo.threads = 1;
  const auto a = mcs_failure_probability({EventKind::Series, {}}, s, {b}, mo).to_csv();
  const auto ca = mcs_cdf(s[0], {0.0, 1.0}, {b}, mo).to_csv();
  mo.threads = 4;
  CHECK(mcs_failure_probability({EventKind::Series, {}}, s, {b}, mo).to_csv() == a);
  CHECK(mcs_cdf(s[0], {0.0, 1.0}, {b}, mo).to_csv() == ca);
}

TEST_CASE("end-to-end SPA sensitivity matches pipeline finite differences") {
  const int N = 10;
  const auto base = example3_spa(N, 0.0, 1.0);
  const auto ex = gauss_sum_exact(N, 0.0, 1.0);
  CHECK(base.p_f == doctest::Approx(ex.pf).epsilon(0.02));
  const double h = 1e-4;
  const double fd_mu = (example3_spa(N, h, 1.0).p_f - example3_spa(N, -h, 1.0).p_f) / (2 * h);
  const double fd_sg = (example3_spa(N, 0.0, 1.0 + h).p_f - example3_spa(N, 0.0, 1.0 - h).p_f) / (2 * h);
  CHECK(base.sensitivities[0] == doctest::Approx(fd_mu).epsilon(1e-3));
  CHECK(base.sensitivities[1] == doctest::Approx(fd_sg).epsilon(1e-3));
}
