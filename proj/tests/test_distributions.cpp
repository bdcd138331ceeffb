#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracle.hpp"
#include "pdduq/distributions.hpp"
#include "pdduq/special.hpp"

using namespace pdduq;

namespace {

double integrate_over(const Marginal& m, const std::function<double(double)>& g) {
  auto [lo, hi] = m.support();
  auto f = [&](double x) { return m.in_support(x) ? g(x) * m.pdf(x) : 0.0; };
  if (m.kind() == MarginalKind::Gaussian) {
    // split at the mean so the integrand is centered for the oracle
    double mu = m.params()[0], s = m.params()[1];
    auto h = [&](double t) { return f(mu + s * t) * s; };
    return oracle::integrate(h, -INFINITY, INFINITY);
  }
  if (m.kind() == MarginalKind::Lognormal) {
    double mt = m.log_mu(), st = m.log_sigma();
    auto h = [&](double t) {
      double x = std::exp(mt + st * t);
      return f(x) * x * st;
    };
    return oracle::integrate(h, -INFINITY, INFINITY);
  }
  if (std::isinf(hi)) {
    double sc = m.mean();
    auto h = [&](double t) { return f(sc * t) * sc; };
    return oracle::integrate(h, 0.0, INFINITY);
  }
  return oracle::integrate(f, lo, hi);
}

std::vector<Marginal> random_marginals(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Marginal> out;
  for (int rep = 0; rep < 5; ++rep) {
    out.push_back(Marginal::gaussian(-5 + 10 * u(rng), 0.1 + 3 * u(rng)));
    out.push_back(Marginal::exponential(0.2 + 3 * u(rng)));
    double mu = 1 + 100 * u(rng);
    out.push_back(Marginal::lognormal(mu, mu * (0.05 + 0.6 * u(rng))));
    out.push_back(Marginal::truncated_gaussian(-1 + 2 * u(rng), 0.2 + u(rng), 0.5 + 2 * u(rng)));
    out.push_back(Marginal::weibull(0.5 + 2 * u(rng), 0.5 + 3 * u(rng)));
    double a = -3 + 2 * u(rng);
    out.push_back(Marginal::uniform(a, a + 0.5 + 3 * u(rng)));
  }
  return out;
}

}  // namespace

TEST_CASE("pdf point values") {
  CHECK(Marginal::gaussian(0, 1).pdf(0.0) == doctest::Approx(0.3989422804).epsilon(1e-10));
  CHECK(Marginal::exponential(1).pdf(-1.0) == 0.0);
  CHECK(Marginal::uniform(-1, 1).pdf(0.5) == doctest::Approx(0.5));
}

TEST_CASE("invalid parameters are rejected at construction") {
  CHECK_THROWS_AS(Marginal::gaussian(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(Marginal::exponential(-1), std::invalid_argument);
  CHECK_THROWS_AS(Marginal::lognormal(-1, 1), std::invalid_argument);
  CHECK_THROWS_AS(Marginal::weibull(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(Marginal::uniform(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(Marginal::truncated_gaussian(0, 1, 0), std::invalid_argument);
}

TEST_CASE("pdf normalizes and moments match for random parameters") {
  std::mt19937_64 rng(7);
  for (const auto& m : random_marginals(rng)) {
    CAPTURE(m.describe());
    CHECK(std::abs(integrate_over(m, [](double) { return 1.0; }) - 1.0) < 1e-8);
    for (int r = 1; r <= 4; ++r) {
      double q = integrate_over(m, [r](double x) { return std::pow(x, r); });
      CHECK(m.raw_moment(r) == doctest::Approx(q).epsilon(1e-8));
    }
    double var = m.raw_moment(2) - m.raw_moment(1) * m.raw_moment(1);
    CHECK(m.mean() == doctest::Approx(m.raw_moment(1)).epsilon(1e-10));
    CHECK(m.stdev() == doctest::Approx(std::sqrt(var)).epsilon(1e-7));
  }
}

TEST_CASE("raw moment examples") {
  CHECK(Marginal::gaussian(0, 1).raw_moment(4) == doctest::Approx(3.0));
  CHECK(Marginal::exponential(2).raw_moment(1) == doctest::Approx(0.5));
  CHECK(Marginal::weibull(1, 0.5).raw_moment(0) == 1.0);
  CHECK_THROWS(Marginal::gaussian(0, 1).raw_moment(-1));
}

TEST_CASE("lognormal tilde parameters") {
  auto m = Marginal::lognormal(120.0, 84.0);
  double s2 = std::log(1.0 + (84.0 * 84.0) / (120.0 * 120.0));
  CHECK(m.log_sigma() * m.log_sigma() == doctest::Approx(s2).epsilon(1e-14));
  CHECK(m.log_mu() == doctest::Approx(std::log(120.0) - s2 / 2).epsilon(1e-14));
  double mean = std::exp(m.log_mu() + 0.5 * s2);
  double var = (std::exp(s2) - 1.0) * std::exp(2 * m.log_mu() + s2);
  CHECK(std::abs(mean / 120.0 - 1.0) < 1e-10);
  CHECK(std::abs(var / (84.0 * 84.0) - 1.0) < 1e-10);
}

TEST_CASE("quantile inverts cdf") {
  std::mt19937_64 rng(11);
  for (const auto& m : random_marginals(rng))
    for (double u : {1e-9, 0.001, 0.2, 0.5, 0.77, 0.999, 1 - 1e-9}) {
      CAPTURE(m.describe());
      CAPTURE(u);
      CHECK(m.cdf(m.quantile(u)) == doctest::Approx(u).epsilon(1e-9));
    }
  for (double p : {1e-300, 1e-20, 1e-5, 0.3, 0.5, 0.9, 1 - 1e-12})
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-13));
}

TEST_CASE("sampling examples") {
  auto tg = Marginal::truncated_gaussian(0, 0.2, 2);
  auto ex = Marginal::exponential(1);
  auto un = Marginal::uniform(-1, 1);
  double se = 0, su = 0;
  const int L = 1000000;
  for (int l = 0; l < L; ++l) {
    SampleStream s(42, l);
    double x = tg.sample(s);
    REQUIRE(x >= -2.0);
    REQUIRE(x <= 2.0);
    se += ex.sample(s);
    su += un.sample(s);
  }
  CHECK(se / L >= 0.99);
  CHECK(se / L <= 1.01);
  CHECK(std::abs(su / L) <= 0.01);
  // deterministic per (seed, index)
  SampleStream a(5, 17), b(5, 17);
  CHECK(a.uniform() == b.uniform());
}

TEST_CASE("score examples") {
  CHECK(Marginal::gaussian(0, 1).log_density_derivative(ParameterRole::Mean, 2.0) == 2.0);
  CHECK(Marginal::exponential(1).log_density_derivative(ParameterRole::Rate, 1.0) == 0.0);
  CHECK(Marginal::weibull(1, 0.5).log_density_derivative(ParameterRole::Scale, 1.0) == 0.0);
  CHECK_THROWS_AS(Marginal::exponential(1).log_density_derivative(ParameterRole::Rate, -1.0),
                  std::domain_error);
  CHECK_THROWS_AS(Marginal::exponential(1).log_density_derivative(ParameterRole::Mean, 1.0),
                  std::invalid_argument);
}

TEST_CASE("score has zero mean and matches finite differences for fixed-support kinds") {
  std::mt19937_64 rng(3);
  for (const auto& m : random_marginals(rng)) {
    if (m.kind() == MarginalKind::Uniform || m.kind() == MarginalKind::TruncatedGaussian) continue;
    for (auto role : {ParameterRole::Mean, ParameterRole::Stdev, ParameterRole::Rate,
                      ParameterRole::Scale, ParameterRole::Shape}) {
      if (!m.has_role(role)) continue;
      CAPTURE(m.describe());
      CAPTURE(to_string(role));
      double e = integrate_over(m, [&](double x) { return m.log_density_derivative(role, x); });
      CHECK(std::abs(e) < 1e-8);
      double d = m.parameter(role);
      double h = 1e-6 * std::abs(d);
      auto up = m.with_parameter(role, d + h), dn = m.with_parameter(role, d - h);
      for (double u : {0.05, 0.3, 0.5, 0.8, 0.97}) {
        double x = m.quantile(u);
        double fd = (up.log_pdf(x) - dn.log_pdf(x)) / (2 * h);
        double an = m.log_density_derivative(role, x);
        CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
      }
    }
  }
}

TEST_CASE("truncated Gaussian score modes") {
  auto m = Marginal::truncated_gaussian(0.0, 1.0, 1.5);
  double x = 0.7;
  double d = 1.5;
  double pre = 1.0 / (normal_cdf(d) - normal_cdf(-d));
  CHECK(m.log_density_derivative(ParameterRole::Mean, x) == doctest::Approx(pre * x));
  ScoreOptions num{TruncatedGaussianScore::Numeric};
  // Mean: normalizer is mean-independent, so the numeric score is (x-mu)/sigma^2.
  CHECK(m.log_density_derivative(ParameterRole::Mean, x, num) == doctest::Approx(x).epsilon(1e-8));
}

TEST_CASE("design bindings") {
  std::vector<Marginal> in(3, Marginal::gaussian(0, 1));
  DesignBinding b{0, "mu", {{0, ParameterRole::Mean}, {1, ParameterRole::Mean}, {2, ParameterRole::Mean}}};
  CHECK_NOTHROW(validate_binding(b, in));
  CHECK(design_value(b, in) == 0.0);
  auto p = perturb_design(b, in, 0.5);
  CHECK(p[2].mean() == 0.5);
  DesignBinding bad{0, "x", {{0, ParameterRole::Rate}}};
  CHECK_THROWS_AS(validate_binding(bad, in), std::invalid_argument);
  DesignBinding dup{0, "x", {{0, ParameterRole::Mean}, {0, ParameterRole::Mean}}};
  CHECK_THROWS_AS(validate_binding(dup, in), std::invalid_argument);
  DesignBinding oob{0, "x", {{5, ParameterRole::Mean}}};
  CHECK_THROWS_AS(validate_binding(oob, in), std::invalid_argument);
}
