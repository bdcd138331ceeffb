#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pdduq/models.hpp"
#include "pdduq/pdd.hpp"
#include "pdduq/random.hpp"
#include "pdduq/special.hpp"

using namespace pdduq;

namespace {

PerformanceModel scalar_model(int N, std::function<double(std::span<const double>)> f) {
  return PerformanceModel("test", N, 1, [f](std::span<const double> x, std::span<double> y) { y[0] = f(x); });
}

std::vector<Marginal> std_normals(int N) { return std::vector<Marginal>(N, Marginal::gaussian(0, 1)); }

PddSurrogate build(const PerformanceModel& y, const std::vector<Marginal>& in, int S, int m, int R = 0,
                   int n = 0, unsigned threads = 0) {
  PddOptions o;
  o.S = S;
  o.m = m;
  o.R = R;
  o.n = n;
  o.threads = threads;
  return compute_coefficients(y, in, o).surrogates.at(0);
}

}  // namespace

TEST_CASE("term enumeration") {
  auto t = enumerate_terms(2, 1, 1);
  REQUIRE(t.size() == 2);
  CHECK(t[0] == TermKey{{0}, {1}});
  CHECK(t[1] == TermKey{{1}, {1}});
  CHECK(enumerate_terms(2, 2, 2).size() == 8);
  CHECK(enumerate_terms(15, 2, 3).size() == 990);
  CHECK(term_count(15, 2, 3) == 990);
  for (int N = 1; N <= 6; ++N)
    for (int S = 1; S <= N; ++S)
      for (int m = 1; m <= 4; ++m) {
        auto keys = enumerate_terms(N, S, m);
        CHECK(keys.size() == term_count(N, S, m));
        for (std::size_t i = 1; i < keys.size(); ++i) CHECK(keys[i - 1] != keys[i]);
        for (const auto& k : keys) {
          for (std::size_t p = 1; p < k.vars.size(); ++p) CHECK(k.vars[p - 1] < k.vars[p]);
          for (int j : k.degrees) CHECK((j >= 1 && j <= m));
        }
      }
  CHECK_THROWS(enumerate_terms(2, 3, 1));
  CHECK_THROWS(enumerate_terms(2, 1, 0));
}

TEST_CASE("coefficient examples") {
  auto lin = scalar_model(2, [](auto x) { return x[0] + x[1]; });
  auto s = build(lin, std_normals(2), 1, 1, 1, 2);
  CHECK(s.y_empty() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(s.coefficient({{0}, {1}}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.coefficient({{1}, {1}}) == doctest::Approx(1.0).epsilon(1e-14));
  std::vector<double> x{3, -1};
  CHECK(s.evaluate(x) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(s.variance() == doctest::Approx(2.0).epsilon(1e-13));

  auto prod = scalar_model(2, [](auto x) { return x[0] * x[1]; });
  auto p = build(prod, std_normals(2), 2, 1, 2, 2);
  CHECK(p.coefficient({{0, 1}, {1, 1}}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(p.coefficient({{0}, {1}})) < 1e-14);
  CHECK(std::abs(p.coefficient({{1}, {1}})) < 1e-14);
  std::vector<double> x2{2, 2};
  CHECK(p.evaluate(x2) == doctest::Approx(4.0).epsilon(1e-13));

  auto cst = scalar_model(3, [](auto) { return 5.0; });
  std::vector<Marginal> mixed{Marginal::exponential(2), Marginal::lognormal(1, 0.3), Marginal::uniform(0, 1)};
  auto c = build(cst, mixed, 2, 3);
  CHECK(c.y_empty() == doctest::Approx(5.0).epsilon(1e-14));
  for (const auto& [k, v] : c.terms()) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("evaluation and moment examples") {
  PddSurrogate e(std_normals(2), 1, 1, 1, 2, {});
  e.set_y_empty(2.0);
  std::vector<double> x{0.3, -7};
  CHECK(e.evaluate(x) == 2.0);
  CHECK(e.variance() == 0.0);

  PddSurrogate s(std_normals(2), 1, 1, 1, 2, {});
  s.set_y_empty(1.0);
  s.set_coefficient({{0}, {1}}, 3.0);
  s.set_coefficient({{1}, {1}}, 4.0);
  CHECK(s.second_moment() == 26.0);
  CHECK(s.mean() == 1.0);

  PddSurrogate z(std_normals(1), 1, 1, 1, 2, {});
  z.set_y_empty(7.0);
  CHECK(z.variance() == 0.0);
}

TEST_CASE("polynomial exactness on the exponential cubic") {
  auto y = cubic4_model();
  std::vector<Marginal> in(4, Marginal::exponential(1.0));
  auto s = build(y, in, 3, 3, 3, 4);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    SampleStream st(2024, k);
    std::vector<double> x(4);
    for (int i = 0; i < 4; ++i) x[i] = in[i].sample(st);
    double ref = y(x);
    worst = std::max(worst, std::abs(s.evaluate(x) - ref) / std::max(1.0, std::abs(ref)));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("polynomial exactness across marginal kinds") {
  auto y = scalar_model(3, [](auto x) { return 1 + x[0] * x[0] * x[1] - 2 * x[2] + x[1] * x[2] * x[2] + x[0] * x[0] * x[0]; });
  std::vector<Marginal> in{Marginal::weibull(1.5, 2.0), Marginal::lognormal(2, 0.4),
                           Marginal::truncated_gaussian(1, 0.5, 1.2)};
  auto s = build(y, in, 2, 3);
  for (int k = 0; k < 2000; ++k) {
    SampleStream st(7, k);
    std::vector<double> x(3);
    for (int i = 0; i < 3; ++i) x[i] = in[i].sample(st);
    CHECK(s.evaluate(x) == doctest::Approx(y(x)).epsilon(1e-8));
  }
}

TEST_CASE("mean invariance and variance monotonicity") {
  auto y = scalar_model(3, [](auto x) { return std::exp(0.3 * x[0]) * std::sin(x[1]) + x[2] * x[0] + std::cos(x[2]); });
  std::vector<Marginal> in{Marginal::gaussian(0.2, 0.7), Marginal::uniform(-1, 2), Marginal::gaussian(-0.5, 1)};
  // Fixed integration settings so the coefficients of common terms agree.
  const int R = 2, n = 6;
  double mean0 = build(y, in, 1, 1, R, n).mean();
  double prev_S1 = -1, prev_S2 = -1;
  for (int m = 1; m <= 4; ++m) {
    auto s1 = build(y, in, 1, m, R, n);
    auto s2 = build(y, in, 2, m, R, n);
    CHECK(s1.mean() == doctest::Approx(mean0).epsilon(1e-12));
    CHECK(s2.mean() == doctest::Approx(mean0).epsilon(1e-12));
    CHECK(s2.variance() >= s1.variance());
    CHECK(s1.variance() >= prev_S1);
    CHECK(s2.variance() >= prev_S2);
    prev_S1 = s1.variance();
    prev_S2 = s2.variance();
  }
}

TEST_CASE("Parseval on a dense tensor grid") {
  auto y = scalar_model(3, [](auto x) { return std::exp(0.2 * x[0] + 0.1 * x[1] * x[2]) + x[1] * x[1]; });
  std::vector<Marginal> in{Marginal::gaussian(0, 1), Marginal::exponential(2), Marginal::lognormal(1, 0.3)};
  auto s = build(y, in, 2, 3);
  std::vector<GaussRule> r;
  for (int i = 0; i < 3; ++i) r.push_back(gauss_rule(s.basis(i), 8));
  std::vector<double> terms;
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      for (int c = 0; c < 8; ++c) {
        std::vector<double> x{r[0].nodes[a], r[1].nodes[b], r[2].nodes[c]};
        double v = s.evaluate(x);
        terms.push_back(r[0].weights[a] * r[1].weights[b] * r[2].weights[c] * v * v);
      }
  CHECK(pairwise_sum(terms) == doctest::Approx(s.second_moment()).epsilon(1e-8));
}

TEST_CASE("evaluation counts") {
  auto y = gauss_sum_model(10);
  std::vector<Marginal> in(10, Marginal::gaussian(0, 1));
  y.reset_count();
  PddOptions o;
  o.S = 2;
  o.m = 3;
  auto b = compute_coefficients(y, in, o);
  CHECK(b.distinct_points == 761);
  CHECK(y.evaluations() == 761);
  CHECK(b.evaluation_bound == 1 + 10 * 4 + 45 * 16);

  // Odd n on a symmetric measure: the centre node coincides with the
  // reference point.
  y.reset_count();
  o.n = 5;
  b = compute_coefficients(y, in, o);
  CHECK(b.distinct_points == 1 + 10 * 4 + 45 * 16);
  CHECK(y.evaluations() == b.distinct_points);

  // Non-symmetric measure: no coincidence with the mean.
  auto z = scalar_model(5, [](auto x) { return x[0] + x[4]; });
  std::vector<Marginal> ln(5, Marginal::lognormal(1, 0.2));
  PddOptions o2;
  o2.S = 2;
  o2.m = 3;
  auto b2 = compute_coefficients(z, ln, o2);
  CHECK(b2.distinct_points == 1 + 5 * 4 + 10 * 16);
  CHECK(evaluation_bound(21, 2, 4) == 3445);
  CHECK(evaluation_bound(100, 2, 4) == 79601);
  // R = N leaves only the full subset with non-zero weight.
  CHECK(evaluation_bound(3, 3, 2) == 8);
}

TEST_CASE("R larger than S") {
  auto y = scalar_model(4, [](auto x) { return x[0] * x[1] * x[2] + x[3] * x[3]; });
  auto in = std_normals(4);
  auto s = build(y, in, 1, 2, 3, 3);
  CHECK(s.coefficient({{3}, {2}}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(s.y_empty() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s.coefficient({{0}, {1}})) < 1e-12);
  CHECK_THROWS(build(y, in, 2, 2, 1, 3));
  CHECK_THROWS(build(y, in, 1, 2, 1, 2));
}

TEST_CASE("JSON round trip is lossless") {
  auto y = scalar_model(3, [](auto x) { return std::sin(x[0]) * std::exp(x[1] / 3) + x[2] / 7; });
  std::vector<Marginal> in{Marginal::weibull(1, 0.5), Marginal::gaussian(0.1, 0.3),
                           Marginal::truncated_gaussian(0, 1, 2)};
  auto s = build(y, in, 2, 3);
  auto j = surrogate_to_json(s);
  auto t = surrogate_from_json(nlohmann::json::parse(j.dump()));
  CHECK(t.y_empty() == s.y_empty());
  CHECK(t.reference() == s.reference());
  auto a = s.terms(), b = t.terms();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first == b[i].first);
    CHECK(a[i].second == b[i].second);
  }
  CHECK(t.inputs() == s.inputs());
  CHECK(surrogate_to_json(t).dump() == j.dump());
  CHECK_THROWS(surrogate_from_json(nlohmann::json{{"format", "other"}}));
}

TEST_CASE("coefficients are independent of thread count") {
  auto y = gauss_sum_model(8);
  std::vector<Marginal> in(8, Marginal::gaussian(0, 1));
  auto a = build(y, in, 2, 3, 0, 0, 1);
  auto b = build(y, in, 2, 3, 0, 0, 5);
  CHECK(a.y_empty() == b.y_empty());
  auto ta = a.terms(), tb = b.terms();
  for (std::size_t i = 0; i < ta.size(); ++i) CHECK(ta[i].second == tb[i].second);
}

TEST_CASE("model failures carry the offending point") {
  auto y = scalar_model(2, [](auto x) {
    if (x[0] > 1.0) throw std::runtime_error("diverged");
    return x[0];
  });
  try {
    build(y, std_normals(2), 1, 2);
    FAIL("expected an exception");
  } catch (const ModelEvaluationError& e) {
    REQUIRE(e.point().size() == 2);
    CHECK(e.point()[0] > 1.0);
  }
  auto nan = scalar_model(1, [](auto) { return std::nan(""); });
  CHECK_THROWS_AS(build(nan, std_normals(1), 1, 1), ModelEvaluationError);
}
