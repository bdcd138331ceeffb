#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "pdduq/orthopoly.hpp"

using namespace pdduq;

namespace {

std::vector<Marginal> six_kinds() {
  return {Marginal::gaussian(2.0, 0.5),     Marginal::exponential(1.0),
          Marginal::lognormal(120.0, 12.0), Marginal::truncated_gaussian(0.0, 0.2, 0.5),
          Marginal::weibull(1.0, 0.5),      Marginal::uniform(-1.0, 3.0),
          Marginal::lognormal(1.0, 0.7),    Marginal::weibull(2.0, 1.7)};
}

}  // namespace

TEST_CASE("classical recurrence examples") {
  auto h = build_recurrence(Marginal::gaussian(0, 1), 3);
  CHECK(h.alpha == std::vector<double>{0, 0, 0, 0});
  CHECK(h.beta == std::vector<double>{1, 1, 2, 3});
  auto u = build_recurrence(Marginal::uniform(-1, 1), 1);
  CHECK(u.alpha[0] == 0.0);
  CHECK(u.beta[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  auto e = build_recurrence(Marginal::exponential(1), 1);
  CHECK(e.alpha[0] == 1.0);
}

TEST_CASE("Stieltjes reproduces classical coefficients") {
  // A lognormal with tiny spread is not classical; compare instead the
  // numeric path on a truncated Gaussian with huge half-width to Hermite.
  auto t = build_recurrence(Marginal::truncated_gaussian(0.0, 1.0, 30.0), 10);
  for (int j = 0; j <= 10; ++j) {
    CHECK(std::abs(t.alpha[j]) < 1e-10);
    CHECK(t.beta[j] == doctest::Approx(j == 0 ? 1.0 : j).epsilon(1e-10));
  }
}

TEST_CASE("orthonormal evaluation examples") {
  auto h = build_recurrence(Marginal::gaussian(0, 1), 4);
  CHECK(h.evaluate(1, 2.0) == doctest::Approx(2.0));
  CHECK(std::abs(h.evaluate(2, 1.0)) < 1e-15);
  CHECK(h.evaluate(0, 123.0) == 1.0);
  CHECK_THROWS(h.evaluate(5, 0.0));
}

TEST_CASE("Gauss rule examples") {
  auto h = build_recurrence(Marginal::gaussian(0, 1), 4);
  auto g2 = gauss_rule(h, 2);
  CHECK(g2.nodes[0] == doctest::Approx(-1.0));
  CHECK(g2.nodes[1] == doctest::Approx(1.0));
  CHECK(g2.weights[0] == doctest::Approx(0.5));
  auto g3 = gauss_rule(h, 3);
  double m4 = 0;
  for (int k = 0; k < 3; ++k) m4 += g3.weights[k] * std::pow(g3.nodes[k], 4);
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(g3.nodes[1] == 0.0);
  auto u = build_recurrence(Marginal::uniform(-1, 1), 2);
  auto g1 = gauss_rule(u, 1);
  CHECK(g1.nodes[0] == 0.0);
  CHECK(g1.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("odd Gauss rules of symmetric measures hit the mean exactly") {
  auto m = Marginal::gaussian(3.7, 0.3);
  auto t = build_recurrence(m, 8);
  auto g = gauss_rule(t, 5);
  CHECK(g.nodes[2] == 3.7);
}

TEST_CASE("exactness and orthonormality for all kinds, n up to 9") {
  for (const auto& m : six_kinds()) {
    CAPTURE(m.describe());
    auto t = build_recurrence(m, 10);
    for (int j = 1; j <= 10; ++j) CHECK(t.beta[j] > 0.0);
    for (int n = 1; n <= 9; ++n) {
      auto g = gauss_rule(t, n);
      double wsum = 0.0;
      for (int k = 0; k < n; ++k) {
        wsum += g.weights[k];
        if (k) CHECK(g.nodes[k] > g.nodes[k - 1]);
        CHECK(g.weights[k] > 0.0);
      }
      CHECK(std::abs(wsum - 1.0) < 1e-12);
      // exactness on monomials of the standardized variable
      for (int r = 0; r <= 2 * n - 1; ++r) {
        double q = 0;
        for (int k = 0; k < n; ++k) q += g.weights[k] * std::pow(g.nodes[k], r);
        CAPTURE(n);
        CAPTURE(r);
        // odd moments of symmetric measures vanish; scale by sqrt(E[X^2r])
        CHECK(std::abs(q - m.raw_moment(r)) <= 1e-10 * std::max(std::abs(m.raw_moment(r)), std::sqrt(m.raw_moment(2 * r))));
      }
      // Gram matrix of psi_0..psi_{n-1}
      int deg = n - 1;
      std::vector<double> gram((deg + 1) * (deg + 1), 0.0), psi(deg + 1);
      for (int k = 0; k < n; ++k) {
        t.evaluate(g.nodes[k], deg, psi.data());
        for (int a = 0; a <= deg; ++a)
          for (int b = 0; b <= deg; ++b) gram[a * (deg + 1) + b] += g.weights[k] * psi[a] * psi[b];
      }
      for (int a = 0; a <= deg; ++a)
        for (int b = 0; b <= deg; ++b)
          CHECK(std::abs(gram[a * (deg + 1) + b] - (a == b ? 1.0 : 0.0)) < 1e-8);
    }
  }
}

TEST_CASE("orthonormality against an independent integrator") {
  for (const auto& m : six_kinds()) {
    CAPTURE(m.describe());
    auto t = build_recurrence(m, 6);
    auto [lo, hi] = m.support();
    for (int a = 0; a <= 6; ++a)
      for (int b = a; b <= 6; ++b) {
        auto f = [&](double x) { return m.in_support(x) ? t.evaluate(a, x) * t.evaluate(b, x) * m.pdf(x) : 0.0; };
        double v;
        if (m.kind() == MarginalKind::Lognormal) {
          double mt = m.log_mu(), st = m.log_sigma();
          v = oracle::integrate([&](double s) { double x = std::exp(mt + st * s); return f(x) * x * st; },
                                -INFINITY, INFINITY);
        } else if (m.kind() == MarginalKind::Gaussian) {
          double mu = m.params()[0], s = m.params()[1];
          v = oracle::integrate([&](double z) { return f(mu + s * z) * s; }, -INFINITY, INFINITY);
        } else {
          v = oracle::integrate(f, lo, hi);
        }
        CAPTURE(a);
        CAPTURE(b);
        CHECK(std::abs(v - (a == b ? 1.0 : 0.0)) < 1e-8);
      }
  }
}

TEST_CASE("triple product examples") {
  auto h = build_recurrence(Marginal::gaussian(0, 1), 16);
  CHECK(triple_product(h, 1, 1, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(triple_product(h, 1, 2, 4) == 0.0);
  auto u = build_recurrence(Marginal::uniform(-1, 1), 16);
  CHECK(triple_product(u, 1, 1, 2) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("closed forms agree with quadrature where validated") {
  CHECK(closed_form_validated(PolyFamily::Hermite));
  CHECK(closed_form_validated(PolyFamily::Laguerre));
  // The printed Legendre formula is off by a constant; quadrature is used.
  CHECK_FALSE(closed_form_validated(PolyFamily::Legendre));
  CHECK(legendre_triple_closed_form(1, 1, 2) == doctest::Approx(0.632455532).epsilon(1e-8));
  auto h = build_recurrence(Marginal::gaussian(0, 1), 16);
  auto l = build_recurrence(Marginal::exponential(1), 16);
  for (int a = 0; a <= 8; ++a)
    for (int b = 0; b <= 8; ++b)
      for (int c = 0; c <= 8; ++c) {
        CHECK(std::abs(hermite_triple_closed_form(a, b, c) - triple_product_quadrature(h, a, b, c)) <
              1e-9 * std::max(1.0, std::abs(triple_product_quadrature(h, a, b, c))));
        double sign = ((a + b + c) % 2) ? -1.0 : 1.0;
        double q = triple_product_quadrature(l, a, b, c);
        CHECK(std::abs(sign * laguerre_triple_closed_form(a, b, c) - q) < 1e-9 * std::max(1.0, std::abs(q)));
      }
}

TEST_CASE("triple products are permutation invariant") {
  for (const auto& m : six_kinds()) {
    auto t = build_recurrence(m, 12);
    for (int a = 0; a <= 5; ++a)
      for (int b = 0; b <= 5; ++b)
        for (int c = 0; c <= 5; ++c) {
          double v = triple_product(t, a, b, c);
          CHECK(std::abs(v - triple_product(t, b, c, a)) < 1e-10 * std::max(1.0, std::abs(v)));
          CHECK(std::abs(v - triple_product(t, c, b, a)) < 1e-10 * std::max(1.0, std::abs(v)));
        }
  }
}

TEST_CASE("shared tables are memoized") {
  auto a = basis_table(Marginal::lognormal(2.0, 0.2), 5);
  auto b = basis_table(Marginal::lognormal(2.0, 0.2), 9);
  CHECK(a.get() == b.get());
  CHECK(a->max_degree() >= 16);
}
