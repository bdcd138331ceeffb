#include "pdduq/models.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>

#include "pdduq/random.hpp"
#include "pdduq/special.hpp"

namespace pdduq {

TrigPolyCoefficients default_trig_poly_coefficients(std::uint64_t seed) {
  constexpr int N = 15;
  TrigPolyCoefficients c;
  std::uint64_t idx = 0;
  auto u = [&] { return SampleStream(seed, idx++).uniform(); };
  for (int i = 0; i < N; ++i) c.a1.push_back(0.1 * u());
  for (int i = 0; i < N; ++i) c.a2.push_back(u());
  for (int i = 0; i < N; ++i) c.a3.push_back(u());
  c.M.assign(N, std::vector<double>(N, 0.0));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) c.M[i][j] = 0.6 * u() - 0.3;
  return c;
}

TrigPolyCoefficients trig_poly_from_json(const nlohmann::json& j) {
  TrigPolyCoefficients c;
  c.a1 = j.at("a1").get<std::vector<double>>();
  c.a2 = j.at("a2").get<std::vector<double>>();
  c.a3 = j.at("a3").get<std::vector<double>>();
  c.M = j.at("M").get<std::vector<std::vector<double>>>();
  const std::size_t N = c.a1.size();
  bool ok = N > 0 && c.a2.size() == N && c.a3.size() == N && c.M.size() == N;
  for (const auto& row : c.M) ok = ok && row.size() == N;
  if (!ok) throw std::invalid_argument("trig_poly data: a1, a2, a3 and M must have matching sizes");
  return c;
}

nlohmann::json trig_poly_to_json(const TrigPolyCoefficients& c) {
  return {{"a1", c.a1}, {"a2", c.a2}, {"a3", c.a3}, {"M", c.M}};
}

PerformanceModel trig_poly_model(const TrigPolyCoefficients& c) {
  const int N = c.dimension();
  return PerformanceModel("trig_poly", N, 1, [c, N](std::span<const double> x, std::span<double> y) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) {
      s += c.a1[i] * x[i] + c.a2[i] * std::sin(x[i]) + c.a3[i] * std::cos(x[i]);
      double r = 0.0;
      for (int j = 0; j < N; ++j) r += c.M[i][j] * x[j];
      s += x[i] * r;
    }
    y[0] = s;
  });
}

PerformanceModel cubic4_model() {
  return PerformanceModel("cubic4", 4, 1, [](std::span<const double> x, std::span<double> y) {
    double s = x[0] + x[1];
    y[0] = 500.0 - s * s * s + x[0] - x[1] - x[2] + x[0] * x[1] * x[2] - x[3];
  });
}

PerformanceModel gauss_sum_model(int N) {
  const double shift = 1.0 / (1000.0 + 3.0 * std::sqrt(double(N)));
  return PerformanceModel("gauss_sum", N, 1, [shift](std::span<const double> x, std::span<double> y) {
    double s = 1000.0;
    for (double v : x) s += v;
    y[0] = 1.0 / s - shift;
  });
}

PerformanceModel linear6_model() {
  return PerformanceModel("linear6", 6, 1, [](std::span<const double> x, std::span<double> y) {
    y[0] = x[0] + 2 * x[1] + 2 * x[2] + x[3] - 5 * x[4] - 5 * x[5];
  });
}

GaussSumReliability gauss_sum_exact(int N, double mu, double sigma) {
  double rn = std::sqrt(double(N));
  double beta = (3.0 - mu * rn) / sigma;
  return {normal_cdf(-beta), normal_pdf(beta) * rn / sigma,
          normal_pdf(beta) * (3.0 - mu * rn) / (sigma * sigma)};
}

namespace {

using cplx = std::complex<double>;

// Univariate function sum_c c * x^k * exp(i t x), keyed by (k, t).
using UniFn = std::map<std::pair<int, int>, cplx>;

UniFn multiply(const UniFn& a, const UniFn& b) {
  UniFn r;
  for (const auto& [ka, ca] : a)
    for (const auto& [kb, cb] : b) r[{ka.first + kb.first, ka.second + kb.second}] += ca * cb;
  return r;
}

struct Expect {
  cplx v, dmu, dsig;
};

// E[X^k e^{itX}] for X ~ N(mu, sigma^2) with derivatives in mu and sigma,
// by the Stein recurrence e_{k+1} = (mu + i sigma^2 t) e_k + k sigma^2 e_{k-1}.
Expect moment_exp(int k, int t, double mu, double s) {
  const cplx I(0.0, 1.0);
  cplx e0 = std::exp(I * (mu * t) - 0.5 * s * s * t * t);
  cplx a = mu + I * (s * s * t);
  cplx a_mu = 1.0, a_s = I * (2.0 * s * t);
  std::vector<Expect> e(k + 2);
  e[0] = {e0, I * double(t) * e0, -s * double(t * t) * e0};
  if (k >= 1) e[1] = {a * e[0].v, a_mu * e[0].v + a * e[0].dmu, a_s * e[0].v + a * e[0].dsig};
  for (int q = 1; q < k; ++q) {
    double s2 = s * s;
    e[q + 1].v = a * e[q].v + q * s2 * e[q - 1].v;
    e[q + 1].dmu = a_mu * e[q].v + a * e[q].dmu + q * s2 * e[q - 1].dmu;
    e[q + 1].dsig = a_s * e[q].v + a * e[q].dsig + q * 2.0 * s * e[q - 1].v + q * s2 * e[q - 1].dsig;
  }
  return e[k];
}

Expect expect(const UniFn& f, double mu, double s) {
  Expect r{0.0, 0.0, 0.0};
  for (const auto& [key, c] : f) {
    Expect e = moment_exp(key.first, key.second, mu, s);
    r.v += c * e.v;
    r.dmu += c * e.dmu;
    r.dsig += c * e.dsig;
  }
  return r;
}

struct ProductTerm {
  double coef;
  std::map<int, UniFn> factors;
};

}  // namespace

TrigPolyMoments trig_poly_exact_moments(const TrigPolyCoefficients& c, double mu, double sigma) {
  const int N = c.dimension();
  const cplx I(0.0, 1.0);
  std::vector<ProductTerm> terms;
  for (int i = 0; i < N; ++i) {
    UniFn g;
    g[{1, 0}] += c.a1[i];
    g[{0, 1}] += -0.5 * I * c.a2[i];
    g[{0, -1}] += 0.5 * I * c.a2[i];
    g[{0, 1}] += 0.5 * c.a3[i];
    g[{0, -1}] += 0.5 * c.a3[i];
    g[{2, 0}] += c.M[i][i];
    terms.push_back({1.0, {{i, g}}});
  }
  UniFn xf{{{1, 0}, 1.0}};
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) terms.push_back({c.M[i][j] + c.M[j][i], {{i, xf}, {j, xf}}});

  auto term_expect = [&](const std::map<int, UniFn>& fac) {
    cplx v = 1.0, dmu = 0.0, dsig = 0.0;
    for (const auto& [var, f] : fac) {
      Expect e = expect(f, mu, sigma);
      dmu = dmu * e.v + v * e.dmu;
      dsig = dsig * e.v + v * e.dsig;
      v *= e.v;
    }
    return Expect{v, dmu, dsig};
  };

  TrigPolyMoments r{};
  for (const auto& t : terms) {
    Expect e = term_expect(t.factors);
    r.m1 += t.coef * e.v.real();
    r.dm1_dmu += t.coef * e.dmu.real();
    r.dm1_dsigma += t.coef * e.dsig.real();
  }
  for (const auto& t1 : terms)
    for (const auto& t2 : terms) {
      std::map<int, UniFn> fac = t1.factors;
      for (const auto& [var, f] : t2.factors) {
        auto it = fac.find(var);
        if (it == fac.end()) fac[var] = f;
        else it->second = multiply(it->second, f);
      }
      Expect e = term_expect(fac);
      double w = t1.coef * t2.coef;
      r.m2 += w * e.v.real();
      r.dm2_dmu += w * e.dmu.real();
      r.dm2_dsigma += w * e.dsig.real();
    }
  return r;
}

}  // namespace pdduq
