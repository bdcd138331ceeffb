#include "pdduq/orthopoly.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

#include "pdduq/special.hpp"

namespace pdduq {

void RecurrenceTable::evaluate(double x, int degree, double* out) const {
  if (degree > max_degree())
    throw std::out_of_range("RecurrenceTable::evaluate: degree " + std::to_string(degree) +
                            " exceeds table degree " + std::to_string(max_degree()));
  double z = standardize(x);
  out[0] = 1.0;
  if (degree == 0) return;
  out[1] = (z - alpha[0]) / std::sqrt(beta[1]);
  for (int j = 1; j < degree; ++j)
    out[j + 1] = ((z - alpha[j]) * out[j] - std::sqrt(beta[j]) * out[j - 1]) / std::sqrt(beta[j + 1]);
}

std::vector<double> RecurrenceTable::evaluate(double x, int degree) const {
  std::vector<double> v(degree + 1);
  evaluate(x, degree, v.data());
  return v;
}

double RecurrenceTable::evaluate(int j, double x) const {
  return evaluate(x, j).back();
}

namespace {

// Eigenvalues and first eigenvector components of the symmetric tridiagonal
// matrix (d, e), e[i] coupling rows i and i+1. Implicit-shift QL.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z0) {
  const int n = static_cast<int>(d.size());
  const double eps = std::numeric_limits<double>::epsilon();
  z0.assign(n, 0.0);
  z0[0] = 1.0;
  e.resize(n, 0.0);
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 50)
          throw std::runtime_error("Gauss rule: eigenvalue iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        bool underflow = false;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          double fz = z0[i + 1];
          z0[i + 1] = s * z0[i] + c * fz;
          z0[i] = c * z0[i] - s * fz;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

GaussRule standardized_gauss(const std::vector<double>& alpha, const std::vector<double>& beta,
                             int n, bool symmetric) {
  std::vector<double> d(alpha.begin(), alpha.begin() + n);
  std::vector<double> e(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) e[i] = std::sqrt(beta[i + 1]);
  std::vector<double> z0;
  tridiagonal_ql(d, e, z0);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
  GaussRule g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    g.nodes[k] = d[idx[k]];
    g.weights[k] = beta[0] * z0[idx[k]] * z0[idx[k]];
  }
  if (symmetric) {
    // Enforce exact symmetry so the middle node of an odd rule is the center.
    for (int k = 0; k < n / 2; ++k) {
      double x = 0.5 * (g.nodes[n - 1 - k] - g.nodes[k]);
      double w = 0.5 * (g.weights[k] + g.weights[n - 1 - k]);
      g.nodes[k] = -x;
      g.nodes[n - 1 - k] = x;
      g.weights[k] = g.weights[n - 1 - k] = w;
    }
    if (n % 2 == 1) g.nodes[n / 2] = 0.0;
  }
  return g;
}

const GaussRule& legendre_panel_rule() {
  static const GaussRule rule = [] {
    constexpr int n = 20;
    std::vector<double> a(n, 0.0), b(n, 0.0);
    b[0] = 1.0;
    for (int j = 1; j < n; ++j) b[j] = double(j) * j / (4.0 * j * j - 1.0);
    return standardized_gauss(a, b, n, true);
  }();
  return rule;
}

struct BaseMap {
  double lo, hi;
  // maps base coordinate to (x, base density)
  std::function<std::pair<double, double>(double)> map;
};

BaseMap base_map(const Marginal& m, int degree) {
  const auto& p = m.params();
  const double r = 2.0 * degree + 2.0;
  switch (m.kind()) {
    case MarginalKind::Gaussian: {
      double w = std::sqrt(r) + 13.0;
      double mu = p[0], s = p[1];
      return {-w, w, [=](double t) { return std::make_pair(mu + s * t, normal_pdf(t)); }};
    }
    case MarginalKind::Lognormal: {
      double mt = m.log_mu(), st = m.log_sigma();
      return {-13.0, r * st + 13.0,
              [=](double t) { return std::make_pair(std::exp(mt + st * t), normal_pdf(t)); }};
    }
    case MarginalKind::TruncatedGaussian: {
      double mu = p[0], s = p[1], a = p[2] / s;
      double z = normal_cdf(a) - normal_cdf(-a);
      return {-a, a, [=](double t) { return std::make_pair(mu + s * t, normal_pdf(t) / z); }};
    }
    case MarginalKind::Exponential:
    case MarginalKind::Weibull: {
      // s = ln u with u = (x/lambda)^k standard exponential.
      double lam = m.kind() == MarginalKind::Weibull ? p[0] : 1.0 / p[0];
      double k = m.kind() == MarginalKind::Weibull ? p[1] : 1.0;
      double a = 1.0 + r / k;
      double uhi = std::max(60.0, a + 12.0 * std::sqrt(a) + 45.0);
      return {-42.0, std::log(uhi), [=](double s) {
                double u = std::exp(s);
                return std::make_pair(lam * std::exp(s / k), std::exp(s - u));
              }};
    }
    case MarginalKind::Uniform: {
      double a = p[0], b = p[1];
      return {-1.0, 1.0,
              [=](double t) { return std::make_pair(0.5 * (a + b) + 0.5 * (b - a) * t, 0.5); }};
    }
  }
  throw std::logic_error("base_map: unknown kind");
}

void standardization(const Marginal& m, PolyFamily& fam, double& shift, double& scale) {
  const auto& p = m.params();
  switch (m.kind()) {
    case MarginalKind::Gaussian:
      fam = PolyFamily::Hermite;
      shift = p[0];
      scale = p[1];
      return;
    case MarginalKind::Exponential:
      fam = PolyFamily::Laguerre;
      shift = 0.0;
      scale = 1.0 / p[0];
      return;
    case MarginalKind::Uniform:
      fam = PolyFamily::Legendre;
      shift = 0.5 * (p[0] + p[1]);
      scale = 0.5 * (p[1] - p[0]);
      return;
    default:
      fam = PolyFamily::Numeric;
      shift = m.mean();
      scale = m.stdev();
      return;
  }
}

// Discretized Stieltjes procedure in orthonormal (Lanczos) form.
void stieltjes(const std::vector<double>& z, const std::vector<double>& w, int m_max,
               std::vector<double>& alpha, std::vector<double>& beta) {
  const std::size_t K = z.size();
  alpha.assign(m_max + 1, 0.0);
  beta.assign(m_max + 1, 0.0);
  double mass = pairwise_sum(w);
  beta[0] = 1.0;
  std::vector<double> q(K, 1.0), qprev(K, 0.0), r(K), tmp(K);
  std::vector<double> wn(K);
  for (std::size_t k = 0; k < K; ++k) wn[k] = w[k] / mass;
  for (int j = 0; j <= m_max; ++j) {
    for (std::size_t k = 0; k < K; ++k) tmp[k] = wn[k] * z[k] * q[k] * q[k];
    alpha[j] = pairwise_sum(tmp);
    if (j == m_max) break;
    double sb = j == 0 ? 0.0 : std::sqrt(beta[j]);
    for (std::size_t k = 0; k < K; ++k) r[k] = (z[k] - alpha[j]) * q[k] - sb * qprev[k];
    for (std::size_t k = 0; k < K; ++k) tmp[k] = wn[k] * r[k] * r[k];
    double b = pairwise_sum(tmp);
    if (!(b > 0.0))
      throw std::runtime_error("measure not positive-definite at degree " + std::to_string(j + 1));
    beta[j + 1] = b;
    double sq = std::sqrt(b);
    for (std::size_t k = 0; k < K; ++k) {
      qprev[k] = q[k];
      q[k] = r[k] / sq;
    }
  }
}

GaussRule dense_rule_std(const Marginal& m, int degree, int panels, double shift, double scale) {
  GaussRule g = dense_rule(m, degree, panels);
  for (auto& x : g.nodes) x = (x - shift) / scale;
  return g;
}

double max_rel_change(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  return d;
}

int converged_panels(const Marginal& m, int degree, RecurrenceTable* out) {
  PolyFamily fam;
  double shift, scale;
  standardization(m, fam, shift, scale);
  int panels = 10;
  std::vector<double> a0, b0, a1, b1;
  auto g = dense_rule_std(m, degree, panels, shift, scale);
  stieltjes(g.nodes, g.weights, degree, a0, b0);
  for (int it = 0; it < 9; ++it) {
    panels *= 2;
    g = dense_rule_std(m, degree, panels, shift, scale);
    stieltjes(g.nodes, g.weights, degree, a1, b1);
    double change = std::max(max_rel_change(a0, a1), max_rel_change(b0, b1));
    a0.swap(a1);
    b0.swap(b1);
    if (change <= 1e-10) {
      if (out) {
        out->alpha = a0;
        out->beta = b0;
      }
      return panels;
    }
  }
  throw std::runtime_error("recurrence for " + m.describe() + " did not settle at degree " +
                           std::to_string(degree));
}

}  // namespace

GaussRule dense_rule(const Marginal& m, int degree, int panels) {
  BaseMap bm = base_map(m, degree);
  const GaussRule& leg = legendre_panel_rule();
  const std::size_t P = leg.nodes.size();
  GaussRule g;
  g.nodes.reserve(panels * P);
  g.weights.reserve(panels * P);
  double h = (bm.hi - bm.lo) / panels;
  for (int p = 0; p < panels; ++p) {
    double a = bm.lo + p * h;
    for (std::size_t k = 0; k < P; ++k) {
      double t = a + 0.5 * h * (leg.nodes[k] + 1.0);
      auto [x, dens] = bm.map(t);
      double w = leg.weights[k] * h * dens;  // Legendre weights sum to 1 on [-1,1]
      if (w > 0.0 && std::isfinite(x)) {
        g.nodes.push_back(x);
        g.weights.push_back(w);
      }
    }
  }
  return g;
}

GaussRule converged_dense_rule(const Marginal& m, int degree) {
  int panels = converged_panels(m, degree, nullptr);
  return dense_rule(m, degree, panels);
}

RecurrenceTable build_recurrence(const Marginal& m, int m_max) {
  if (m_max < 0) throw std::invalid_argument("build_recurrence: m_max must be >= 0");
  RecurrenceTable t;
  standardization(m, t.family, t.shift, t.scale);
  t.alpha.assign(m_max + 1, 0.0);
  t.beta.assign(m_max + 1, 0.0);
  t.beta[0] = 1.0;
  switch (t.family) {
    case PolyFamily::Hermite:
      for (int j = 1; j <= m_max; ++j) t.beta[j] = j;
      break;
    case PolyFamily::Laguerre:
      for (int j = 0; j <= m_max; ++j) t.alpha[j] = 2.0 * j + 1.0;
      for (int j = 1; j <= m_max; ++j) t.beta[j] = double(j) * j;
      break;
    case PolyFamily::Legendre:
      for (int j = 1; j <= m_max; ++j) t.beta[j] = double(j) * j / (4.0 * j * j - 1.0);
      break;
    case PolyFamily::Numeric:
      converged_panels(m, m_max, &t);
      break;
  }
  return t;
}

std::shared_ptr<const RecurrenceTable> basis_table(const Marginal& m, int min_degree) {
  int bucket = std::max(16, ((min_degree + 7) / 8) * 8);
  using Key = std::tuple<int, std::vector<double>, int>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const RecurrenceTable>> cache;
  Key key{static_cast<int>(m.kind()), m.params(), bucket};
  {
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto t = std::make_shared<const RecurrenceTable>(build_recurrence(m, bucket));
  std::lock_guard lock(mu);
  auto [it, inserted] = cache.emplace(key, t);
  return it->second;
}

GaussRule gauss_rule(const RecurrenceTable& t, int n) {
  if (n < 1) throw std::invalid_argument("gauss_rule: n must be >= 1");
  if (n > t.max_degree() + 1)
    throw std::invalid_argument("gauss_rule: n = " + std::to_string(n) +
                                " needs recurrence degree " + std::to_string(n - 1) +
                                " but table has " + std::to_string(t.max_degree()));
  bool symmetric = std::all_of(t.alpha.begin(), t.alpha.begin() + n, [](double a) { return a == 0.0; });
  GaussRule g = standardized_gauss(t.alpha, t.beta, n, symmetric);
  for (auto& x : g.nodes) x = t.shift + t.scale * x;
  return g;
}

double triple_product_quadrature(const RecurrenceTable& t, int j1, int j2, int j3) {
  int n = (j1 + j2 + j3 + 2) / 2;
  GaussRule g = gauss_rule(t, std::max(n, 1));
  int jm = std::max({j1, j2, j3});
  std::vector<double> psi(jm + 1);
  double s = 0.0;
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    t.evaluate(g.nodes[k], jm, psi.data());
    s += g.weights[k] * psi[j1] * psi[j2] * psi[j3];
  }
  return s;
}

double hermite_triple_closed_form(int j1, int j2, int j3) {
  int sum = j1 + j2 + j3;
  if (sum % 2) return 0.0;
  int q = sum / 2;
  if (j1 > q || j2 > q || j3 > q) return 0.0;
  return std::sqrt(factorial(j1) * factorial(j2) * factorial(j3)) /
         (factorial(q - j1) * factorial(q - j2) * factorial(q - j3));
}

double laguerre_triple_closed_form(int j1, int j2, int j3) {
  if (j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;
  int vmin = (j1 + j2 + 1 - j3) / 2;
  int vmax = std::min({j1, j2, j1 + j2 - j3});
  double s = 0.0;
  for (int v = vmin; v <= vmax; ++v) {
    int e = j3 - j1 - j2 + 2 * v;
    s += factorial(j1 + j2 - v) * std::ldexp(1.0, e) /
         (factorial(v) * factorial(j1 - v) * factorial(j2 - v)) * binomial(v, e);
  }
  return ((j1 + j2 + j3) % 2 ? -1.0 : 1.0) * s;
}

namespace {
double double_factorial(int n) {
  if (n <= 0) return 1.0;
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}
}  // namespace

double legendre_triple_closed_form(int j1, int j2, int j3) {
  int sum = j1 + j2 + j3;
  if (sum % 2) return 0.0;
  if (j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;
  double pre = 0.5 * std::sqrt(2.0 * (2 * j1 + 1) * (2 * j2 + 1) * (2 * j3 + 1));
  double num = double_factorial(j1 + j2 - j3 - 1) * double_factorial(j2 + j3 - j1 - 1) *
               double_factorial(sum) * double_factorial(j1 + j3 - j2 - 1);
  double den = double_factorial(j1 + j2 - j3) * double_factorial(j2 + j3 - j1) *
               double_factorial(sum + 1) * double_factorial(j1 + j3 - j2);
  return pre * num / den;
}

namespace {

double closed_form_raw(PolyFamily f, int j1, int j2, int j3) {
  switch (f) {
    case PolyFamily::Hermite:
      return hermite_triple_closed_form(j1, j2, j3);
    case PolyFamily::Laguerre: {
      // Our basis is (-1)^j L_j.
      double v = laguerre_triple_closed_form(j1, j2, j3);
      return ((j1 + j2 + j3) % 2) ? -v : v;
    }
    case PolyFamily::Legendre:
      return legendre_triple_closed_form(j1, j2, j3);
    case PolyFamily::Numeric:
      break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool validate_family(PolyFamily f) {
  Marginal m = f == PolyFamily::Hermite    ? Marginal::gaussian(0.0, 1.0)
               : f == PolyFamily::Laguerre ? Marginal::exponential(1.0)
                                           : Marginal::uniform(-1.0, 1.0);
  RecurrenceTable t = build_recurrence(m, 16);
  for (int a = 0; a <= 8; ++a)
    for (int b = 0; b <= 8; ++b)
      for (int c = 0; c <= 8; ++c) {
        double q = triple_product_quadrature(t, a, b, c);
        double cf = closed_form_raw(f, a, b, c);
        if (!(std::abs(q - cf) <= 1e-9 * std::max(1.0, std::abs(q)))) return false;
      }
  return true;
}

}  // namespace

bool closed_form_validated(PolyFamily f) {
  static const bool herm = validate_family(PolyFamily::Hermite);
  static const bool lag = validate_family(PolyFamily::Laguerre);
  static const bool leg = validate_family(PolyFamily::Legendre);
  switch (f) {
    case PolyFamily::Hermite: return herm;
    case PolyFamily::Laguerre: return lag;
    case PolyFamily::Legendre: return leg;
    case PolyFamily::Numeric: return false;
  }
  return false;
}

double triple_product(const RecurrenceTable& t, int j1, int j2, int j3) {
  if (t.family != PolyFamily::Numeric && closed_form_validated(t.family))
    return closed_form_raw(t.family, j1, j2, j3);
  return triple_product_quadrature(t, j1, j2, j3);
}

}  // namespace pdduq
