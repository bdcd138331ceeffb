#include "pdduq/moments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

#include "pdduq/parallel.hpp"
#include "pdduq/report.hpp"
#include "pdduq/special.hpp"

namespace pdduq {

namespace {

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Dense rules are costly to converge; share them per marginal and degree.
std::shared_ptr<const GaussRule> cached_dense_rule(const Marginal& mg, int degree) {
  using Key = std::tuple<int, std::vector<double>, int>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const GaussRule>> cache;
  Key key{static_cast<int>(mg.kind()), mg.params(), degree};
  {
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto rule = std::make_shared<const GaussRule>(converged_dense_rule(mg, degree));
  std::lock_guard lock(mu);
  return cache.emplace(key, rule).first->second;
}

void check_basis(const PddSurrogate& s, const ScoreTerm& t) {
  if (t.variable < 0 || t.variable >= s.N())
    throw std::invalid_argument("score expansion targets variable outside the surrogate");
  const auto& mg = s.inputs()[t.variable];
  if (mg.kind() != t.kind || mg.params() != t.params)
    throw std::invalid_argument("score expansion was built for a different input distribution");
}

std::vector<int> subsets_mask_to_vars(const std::vector<int>& W, unsigned mask) {
  std::vector<int> v;
  for (std::size_t p = 0; p < W.size(); ++p)
    if (mask >> p & 1) v.push_back(W[p]);
  return v;
}

std::vector<std::vector<int>> subsets_of_size(int N, int k) {
  std::vector<std::vector<int>> out;
  if (k > N || k < 0) return out;
  std::vector<int> c(k);
  std::iota(c.begin(), c.end(), 0);
  for (;;) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[i] == N - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

}  // namespace

ScoreTerm project_score(const Marginal& mg, const RecurrenceTable& basis, ParameterRole role,
                        int m_prime, const ScoreOptions& opt) {
  if (m_prime < 1) throw std::invalid_argument("score expansion order must be >= 1");
  if (!mg.has_role(role))
    throw std::invalid_argument(to_string(mg.kind()) + " has no parameter '" + to_string(role) + "'");
  ScoreTerm t;
  t.role = role;
  t.kind = mg.kind();
  t.params = mg.params();
  t.D.assign(m_prime, 0.0);
  if (mg.kind() == MarginalKind::Gaussian) {
    // Scores are exactly psi_1 / sigma and sqrt(2) psi_2 / sigma.
    const double sigma = mg.stdev();
    if (role == ParameterRole::Mean) t.D[0] = 1.0 / sigma;
    if (role == ParameterRole::Stdev && m_prime >= 2) t.D[1] = std::sqrt(2.0) / sigma;
    return t;
  }
  const int n_prime = std::max(m_prime + 8, 16);
  std::shared_ptr<const GaussRule> rule;
  if (mg.kind() == MarginalKind::Exponential || mg.kind() == MarginalKind::Uniform)
    rule = std::make_shared<const GaussRule>(gauss_rule(*basis_table(mg, n_prime), n_prime));
  else
    rule = cached_dense_rule(mg, n_prime);
  if (basis.max_degree() < m_prime) throw std::invalid_argument("basis degree below score order");
  std::vector<double> psi(m_prime + 1);
  std::vector<std::vector<double>> parts(m_prime + 1);
  for (std::size_t q = 0; q < rule->nodes.size(); ++q) {
    const double x = rule->nodes[q];
    const double ws = rule->weights[q] * mg.log_density_derivative(role, x, opt);
    basis.evaluate(x, m_prime, psi.data());
    for (int j = 0; j <= m_prime; ++j) parts[j].push_back(ws * psi[j]);
  }
  t.s_empty = pairwise_sum(parts[0]);
  for (int j = 1; j <= m_prime; ++j) t.D[j - 1] = pairwise_sum(parts[j]);
  return t;
}

ScoreExpansion build_score_expansion(const DesignBinding& b, const std::vector<Marginal>& inputs,
                                     int m_prime, const ScoreOptions& opt) {
  validate_binding(b, inputs);
  ScoreExpansion e;
  e.design_index = b.design_index;
  e.name = b.name;
  e.m_prime = m_prime;
  for (const auto& tg : b.targets) {
    const auto& mg = inputs[tg.variable];
    auto t = project_score(mg, *basis_table(mg, m_prime), tg.role, m_prime, opt);
    t.variable = tg.variable;
    e.terms.push_back(std::move(t));
  }
  return e;
}

std::vector<ScoreExpansion> build_score_expansions(const std::vector<DesignBinding>& b,
                                                   const std::vector<Marginal>& inputs,
                                                   int m_prime, const ScoreOptions& opt) {
  std::vector<ScoreExpansion> out;
  for (const auto& x : b) out.push_back(build_score_expansion(x, inputs, m_prime, opt));
  return out;
}

std::vector<double> mean_sensitivity(const PddSurrogate& s, const std::vector<ScoreExpansion>& scores) {
  std::vector<double> out;
  for (const auto& e : scores) {
    std::vector<double> parts;
    for (const auto& t : e.terms) {
      check_basis(s, t);
      parts.push_back(s.y_empty() * t.s_empty);
      int ci = s.component_index({t.variable});
      const int mm = std::min<int>(s.m(), static_cast<int>(t.D.size()));
      for (int j = 1; j <= mm; ++j) parts.push_back(s.components()[ci].coeffs[j - 1] * t.D[j - 1]);
    }
    out.push_back(pairwise_sum(parts));
  }
  return out;
}

std::vector<double> second_moment_sensitivity(const PddSurrogate& s,
                                              const std::vector<ScoreExpansion>& scores) {
  const int m = s.m();
  const auto& comps = s.components();
  std::vector<std::vector<int>> comps_of(s.N());
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (int v : comps[c].vars) comps_of[v].push_back(static_cast<int>(c));
  const double m2 = s.second_moment();

  std::vector<double> out;
  for (const auto& e : scores) {
    std::vector<double> parts;
    for (const auto& t : e.terms) {
      check_basis(s, t);
      const int i = t.variable;
      const int L = std::min<int>(static_cast<int>(t.D.size()), 2 * m);
      // T[(a-1)*m*L + (b-1)*L + (l-1)] = E[psi_a psi_b psi_l]
      std::vector<double> T(static_cast<std::size_t>(m) * m * L);
      for (int a = 1; a <= m; ++a)
        for (int b = a; b <= m; ++b)
          for (int l = 1; l <= L; ++l) {
            double v = triple_product(s.basis(i), a, b, l);
            T[((a - 1) * m + (b - 1)) * L + (l - 1)] = v;
            T[((b - 1) * m + (a - 1)) * L + (l - 1)] = v;
          }
      // G[l-1] = E[y~^2 psi_l(x_i)]
      std::vector<std::vector<double>> G(L);
      const auto& uni = comps[s.component_index({i})].coeffs;
      for (int l = 1; l <= std::min(L, m); ++l) G[l - 1].push_back(2.0 * s.y_empty() * uni[l - 1]);
      for (int c : comps_of[i]) {
        const auto& u = comps[c].vars;
        const int k = static_cast<int>(u.size());
        const int p = static_cast<int>(std::find(u.begin(), u.end(), i) - u.begin());
        const std::uint64_t stride = ipow(m, k - 1 - p);
        const std::uint64_t rest = ipow(m, k - 1);
        const double* Cu = comps[c].coeffs.data();
        const double* Cw = nullptr;
        if (k >= 2) {
          std::vector<int> w;
          for (int v : u)
            if (v != i) w.push_back(v);
          Cw = comps[s.component_index(w)].coeffs.data();
        }
        for (std::uint64_t r = 0; r < rest; ++r) {
          const std::uint64_t base = (r / stride) * stride * m + r % stride;
          for (int l = 1; l <= L; ++l) {
            double acc = 0.0;
            for (int a = 1; a <= m; ++a) {
              const double ca = Cu[base + (a - 1) * stride];
              double inner = 0.0;
              for (int b = 1; b <= m; ++b)
                inner += Cu[base + (b - 1) * stride] * T[((a - 1) * m + (b - 1)) * L + (l - 1)];
              acc += ca * inner;
            }
            if (Cw && l <= m) acc += 2.0 * Cw[r] * Cu[base + (l - 1) * stride];
            G[l - 1].push_back(acc);
          }
        }
      }
      parts.push_back(m2 * t.s_empty);
      for (int l = 1; l <= L; ++l) parts.push_back(t.D[l - 1] * pairwise_sum(G[l - 1]));
    }
    out.push_back(pairwise_sum(parts));
  }
  return out;
}

std::string to_string(HigherMomentMethod m) { return m == HigherMomentMethod::OptionI ? "optionI" : "optionII"; }

HigherMomentMethod higher_moment_method_from_string(const std::string& s) {
  if (s == "optionI" || s == "I" || s == "1") return HigherMomentMethod::OptionI;
  if (s == "optionII" || s == "II" || s == "2") return HigherMomentMethod::OptionII;
  throw std::invalid_argument("unknown higher-moment option '" + s + "' (expected optionI or optionII)");
}

namespace {

// Centered moments E[Z^k], Z = y~ - y_empty, and E[Z^k psi_l(x_i)] for
// targeted i. A product of components has zero mean unless every variable
// it involves appears at least twice, so only subsets W of size <= K
// contribute; the Moebius sum over W turns the restricted expectations
// h(W) = E[Z_W^k ...] into the full ones with weights
// c(|W|) = sum_{j=0}^{K-|W|} (-1)^j C(N-|W|, j).
struct CenteredMoments {
  std::vector<double> EZ;  // k = 0..Q
  // per target variable: [(k-1)*L + (l-1)], k = 1..Q, l = 1..L
  std::map<int, std::vector<double>> EZpsi;
  std::uint64_t points = 0;
};

double moebius_weight(int N, int K, int w) {
  if (w > K) return 0.0;
  double c = 0.0;
  for (int j = 0; j <= K - w; ++j) c += (j % 2 ? -1.0 : 1.0) * binomial(N - w, j);
  return c;
}

CenteredMoments centered_moments(const PddSurrogate& s, int Q, const std::vector<int>& targets, int L,
                                 const MomentOptions& opt) {
  const int N = s.N(), S = s.S(), m = s.m();
  const bool sens = !targets.empty();
  if (!sens) L = 0;
  auto Kmom = [&](int k) { return std::min(N, k * S / 2); };
  auto Ksens = [&](int k) { return std::min(N, (k * S + 1) / 2); };
  const int Kmax = sens ? std::max(Kmom(Q), Ksens(Q)) : Kmom(Q);
  const int n = (Q * m + L + 2) / 2;  // exact for degree Q*m + L per variable
  std::vector<char> is_target(N, 0);
  for (int i : targets) is_target[i] = 1;

  if (Kmax > opt.max_dimension)
    throw std::invalid_argument("Option I needs " + std::to_string(Kmax) +
                                "-dimensional integrations (limit " + std::to_string(opt.max_dimension) +
                                "); use Option II");

  // Subsets W with a non-zero weight for some order.
  std::vector<std::vector<int>> Ws;
  double budget = 0.0;
  for (int w = 1; w <= Kmax; ++w) {
    bool any_mom = false, any_sens = false;
    for (int k = 1; k <= Q; ++k) {
      any_mom |= moebius_weight(N, Kmom(k), w) != 0.0;
      any_sens |= sens && moebius_weight(N, Ksens(k), w) != 0.0;
    }
    if (!any_mom && !any_sens) continue;
    const double cnt = binomial(N, w) * std::pow(double(n), w);
    budget += cnt;
    if (budget > double(opt.max_grid_points))
      throw std::invalid_argument("Option I grid exceeds " + std::to_string(opt.max_grid_points) +
                                  " points; use Option II");
    for (auto& W : subsets_of_size(N, w)) {
      bool hit = std::any_of(W.begin(), W.end(), [&](int i) { return is_target[i] != 0; });
      if (any_mom || hit) Ws.push_back(std::move(W));
    }
  }

  // Univariate rules and basis values at nodes.
  std::vector<GaussRule> rules(N);
  std::vector<std::vector<double>> psi(N), psi_s(N);
  for (int i = 0; i < N; ++i) {
    const auto& mg = s.inputs()[i];
    rules[i] = gauss_rule(*basis_table(mg, n), n);
    psi[i].resize(static_cast<std::size_t>(n) * (m + 1));
    for (int q = 0; q < n; ++q) s.basis(i).evaluate(rules[i].nodes[q], m, psi[i].data() + q * (m + 1));
    if (is_target[i]) {
      auto sb = basis_table(mg, L);
      psi_s[i].resize(static_cast<std::size_t>(n) * (L + 1));
      for (int q = 0; q < n; ++q) sb->evaluate(rules[i].nodes[q], L, psi_s[i].data() + q * (L + 1));
    }
  }

  // Component values on the tensor grid of their own variables.
  const auto& comps = s.components();
  std::vector<std::vector<double>> gtab(comps.size());
  parallel_for(comps.size(), opt.threads, [&](std::size_t c) {
    const auto& u = comps[c].vars;
    const int k = static_cast<int>(u.size());
    const std::uint64_t G = ipow(n, k), T = ipow(m, k);
    auto& tab = gtab[c];
    tab.assign(G, 0.0);
    std::vector<int> node(k, 0), j(k, 1);
    for (std::uint64_t g = 0; g < G; ++g) {
      double acc = 0.0;
      std::fill(j.begin(), j.end(), 1);
      for (std::uint64_t t = 0; t < T; ++t) {
        double prod = comps[c].coeffs[t];
        for (int q = 0; q < k; ++q) prod *= psi[u[q]][node[q] * (m + 1) + j[q]];
        acc += prod;
        int q = k - 1;
        while (q >= 0 && j[q] == m) j[q--] = 1;
        if (q >= 0) ++j[q];
      }
      tab[g] = acc;
      int q = k - 1;
      while (q >= 0 && node[q] == n - 1) node[q--] = 0;
      if (q >= 0) ++node[q];
    }
  });

  // Restricted expectations per W.
  struct Local {
    std::vector<double> mom;   // k = 1..Q
    std::vector<double> spsi;  // per position p: [(k-1)*L + (l-1)]
  };
  std::vector<Local> local(Ws.size());
  parallel_for(Ws.size(), opt.threads, [&](std::size_t wi) {
    const auto& W = Ws[wi];
    const int w = static_cast<int>(W.size());
    struct Part {
      int comp;
      std::vector<int> pos;
    };
    std::vector<Part> parts;
    for (unsigned mask = 1; mask < (1u << w); ++mask) {
      if (std::popcount(mask) > S) continue;
      auto vars = subsets_mask_to_vars(W, mask);
      int c = s.component_index(vars);
      if (c < 0) continue;
      Part pt{c, {}};
      for (int p = 0; p < w; ++p)
        if (mask >> p & 1) pt.pos.push_back(p);
      parts.push_back(std::move(pt));
    }
    std::vector<int> tpos;
    for (int p = 0; p < w; ++p)
      if (is_target[W[p]]) tpos.push_back(p);
    auto& out = local[wi];
    out.mom.assign(Q, 0.0);
    out.spsi.assign(tpos.size() * Q * L, 0.0);
    std::vector<int> node(w, 0);
    std::vector<double> zk(Q);
    const std::uint64_t G = ipow(n, w);
    for (std::uint64_t g = 0; g < G; ++g) {
      double wt = 1.0;
      for (int p = 0; p < w; ++p) wt *= rules[W[p]].weights[node[p]];
      double z = 0.0;
      for (const auto& pt : parts) {
        std::uint64_t idx = 0;
        for (int p : pt.pos) idx = idx * n + node[p];
        z += gtab[pt.comp][idx];
      }
      double pw = wt;
      for (int k = 0; k < Q; ++k) {
        pw *= z;
        zk[k] = pw;
        out.mom[k] += pw;
      }
      for (std::size_t tp = 0; tp < tpos.size(); ++tp) {
        const int p = tpos[tp];
        const double* ps = psi_s[W[p]].data() + node[p] * (L + 1);
        double* dst = out.spsi.data() + tp * Q * L;
        for (int k = 0; k < Q; ++k)
          for (int l = 1; l <= L; ++l) dst[k * L + (l - 1)] += zk[k] * ps[l];
      }
      int p = w - 1;
      while (p >= 0 && node[p] == n - 1) node[p--] = 0;
      if (p >= 0) ++node[p];
    }
  });

  CenteredMoments res;
  res.EZ.assign(Q + 1, 0.0);
  res.EZ[0] = 1.0;
  for (int k = 1; k <= Q; ++k) {
    std::vector<double> terms;
    for (std::size_t wi = 0; wi < Ws.size(); ++wi) {
      double c = moebius_weight(N, Kmom(k), static_cast<int>(Ws[wi].size()));
      if (c != 0.0) terms.push_back(c * local[wi].mom[k - 1]);
    }
    res.EZ[k] = pairwise_sum(terms);
  }
  for (int i : targets) {
    std::vector<std::vector<double>> terms(static_cast<std::size_t>(Q) * L);
    for (std::size_t wi = 0; wi < Ws.size(); ++wi) {
      const auto& W = Ws[wi];
      int tp = 0;
      bool found = false;
      for (int v : W) {
        if (v == i) {
          found = true;
          break;
        }
        if (is_target[v]) ++tp;
      }
      if (!found) continue;
      const int w = static_cast<int>(W.size());
      for (int k = 1; k <= Q; ++k) {
        double c = moebius_weight(N, Ksens(k), w);
        if (c == 0.0) continue;
        for (int l = 1; l <= L; ++l)
          terms[(k - 1) * L + (l - 1)].push_back(c * local[wi].spsi[(tp * Q + (k - 1)) * L + (l - 1)]);
      }
    }
    auto& v = res.EZpsi[i];
    v.resize(terms.size());
    for (std::size_t q = 0; q < terms.size(); ++q) v[q] = pairwise_sum(terms[q]);
  }
  for (const auto& W : Ws) res.points += ipow(n, static_cast<int>(W.size()));
  return res;
}

}  // namespace

MomentReport compute_moments(const PddSurrogate& s, const std::vector<DesignBinding>& bindings,
                             const MomentOptions& opt) {
  const int Q = opt.Q;
  if (Q < 1) throw std::invalid_argument("moment order Q must be >= 1");
  MomentReport rep;
  for (const auto& b : bindings) rep.design_names.push_back(b.name);
  const std::size_t K = bindings.size();
  auto scores = build_score_expansions(bindings, s.inputs(), opt.m_prime, opt.score);

  rep.moments.push_back(s.mean());
  rep.sensitivities.push_back(mean_sensitivity(s, scores));
  rep.methods.push_back("analytic");
  if (Q >= 2) {
    rep.moments.push_back(s.second_moment());
    rep.sensitivities.push_back(second_moment_sensitivity(s, scores));
    rep.methods.push_back("analytic");
  }
  if (Q <= 2) return rep;

  if (opt.method == HigherMomentMethod::OptionI) {
    const int L = Q * s.m();
    std::set<int> tset;
    for (const auto& b : bindings)
      for (const auto& t : b.targets) tset.insert(t.variable);
    std::vector<int> targets(tset.begin(), tset.end());
    auto inner = build_score_expansions(bindings, s.inputs(), L, opt.score);
    auto cm = centered_moments(s, Q, targets, L, opt);
    rep.grid_points = cm.points;
    const double y0 = s.y_empty();
    for (int r = 3; r <= Q; ++r) {
      std::vector<double> terms;
      for (int k = 0; k <= r; ++k) terms.push_back(binomial(r, k) * std::pow(y0, r - k) * cm.EZ[k]);
      const double mr = pairwise_sum(terms);
      std::vector<double> sens(K);
      for (std::size_t b = 0; b < K; ++b) {
        std::vector<double> parts;
        for (const auto& t : inner[b].terms) {
          parts.push_back(t.s_empty * mr);
          const auto& ez = cm.EZpsi.at(t.variable);
          for (int l = 1; l <= L; ++l) {
            double e = 0.0;
            for (int k = 1; k <= r; ++k) e += binomial(r, k) * std::pow(y0, r - k) * ez[(k - 1) * L + (l - 1)];
            parts.push_back(t.D[l - 1] * e);
          }
        }
        sens[b] = pairwise_sum(parts);
      }
      rep.moments.push_back(mr);
      rep.sensitivities.push_back(std::move(sens));
      rep.methods.push_back("optionI");
    }
    return rep;
  }

  const int S_bar = opt.S_bar > 0 ? opt.S_bar : s.S();
  const int m_bar = opt.m_bar > 0 ? opt.m_bar : 2 * s.m();
  if (S_bar > s.N()) throw std::invalid_argument("S_bar must not exceed the number of inputs");
  const int outs = Q - 2;
  PerformanceModel powers("surrogate powers", s.N(), outs, [&s, outs](std::span<const double> x, std::span<double> y) {
    const double v = s.evaluate(x);
    double p = v * v;
    for (int q = 0; q < outs; ++q) y[q] = (p *= v);
  });
  PddOptions po;
  po.S = S_bar;
  po.m = m_bar;
  po.R = S_bar;
  po.n = m_bar + 1;
  po.reference = s.reference();
  po.threads = opt.threads;
  auto built = compute_coefficients(powers, s.inputs(), po);
  rep.grid_points = built.distinct_points;
  for (int r = 3; r <= Q; ++r) {
    const auto& z = built.surrogates[r - 3];
    rep.moments.push_back(z.y_empty());
    rep.sensitivities.push_back(mean_sensitivity(z, scores));
    rep.methods.push_back("optionII");
  }
  return rep;
}

double higher_moment(const PddSurrogate& s, int r, const MomentOptions& opt) {
  MomentOptions o = opt;
  o.Q = r;
  return compute_moments(s, {}, o).moments.at(r - 1);
}

std::vector<double> higher_moment_sensitivity(const PddSurrogate& s, int r,
                                              const std::vector<DesignBinding>& bindings,
                                              const MomentOptions& opt) {
  MomentOptions o = opt;
  o.Q = r;
  return compute_moments(s, bindings, o).sensitivities.at(r - 1);
}

std::string MomentReport::to_csv() const {
  CsvTable t({"order", "design", "value", "method"});
  for (std::size_t r = 0; r < moments.size(); ++r) {
    t.add_row({std::to_string(r + 1), "", format_double(moments[r]), methods[r]});
    for (std::size_t k = 0; k < design_names.size(); ++k)
      t.add_row({std::to_string(r + 1), design_names[k], format_double(sensitivities[r][k]), methods[r]});
  }
  return t.str();
}

nlohmann::json MomentReport::to_json() const {
  nlohmann::json j;
  j["design"] = design_names;
  j["grid_points"] = grid_points;
  for (std::size_t r = 0; r < moments.size(); ++r)
    j["moments"].push_back({{"order", r + 1},
                            {"value", moments[r]},
                            {"method", methods[r]},
                            {"sensitivities", sensitivities[r]}});
  return j;
}

}  // namespace pdduq
