#include "pdduq/pdd.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "pdduq/parallel.hpp"
#include "pdduq/special.hpp"

namespace pdduq {

namespace {

// Subsets of {0..N-1} of size k in lexicographic order.
std::vector<std::vector<int>> subsets_of_size(int N, int k) {
  std::vector<std::vector<int>> out;
  if (k > N) return out;
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

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

std::uint64_t bits_of(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  return b;
}

struct VecHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const {
    std::uint64_t h = 0x84222325CBF29CE4ull;
    for (auto x : v) h = (h ^ x) * 0x100000001B3ull + (h >> 29);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

std::vector<TermKey> enumerate_terms(int N, int S, int m) {
  if (S < 1 || S > N) throw std::invalid_argument("enumerate_terms: need 1 <= S <= N");
  if (m < 1) throw std::invalid_argument("enumerate_terms: need m >= 1");
  std::vector<TermKey> out;
  for (int k = 1; k <= S; ++k)
    for (const auto& u : subsets_of_size(N, k)) {
      std::vector<int> j(k, 1);
      for (;;) {
        out.push_back({u, j});
        int p = k - 1;
        while (p >= 0 && j[p] == m) j[p--] = 1;
        if (p < 0) break;
        ++j[p];
      }
    }
  return out;
}

std::uint64_t term_count(int N, int S, int m) {
  std::uint64_t c = 0;
  for (int k = 1; k <= S; ++k) c += static_cast<std::uint64_t>(binomial(N, k)) * ipow(m, k);
  return c;
}

std::uint64_t evaluation_bound(int N, int R, int n) {
  std::uint64_t c = 0;
  for (int k = 0; k <= R; ++k) {
    // subsets with a zero weight in the alternating sum are never visited
    if (binomial(N - k - 1, R - k) == 0.0) continue;
    c += static_cast<std::uint64_t>(binomial(N, k)) * ipow(n, k);
  }
  return c;
}

PddSurrogate::PddSurrogate(std::vector<Marginal> inputs, int S, int m, int R, int n,
                           std::vector<double> reference)
    : inputs_(std::move(inputs)), S_(S), m_(m), R_(R), n_(n), reference_(std::move(reference)) {
  const int N = static_cast<int>(inputs_.size());
  if (N < 1) throw std::invalid_argument("surrogate needs at least one input");
  if (S < 1 || S > N) throw std::invalid_argument("S must satisfy 1 <= S <= N");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (reference_.empty())
    for (const auto& mg : inputs_) reference_.push_back(mg.mean());
  if (static_cast<int>(reference_.size()) != N)
    throw std::invalid_argument("reference point has wrong dimension");
  int deg = std::max(m, n - 1);
  for (const auto& mg : inputs_) bases_.push_back(basis_table(mg, deg));
  for (int k = 1; k <= S; ++k)
    for (auto& u : subsets_of_size(N, k))
      components_.push_back({u, std::vector<double>(ipow(m, k), 0.0)});
  index_components();
}

void PddSurrogate::index_components() {
  index_.clear();
  for (std::size_t c = 0; c < components_.size(); ++c)
    index_.emplace(components_[c].vars, static_cast<int>(c));
}

int PddSurrogate::component_index(const std::vector<int>& vars) const {
  auto it = index_.find(vars);
  return it == index_.end() ? -1 : it->second;
}

namespace {
std::size_t degree_offset(const std::vector<int>& degrees, int m) {
  std::size_t off = 0;
  for (int j : degrees) {
    if (j < 1 || j > m) throw std::out_of_range("term degree outside 1..m");
    off = off * m + (j - 1);
  }
  return off;
}
}  // namespace

double PddSurrogate::coefficient(const TermKey& key) const {
  int c = component_index(key.vars);
  if (c < 0 || key.degrees.size() != key.vars.size()) return 0.0;
  for (int j : key.degrees)
    if (j < 1 || j > m_) return 0.0;
  return components_[c].coeffs[degree_offset(key.degrees, m_)];
}

void PddSurrogate::set_coefficient(const TermKey& key, double value) {
  int c = component_index(key.vars);
  if (c < 0 || key.degrees.size() != key.vars.size())
    throw std::out_of_range("term is outside the truncation");
  components_[c].coeffs[degree_offset(key.degrees, m_)] = value;
}

std::vector<std::pair<TermKey, double>> PddSurrogate::terms() const {
  std::vector<std::pair<TermKey, double>> out;
  for (const auto& comp : components_) {
    const int k = static_cast<int>(comp.vars.size());
    std::vector<int> j(k, 1);
    for (double c : comp.coeffs) {
      out.push_back({{comp.vars, j}, c});
      int p = k - 1;
      while (p >= 0 && j[p] == m_) j[p--] = 1;
      if (p >= 0) ++j[p];
    }
  }
  return out;
}

std::size_t PddSurrogate::term_count() const {
  std::size_t c = 0;
  for (const auto& comp : components_) c += comp.coeffs.size();
  return c;
}

void PddSurrogate::fill_psi(std::span<const double> x, double* psi) const {
  const int N = this->N();
  if (static_cast<int>(x.size()) != N) throw std::invalid_argument("evaluate: wrong dimension");
  for (int i = 0; i < N; ++i) bases_[i]->evaluate(x[i], m_, psi + i * (m_ + 1));
}

double PddSurrogate::evaluate_psi(const double* psi) const {
  const int st = m_ + 1;
  double total = y_empty_;
  for (const auto& comp : components_) {
    const double* c = comp.coeffs.data();
    const std::size_t k = comp.vars.size();
    if (k == 1) {
      const double* p = psi + comp.vars[0] * st + 1;
      double s = 0.0;
      for (int a = 0; a < m_; ++a) s += c[a] * p[a];
      total += s;
    } else if (k == 2) {
      const double* p = psi + comp.vars[0] * st + 1;
      const double* q = psi + comp.vars[1] * st + 1;
      double s = 0.0;
      for (int a = 0; a < m_; ++a) {
        double r = 0.0;
        for (int b = 0; b < m_; ++b) r += c[a * m_ + b] * q[b];
        s += p[a] * r;
      }
      total += s;
    } else {
      std::vector<int> j(k, 0);
      double s = 0.0;
      for (std::size_t idx = 0; idx < comp.coeffs.size(); ++idx) {
        double prod = c[idx];
        for (std::size_t p = 0; p < k; ++p) prod *= psi[comp.vars[p] * st + 1 + j[p]];
        s += prod;
        int p = static_cast<int>(k) - 1;
        while (p >= 0 && j[p] == m_ - 1) j[p--] = 0;
        if (p >= 0) ++j[p];
      }
      total += s;
    }
  }
  return total;
}

double PddSurrogate::evaluate(std::span<const double> x) const {
  thread_local std::vector<double> psi;
  psi.resize(static_cast<std::size_t>(N()) * (m_ + 1));
  fill_psi(x, psi.data());
  return evaluate_psi(psi.data());
}

double PddSurrogate::second_moment() const { return y_empty_ * y_empty_ + variance(); }

double PddSurrogate::variance() const {
  std::vector<double> sq;
  sq.reserve(term_count());
  for (const auto& comp : components_)
    for (double c : comp.coeffs) sq.push_back(c * c);
  return pairwise_sum(sq);
}

PddBuild compute_coefficients(const PerformanceModel& y, const std::vector<Marginal>& inputs,
                              const PddOptions& opt) {
  const int N = static_cast<int>(inputs.size());
  const int S = opt.S, m = opt.m;
  const int R = opt.R > 0 ? opt.R : S;
  const int n = opt.n > 0 ? opt.n : m + 1;
  if (y.dimension() != N)
    throw std::invalid_argument("model dimension " + std::to_string(y.dimension()) +
                                " does not match " + std::to_string(N) + " inputs");
  if (S < 1 || S > N) throw std::invalid_argument("S must satisfy 1 <= S <= N");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (R < S || R > N) throw std::invalid_argument("R must satisfy S <= R <= N");
  if (n < m + 1) throw std::invalid_argument("n must be >= m+1");
  const int K = y.outputs();

  PddBuild out;
  for (int o = 0; o < K; ++o) out.surrogates.emplace_back(inputs, S, m, R, n, opt.reference);
  const auto& proto = out.surrogates.front();
  const auto& c = proto.reference();

  // Univariate rules and basis values at their nodes.
  std::vector<GaussRule> rules(N);
  std::vector<std::vector<double>> psi(N);  // psi[i][k*(m+1)+j]
  std::vector<std::vector<std::uint64_t>> node_bits(N);
  for (int i = 0; i < N; ++i) {
    rules[i] = gauss_rule(proto.basis(i), n);
    psi[i].resize(static_cast<std::size_t>(n) * (m + 1));
    node_bits[i].resize(n);
    for (int k = 0; k < n; ++k) {
      proto.basis(i).evaluate(rules[i].nodes[k], m, psi[i].data() + k * (m + 1));
      node_bits[i][k] = bits_of(rules[i].nodes[k]);
    }
  }

  // Subsets with non-zero weight in the alternating sum.
  struct Subset {
    std::vector<int> vars;
    double weight;
    std::vector<std::uint32_t> points;
  };
  std::vector<Subset> subsets;
  for (int s = 0; s <= R; ++s) {
    double w = ((R - s) % 2 ? -1.0 : 1.0) * binomial(N - s - 1, R - s);
    if (w == 0.0) continue;
    for (auto& v : subsets_of_size(N, s)) subsets.push_back({v, w, {}});
  }

  // Distinct grid points, keyed by the coordinates that differ from c.
  std::unordered_map<std::vector<std::uint64_t>, std::uint32_t, VecHash> point_ids;
  std::vector<std::vector<std::pair<int, double>>> point_coords;
  for (auto& sub : subsets) {
    const int s = static_cast<int>(sub.vars.size());
    const std::uint64_t G = ipow(n, s);
    sub.points.resize(G);
    std::vector<int> k(s, 0);
    for (std::uint64_t g = 0; g < G; ++g) {
      std::vector<std::uint64_t> key;
      std::vector<std::pair<int, double>> coords;
      for (int p = 0; p < s; ++p) {
        int i = sub.vars[p];
        double x = rules[i].nodes[k[p]];
        if (node_bits[i][k[p]] != bits_of(c[i])) {
          key.push_back(static_cast<std::uint64_t>(i));
          key.push_back(node_bits[i][k[p]]);
          coords.emplace_back(i, x);
        }
      }
      auto [it, inserted] = point_ids.emplace(std::move(key), static_cast<std::uint32_t>(point_coords.size()));
      if (inserted) point_coords.push_back(std::move(coords));
      sub.points[g] = it->second;
      int p = s - 1;
      while (p >= 0 && k[p] == n - 1) k[p--] = 0;
      if (p >= 0) ++k[p];
    }
  }

  const std::size_t P = point_coords.size();
  std::vector<double> values(P * K);
  parallel_for(P, opt.threads, [&](std::size_t pid) {
    std::vector<double> x(c.begin(), c.end());
    for (auto [i, v] : point_coords[pid]) x[i] = v;
    y.evaluate(x, std::span<double>(values.data() + pid * K, K));
  });
  out.distinct_points = P;
  out.evaluation_bound = evaluation_bound(N, R, n);

  // Per-subset local integrals for every u subset of v with |u| <= S.
  // Layout of contrib[v]: per output, [y_empty, blocks of u in order].
  std::vector<std::vector<std::vector<int>>> sub_us(subsets.size());
  std::vector<std::vector<double>> contrib(subsets.size());
  parallel_for(subsets.size(), opt.threads, [&](std::size_t vi) {
    const auto& sub = subsets[vi];
    const int s = static_cast<int>(sub.vars.size());
    auto& us = sub_us[vi];  // masks as lists of positions within v
    for (int mask = 1; mask < (1 << s); ++mask) {
      if (__builtin_popcount(mask) > S) continue;
      std::vector<int> pos;
      for (int p = 0; p < s; ++p)
        if (mask >> p & 1) pos.push_back(p);
      us.push_back(pos);
    }
    std::sort(us.begin(), us.end(), [](const auto& a, const auto& b) {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    std::size_t block = 1;
    for (const auto& u : us) block += ipow(m, static_cast<int>(u.size()));
    auto& cv = contrib[vi];
    cv.assign(block * K, 0.0);
    const std::uint64_t G = sub.points.size();
    std::vector<int> k(s, 0);
    std::vector<int> j;
    for (std::uint64_t g = 0; g < G; ++g) {
      double w = 1.0;
      for (int p = 0; p < s; ++p) w *= rules[sub.vars[p]].weights[k[p]];
      const double* yv = values.data() + static_cast<std::size_t>(sub.points[g]) * K;
      for (int o = 0; o < K; ++o) {
        double wy = w * yv[o];
        double* dst = cv.data() + o * block;
        dst[0] += wy;
        std::size_t off = 1;
        for (const auto& u : us) {
          const int ku = static_cast<int>(u.size());
          j.assign(ku, 1);
          const std::uint64_t T = ipow(m, ku);
          for (std::uint64_t t = 0; t < T; ++t) {
            double prod = wy;
            for (int q = 0; q < ku; ++q) {
              int p = u[q];
              prod *= psi[sub.vars[p]][k[p] * (m + 1) + j[q]];
            }
            dst[off + t] += prod;
            int q = ku - 1;
            while (q >= 0 && j[q] == m) j[q--] = 1;
            if (q >= 0) ++j[q];
          }
          off += T;
        }
      }
      int p = s - 1;
      while (p >= 0 && k[p] == n - 1) k[p--] = 0;
      if (p >= 0) ++k[p];
    }
  });

  // Deterministic reduction: for each component, gather weighted subset
  // contributions in subset order and sum pairwise.
  const auto& comps = proto.components();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> sources(comps.size());
  std::vector<double> yempty_terms;
  std::vector<std::vector<double>> y0(K);
  for (std::size_t vi = 0; vi < subsets.size(); ++vi) {
    const auto& sub = subsets[vi];
    std::size_t off = 1;
    for (const auto& u : sub_us[vi]) {
      std::vector<int> vars;
      for (int p : u) vars.push_back(sub.vars[p]);
      int ci = proto.component_index(vars);
      sources[ci].emplace_back(vi, off);
      off += ipow(m, static_cast<int>(u.size()));
    }
  }
  for (int o = 0; o < K; ++o) {
    std::vector<double> tmp;
    for (std::size_t vi = 0; vi < subsets.size(); ++vi) {
      std::size_t block = contrib[vi].size() / K;
      tmp.push_back(subsets[vi].weight * contrib[vi][o * block]);
    }
    out.surrogates[o].set_y_empty(pairwise_sum(tmp));
  }
  parallel_for(comps.size(), opt.threads, [&](std::size_t ci) {
    std::vector<double> tmp;
    const std::size_t T = comps[ci].coeffs.size();
    for (int o = 0; o < K; ++o) {
      auto& dst = out.surrogates[o].components()[ci].coeffs;
      for (std::size_t t = 0; t < T; ++t) {
        tmp.clear();
        for (auto [vi, off] : sources[ci]) {
          std::size_t block = contrib[vi].size() / K;
          tmp.push_back(subsets[vi].weight * contrib[vi][o * block + off + t]);
        }
        dst[t] = pairwise_sum(tmp);
      }
    }
  });
  return out;
}

nlohmann::json marginal_to_json(const Marginal& mg) {
  const auto& p = mg.params();
  nlohmann::json j;
  j["kind"] = to_string(mg.kind());
  switch (mg.kind()) {
    case MarginalKind::Gaussian:
    case MarginalKind::Lognormal:
      j["mean"] = p[0];
      j["stdev"] = p[1];
      break;
    case MarginalKind::Exponential:
      j["rate"] = p[0];
      break;
    case MarginalKind::TruncatedGaussian:
      j["mean"] = p[0];
      j["stdev"] = p[1];
      j["half_width"] = p[2];
      break;
    case MarginalKind::Weibull:
      j["scale"] = p[0];
      j["shape"] = p[1];
      break;
    case MarginalKind::Uniform:
      j["lower"] = p[0];
      j["upper"] = p[1];
      break;
  }
  return j;
}

Marginal marginal_from_json(const nlohmann::json& j) {
  auto kind = marginal_kind_from_string(j.at("kind").get<std::string>());
  auto num = [&](const char* k) { return j.at(k).get<double>(); };
  switch (kind) {
    case MarginalKind::Gaussian: return Marginal::gaussian(num("mean"), num("stdev"));
    case MarginalKind::Lognormal: return Marginal::lognormal(num("mean"), num("stdev"));
    case MarginalKind::Exponential: return Marginal::exponential(num("rate"));
    case MarginalKind::TruncatedGaussian:
      return Marginal::truncated_gaussian(num("mean"), num("stdev"), num("half_width"));
    case MarginalKind::Weibull: return Marginal::weibull(num("scale"), num("shape"));
    case MarginalKind::Uniform: return Marginal::uniform(num("lower"), num("upper"));
  }
  throw std::invalid_argument("unknown marginal kind");
}

nlohmann::json surrogate_to_json(const PddSurrogate& s) {
  nlohmann::json j;
  j["format"] = "pdduq-surrogate";
  j["version"] = 1;
  j["S"] = s.S();
  j["m"] = s.m();
  j["R"] = s.R();
  j["n"] = s.n();
  j["inputs"] = nlohmann::json::array();
  for (const auto& mg : s.inputs()) j["inputs"].push_back(marginal_to_json(mg));
  j["reference"] = s.reference();
  j["y_empty"] = s.y_empty();
  auto& terms = j["terms"] = nlohmann::json::array();
  for (const auto& [key, c] : s.terms()) {
    if (c == 0.0 && !std::signbit(c)) continue;
    std::vector<int> u;
    for (int v : key.vars) u.push_back(v + 1);
    terms.push_back({{"u", u}, {"j", key.degrees}, {"c", c}});
  }
  return j;
}

PddSurrogate surrogate_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "pdduq-surrogate")
    throw std::invalid_argument("not a surrogate document");
  if (j.value("version", 0) != 1) throw std::invalid_argument("unsupported surrogate version");
  std::vector<Marginal> inputs;
  for (const auto& mj : j.at("inputs")) inputs.push_back(marginal_from_json(mj));
  PddSurrogate s(inputs, j.at("S").get<int>(), j.at("m").get<int>(), j.at("R").get<int>(),
                 j.at("n").get<int>(), j.at("reference").get<std::vector<double>>());
  s.set_y_empty(j.at("y_empty").get<double>());
  for (const auto& t : j.at("terms")) {
    TermKey key;
    for (int v : t.at("u").get<std::vector<int>>()) key.vars.push_back(v - 1);
    key.degrees = t.at("j").get<std::vector<int>>();
    s.set_coefficient(key, t.at("c").get<double>());
  }
  return s;
}

}  // namespace pdduq
