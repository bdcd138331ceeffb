#include "pdduq/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "pdduq/parallel.hpp"
#include "pdduq/random.hpp"
#include "pdduq/report.hpp"
#include "pdduq/special.hpp"

namespace pdduq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kBlock = 4096;

}  // namespace

// ---------------------------------------------------------------- CGF

double CgfModel::K(double t) const {
  const auto& k = kappa;
  return t * (k[0] + t * (k[1] / 2.0 + t * (k[2] / 6.0 + t * k[3] / 24.0)));
}
double CgfModel::K1(double t) const {
  const auto& k = kappa;
  return k[0] + t * (k[1] + t * (k[2] / 2.0 + t * k[3] / 6.0));
}
double CgfModel::K2(double t) const {
  const auto& k = kappa;
  return k[1] + t * (k[2] + t * k[3] / 2.0);
}
double CgfModel::K3(double t) const { return kappa[2] + t * kappa[3]; }

std::vector<double> cumulants_from_moments(const std::vector<double>& m) {
  const int Q = static_cast<int>(m.size());
  if (Q < 2) throw std::invalid_argument("cumulants need moments of order 1 and 2");
  std::vector<double> k(Q);
  for (int r = 1; r <= Q; ++r) {
    double v = m[r - 1];
    for (int p = 1; p < r; ++p) v -= binomial(r - 1, p - 1) * k[p - 1] * m[r - p - 1];
    k[r - 1] = v;
  }
  if (!(k[1] > 0.0)) throw std::domain_error("degenerate response variance");
  return k;
}

std::vector<std::vector<double>> cumulant_sensitivities(const std::vector<double>& m,
                                                         const std::vector<double>& kappa,
                                                         const std::vector<std::vector<double>>& dm) {
  const int Q = static_cast<int>(m.size());
  if (static_cast<int>(kappa.size()) != Q || static_cast<int>(dm.size()) != Q)
    throw std::invalid_argument("cumulant_sensitivities: order mismatch");
  const std::size_t K = dm[0].size();
  std::vector<std::vector<double>> dk(Q, std::vector<double>(K, 0.0));
  for (std::size_t d = 0; d < K; ++d) {
    for (int r = 1; r <= Q; ++r) {
      if (dm[r - 1].size() != K) throw std::invalid_argument("cumulant_sensitivities: design mismatch");
      double v = dm[r - 1][d];
      for (int p = 1; p < r; ++p)
        v -= binomial(r - 1, p - 1) * (dk[p - 1][d] * m[r - p - 1] + kappa[p - 1] * dm[r - p - 1][d]);
      dk[r - 1][d] = v;
    }
  }
  return dk;
}

CgfModel make_cgf(const std::vector<double>& kappa) {
  const int Q = static_cast<int>(kappa.size());
  if (Q > 4)
    throw std::invalid_argument("Q > 4 is not supported: no admissible saddlepoint interval is available "
                                "for cumulant generating functions truncated beyond fourth order");
  if (Q < 2) throw std::invalid_argument("Q must be at least 2");
  if (!(kappa[1] > 0.0)) throw std::domain_error("degenerate response variance");
  CgfModel c;
  c.Q = Q;
  for (int r = 0; r < Q; ++r) c.kappa[r] = kappa[r];
  return c;
}

SaddlepointBracket saddlepoint_bracket(const CgfModel& c) {
  const double k2 = c.kappa[1], k3 = c.kappa[2], k4 = c.kappa[3];
  SaddlepointBracket b;
  const double delta = k3 * k3 - 2.0 * k2 * k4;
  // Roots of K'' written to avoid cancellation when one of them is large.
  if (k4 > 0.0) {
    if (delta > 0.0) {
      const double sd = std::sqrt(delta);
      if (k3 > 0.0) {
        b = {-2.0 * k2 / (k3 + sd), kInf, 1, std::nullopt};
      } else {
        b = {-kInf, -2.0 * k2 / (k3 - sd), 2, std::nullopt};
      }
    } else if (delta == 0.0) {
      b = {-kInf, kInf, 3, -k3 / k4};
    } else {
      b = {-kInf, kInf, 4, std::nullopt};
    }
  } else if (k4 == 0.0) {
    if (k3 > 0.0)
      b = {-k2 / k3, kInf, 5, std::nullopt};
    else if (k3 == 0.0)
      b = {-kInf, kInf, 6, std::nullopt};
    else
      b = {-kInf, -k2 / k3, 7, std::nullopt};
  } else {
    const double sd = std::sqrt(delta);
    if (k3 >= 0.0) {
      b = {-2.0 * k2 / (k3 + sd), (-k3 - sd) / k4, 8, std::nullopt};
    } else {
      b = {(-k3 + sd) / k4, -2.0 * k2 / (k3 - sd), 8, std::nullopt};
    }
  }
  return b;
}

SaddlepointInfeasible::SaddlepointInfeasible(double x, double lo, double hi)
    : std::domain_error([&] {
        std::ostringstream os;
        os.precision(17);
        os << "saddlepoint infeasible: xi = " << x << " outside attainable range (" << lo << ", " << hi << ")";
        return os.str();
      }()),
      xi(x),
      attainable_lo(lo),
      attainable_hi(hi) {}

namespace {

double attainable(const CgfModel& c, double t) {
  if (t == kInf) return kInf;
  if (t == -kInf) return -kInf;
  return c.K1(t);
}

// K'(t) - xi with the constant term combined first.
double score_eq(const CgfModel& c, double t, double xi) {
  const auto& k = c.kappa;
  return (k[0] - xi) + t * (k[1] + t * (k[2] / 2.0 + t * k[3] / 6.0));
}

}  // namespace

double solve_saddlepoint(const CgfModel& c, const SaddlepointBracket& b, double xi) {
  const double lo_v = attainable(c, b.t_l), hi_v = attainable(c, b.t_u);
  if (!(xi > lo_v && xi < hi_v) || !std::isfinite(xi)) throw SaddlepointInfeasible(xi, lo_v, hi_v);
  const double tol = 1e-12 * (1.0 + std::abs(xi));
  double f0 = score_eq(c, 0.0, xi);
  if (f0 == 0.0) return 0.0;
  double lo, hi;
  if (f0 < 0.0) {
    lo = 0.0;
    if (std::isfinite(b.t_u)) {
      hi = b.t_u;
    } else {
      hi = 1.0 / std::sqrt(c.kappa[1]);
      while (score_eq(c, hi, xi) < 0.0) {
        lo = hi;
        hi *= 2.0;
      }
    }
  } else {
    hi = 0.0;
    if (std::isfinite(b.t_l)) {
      lo = b.t_l;
    } else {
      lo = -1.0 / std::sqrt(c.kappa[1]);
      while (score_eq(c, lo, xi) > 0.0) {
        hi = lo;
        lo *= 2.0;
      }
    }
  }
  // Safeguarded Newton: f is increasing on the bracket.
  double t = 0.5 * (lo + hi);
  if (f0 != 0.0) {
    const double tn = -f0 / c.K2(0.0);
    if (tn > lo && tn < hi) t = tn;
  }
  for (int it = 0; it < 500; ++it) {
    const double f = score_eq(c, t, xi);
    if (std::abs(f) <= tol) return t;
    if (f < 0.0)
      lo = t;
    else
      hi = t;
    const double d = c.K2(t);
    double tn = (d > 0.0) ? t - f / d : kNaN;
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    if (tn == t || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
      return tn;
    t = tn;
  }
  return t;
}

double spa_limit_threshold(const CgfModel& c) { return 1e-5 * std::max(1.0, 1.0 / std::sqrt(c.kappa[1])); }

SpaPoint spa_evaluate(const CgfModel& c, double xi) {
  SpaPoint p;
  p.xi = xi;
  const auto b = saddlepoint_bracket(c);
  const double t = solve_saddlepoint(c, b, xi);
  p.t_s = t;
  const double k2 = c.kappa[1], k3 = c.kappa[2], k4 = c.kappa[3];
  const double kpp = c.K2(t);
  // With K'(t) = xi substituted: 2(t xi - K) = t^2 (k2 + 2 k3 t / 3 + k4 t^2 / 4).
  const double w2_over_t2 = k2 + t * (2.0 * k3 / 3.0 + t * k4 / 4.0);
  if (!(w2_over_t2 >= 0.0) || !(kpp > 0.0))
    throw std::domain_error("saddlepoint approximation: cumulant generating function not convex at saddlepoint");
  p.pdf = std::exp(-0.5 * t * t * w2_over_t2) / std::sqrt(2.0 * M_PI * kpp);
  const double sq = std::sqrt(kpp);
  p.v = t * sq;
  p.w = t * std::sqrt(w2_over_t2);  // sgn(t) |t| sqrt(.)
  if (std::abs(t) < spa_limit_threshold(c)) {
    p.limit_branch = true;
    const double f0 = 0.5 + k3 / (6.0 * std::sqrt(2.0 * M_PI) * std::pow(k2, 1.5));
    p.cdf = f0 + (xi - c.kappa[0]) * p.pdf;
    return p;
  }
  // 1/w - 1/v = (v^2 - w^2) / (w v (w + v)) with v^2 - w^2 = t^3 (k3/3 + k4 t/4).
  const double diff = t * t * t * (k3 / 3.0 + k4 * t / 4.0) / (p.w * p.v * (p.w + p.v));
  p.cdf = normal_cdf(p.w) + normal_pdf(p.w) * diff;
  return p;
}

double spa_pdf(const CgfModel& c, double xi) { return spa_evaluate(c, xi).pdf; }
double spa_cdf(const CgfModel& c, double xi) { return spa_evaluate(c, xi).cdf; }
double spa_failure_probability(const CgfModel& c) { return spa_cdf(c, 0.0); }

namespace {

// Chain rule at a saddlepoint outside the limit window.
std::vector<double> lr_sensitivity(const CgfModel& c, const std::vector<std::vector<double>>& dk, double xi) {
  const SpaPoint p = spa_evaluate(c, xi);
  const double t = p.t_s, w = p.w, v = p.v;
  const double kpp = c.K2(t), kppp = c.K3(t), sq = std::sqrt(kpp);
  const double phi = normal_pdf(w);
  const double dF_dw = phi * (w / v - 1.0 / (w * w));
  const double dF_dv = phi / (v * v);
  const std::size_t K = dk.empty() ? 0 : dk[0].size();
  std::vector<double> out(K, 0.0);
  for (int r = 1; r <= c.Q; ++r) {
    const double dK = std::pow(t, r) / factorial(r);
    const double dK1 = std::pow(t, r - 1) / factorial(r - 1);
    const double dK2 = r >= 2 ? std::pow(t, r - 2) / factorial(r - 2) : 0.0;
    const double dt = -dK1 / kpp;
    // d/dkappa of w = sgn(t) sqrt(2 (t xi - K)) with xi fixed.
    const double dw = (xi * dt - (dK + c.K1(t) * dt)) / w;
    const double dv = sq * dt + t / (2.0 * sq) * (dK2 + kppp * dt);
    const double dF = dF_dw * dw + dF_dv * dv;
    for (std::size_t d = 0; d < K; ++d) out[d] += dF * dk[r - 1][d];
  }
  return out;
}

}  // namespace

std::vector<double> spa_cdf_sensitivity(const CgfModel& c, const std::vector<std::vector<double>>& dk, double xi) {
  if (static_cast<int>(dk.size()) < c.Q) throw std::invalid_argument("spa_cdf_sensitivity: need Q cumulant rows");
  const SpaPoint p = spa_evaluate(c, xi);
  if (!p.limit_branch) return lr_sensitivity(c, dk, xi);
  // Quadratic extrapolation from three one-sided offsets outside the window.
  const double h = 1e-2 * std::sqrt(c.kappa[1]);
  for (double sgn : {1.0, -1.0}) {
    try {
      const auto s1 = lr_sensitivity(c, dk, xi + sgn * h);
      const auto s2 = lr_sensitivity(c, dk, xi + sgn * 2.0 * h);
      const auto s3 = lr_sensitivity(c, dk, xi + sgn * 3.0 * h);
      std::vector<double> out(s1.size());
      for (std::size_t d = 0; d < out.size(); ++d) out[d] = 3.0 * s1[d] - 3.0 * s2[d] + s3[d];
      return out;
    } catch (const SaddlepointInfeasible&) {
    }
  }
  throw std::domain_error("spa_cdf_sensitivity: no feasible offsets around the limit window");
}

// ---------------------------------------------------------------- reports

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Component: return "component";
    case EventKind::Series: return "series";
    case EventKind::Parallel: return "parallel";
  }
  return "?";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "component") return EventKind::Component;
  if (s == "series") return EventKind::Series;
  if (s == "parallel") return EventKind::Parallel;
  throw std::invalid_argument("unknown event kind '" + s + "' (expected component, series or parallel)");
}

std::string ReliabilityReport::to_csv() const {
  CsvTable t({"quantity", "design", "value", "standard_error", "method"});
  t.add_row({"p_f", "", format_double(p_f), format_double(p_f_se), method});
  for (std::size_t k = 0; k < sensitivities.size(); ++k)
    t.add_row({"sensitivity", design_names[k], format_double(sensitivities[k]),
               sensitivity_se.empty() ? "" : format_double(sensitivity_se[k]), method});
  return t.str();
}

nlohmann::json ReliabilityReport::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  j["p_f"] = p_f;
  if (method != "PDD-SPA") j["p_f_standard_error"] = p_f_se;
  j["samples"] = samples;
  j["model_evaluations"] = model_evaluations;
  j["sensitivities"] = nlohmann::json::array();
  for (std::size_t k = 0; k < sensitivities.size(); ++k) {
    nlohmann::json s{{"design", design_names[k]}, {"value", sensitivities[k]}};
    if (!sensitivity_se.empty()) s["standard_error"] = sensitivity_se[k];
    j["sensitivities"].push_back(s);
  }
  j["diagnostics"] = diagnostics;
  return j;
}

std::string CdfReport::to_csv() const {
  std::vector<std::string> h{"xi", "cdf", "se"};
  for (const auto& n : design_names) h.push_back(n);
  CsvTable t(h);
  for (std::size_t g = 0; g < xi.size(); ++g) {
    std::vector<std::string> row{format_double(xi[g]), format_double(cdf[g]), format_double(se[g])};
    for (std::size_t k = 0; k < design_names.size(); ++k) row.push_back(format_double(sensitivities[g][k]));
    t.add_row(row);
  }
  return t.str();
}

nlohmann::json CdfReport::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  j["samples"] = samples;
  j["design"] = design_names;
  j["xi"] = xi;
  j["cdf"] = cdf;
  j["se"] = se;
  j["sensitivities"] = sensitivities;
  return j;
}

// ---------------------------------------------------------------- PDD-SPA

ReliabilityReport spa_reliability(const MomentReport& mr, double xi) {
  const auto kappa = cumulants_from_moments(mr.moments);
  const CgfModel c = make_cgf(kappa);
  const auto b = saddlepoint_bracket(c);
  ReliabilityReport rep;
  rep.method = "PDD-SPA";
  rep.design_names = mr.design_names;
  auto& dg = rep.diagnostics;
  dg["moments"] = mr.moments;
  dg["cumulants"] = kappa;
  dg["bracket"] = {{"case", b.case_id},
                   {"t_l", std::isfinite(b.t_l) ? nlohmann::json(b.t_l) : nlohmann::json("-inf")},
                   {"t_u", std::isfinite(b.t_u) ? nlohmann::json(b.t_u) : nlohmann::json("inf")}};
  if (b.excluded_point) dg["bracket"]["excluded_point"] = *b.excluded_point;
  dg["xi"] = xi;
  const SpaPoint p = spa_evaluate(c, xi);
  dg["saddlepoint"] = p.t_s;
  dg["w"] = p.w;
  dg["v"] = p.v;
  dg["limit_branch"] = p.limit_branch;
  dg["grid_points"] = mr.grid_points;
  rep.p_f = p.cdf;
  if (p.cdf < 0.0 || p.cdf > 1.0) {
    dg["cdf_unclamped"] = p.cdf;
    rep.p_f = std::clamp(p.cdf, 0.0, 1.0);
  }
  if (!mr.design_names.empty()) {
    const auto dk = cumulant_sensitivities(mr.moments, kappa, mr.sensitivities);
    rep.sensitivities = spa_cdf_sensitivity(c, dk, xi);
    dg["cumulant_sensitivities"] = dk;
  }
  return rep;
}

ReliabilityReport spa_reliability(const PddSurrogate& s, const std::vector<DesignBinding>& bindings,
                                  const MomentOptions& mopt, double xi) {
  if (mopt.Q > 4 || mopt.Q < 2) make_cgf(std::vector<double>(mopt.Q, 1.0));
  return spa_reliability(compute_moments(s, bindings, mopt), xi);
}

ReliabilityReport spa_reliability(const EventSpec& e, const std::vector<PddSurrogate>& s,
                                  const std::vector<DesignBinding>& bindings, const MomentOptions& mopt,
                                  double xi) {
  if (e.kind != EventKind::Component || e.outputs.size() > 1)
    throw std::invalid_argument(
        "PDD-SPA handles component events only; the saddlepoint approximation cannot be applied to "
        "series or parallel systems, use PDD-MCS");
  const int idx = e.outputs.empty() ? 0 : e.outputs[0];
  if (idx < 0 || idx >= static_cast<int>(s.size())) throw std::invalid_argument("event output index out of range");
  return spa_reliability(s[idx], bindings, mopt, xi);
}

CdfReport spa_cdf_curve(const MomentReport& mr, const std::vector<double>& xi) {
  const auto kappa = cumulants_from_moments(mr.moments);
  const CgfModel c = make_cgf(kappa);
  CdfReport r;
  r.method = "PDD-SPA";
  r.design_names = mr.design_names;
  std::vector<std::vector<double>> dk;
  if (!mr.design_names.empty()) dk = cumulant_sensitivities(mr.moments, kappa, mr.sensitivities);
  for (double x : xi) {
    r.xi.push_back(x);
    r.se.push_back(kNaN);
    try {
      r.cdf.push_back(spa_cdf(c, x));
      r.sensitivities.push_back(dk.empty() ? std::vector<double>{} : spa_cdf_sensitivity(c, dk, x));
    } catch (const SaddlepointInfeasible&) {
      r.cdf.push_back(kNaN);
      r.sensitivities.push_back(std::vector<double>(mr.design_names.size(), kNaN));
    }
  }
  return r;
}

// ---------------------------------------------------------------- MCS engine

namespace {

// Per-sample kernel: given uniforms u and inputs x, writes G values.
using SampleFn = std::function<void(const double* u, const double* x, double* v)>;
using KernelFactory = std::function<SampleFn()>;

struct Tally {
  std::vector<double> sum, sumsq;     // [g]
  std::vector<double> wsum, wsumsq;   // [g*K + k], value times score
};

Tally run_mcs(const std::vector<Marginal>& inputs, const std::vector<DesignBinding>& bindings,
              const McsOptions& opt, int G, bool with_scores, const KernelFactory& factory) {
  if (opt.samples < 1) throw std::invalid_argument("MCS needs at least one sample");
  for (const auto& b : bindings) validate_binding(b, inputs);
  const int N = static_cast<int>(inputs.size());
  const int K = with_scores ? static_cast<int>(bindings.size()) : 0;
  const std::uint64_t L = opt.samples;
  const std::size_t blocks = static_cast<std::size_t>((L + kBlock - 1) / kBlock);
  std::vector<Tally> part(blocks);
  parallel_for(blocks, resolve_threads(opt.threads), [&](std::size_t blk) {
    Tally t;
    t.sum.assign(G, 0.0);
    t.sumsq.assign(G, 0.0);
    t.wsum.assign(static_cast<std::size_t>(G) * K, 0.0);
    t.wsumsq.assign(static_cast<std::size_t>(G) * K, 0.0);
    std::vector<double> u(N), x(N), v(G), sc(K);
    const SampleFn fn = factory();
    const std::uint64_t begin = blk * kBlock, end = std::min(L, begin + kBlock);
    for (std::uint64_t l = begin; l < end; ++l) {
      SampleStream st(opt.seed, l);
      for (int i = 0; i < N; ++i) {
        u[i] = st.uniform();
        x[i] = inputs[i].quantile(u[i]);
      }
      fn(u.data(), x.data(), v.data());
      bool any = false;
      for (int g = 0; g < G; ++g) {
        t.sum[g] += v[g];
        t.sumsq[g] += v[g] * v[g];
        any = any || v[g] != 0.0;
      }
      if (K == 0 || !any) continue;
      for (int k = 0; k < K; ++k) sc[k] = joint_score(bindings[k], inputs, x.data(), opt.score);
      for (int g = 0; g < G; ++g) {
        if (v[g] == 0.0) continue;
        for (int k = 0; k < K; ++k) {
          const double q = v[g] * sc[k];
          t.wsum[g * K + k] += q;
          t.wsumsq[g * K + k] += q * q;
        }
      }
    }
    part[blk] = std::move(t);
  });
  Tally tot = std::move(part[0]);
  for (std::size_t b = 1; b < blocks; ++b) {
    for (int g = 0; g < G; ++g) {
      tot.sum[g] += part[b].sum[g];
      tot.sumsq[g] += part[b].sumsq[g];
    }
    for (std::size_t i = 0; i < tot.wsum.size(); ++i) {
      tot.wsum[i] += part[b].wsum[i];
      tot.wsumsq[i] += part[b].wsumsq[i];
    }
  }
  return tot;
}

double mean_se(double sum, double sumsq, std::uint64_t L) {
  if (L < 2) return 0.0;
  const double n = static_cast<double>(L);
  const double mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
  return std::sqrt(var / n);
}

double bernoulli_se(double p, std::uint64_t L) { return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(L)); }

// Indices of responses the event reads.
std::vector<int> event_outputs(const EventSpec& e, int available) {
  std::vector<int> out = e.outputs;
  if (out.empty()) {
    if (e.kind == EventKind::Component) {
      if (available < 1) throw std::invalid_argument("event needs at least one response");
      out = {0};
    } else {
      for (int i = 0; i < available; ++i) out.push_back(i);
    }
  }
  if (e.kind == EventKind::Component && out.size() != 1)
    throw std::invalid_argument("component event must reference exactly one response");
  for (int o : out)
    if (o < 0 || o >= available) throw std::invalid_argument("event response index out of range");
  return out;
}

bool event_occurs(EventKind kind, const double* y, const std::vector<int>& outs) {
  if (kind == EventKind::Parallel) {
    for (int o : outs)
      if (!(y[o] < 0.0)) return false;
    return true;
  }
  for (int o : outs)
    if (y[o] < 0.0) return true;
  return false;
}

std::vector<std::string> names_of(const std::vector<DesignBinding>& b) {
  std::vector<std::string> n;
  for (const auto& d : b) n.push_back(d.name);
  return n;
}

void check_shared_inputs(const std::vector<PddSurrogate>& s) {
  if (s.empty()) throw std::invalid_argument("PDD-MCS needs at least one surrogate");
  for (const auto& x : s)
    if (!(x.inputs() == s[0].inputs())) throw std::invalid_argument("surrogates must share the same inputs");
}

ReliabilityReport pf_report(const std::string& method, const Tally& t, const std::vector<DesignBinding>& b,
                            std::uint64_t L) {
  ReliabilityReport r;
  r.method = method;
  r.samples = L;
  r.design_names = names_of(b);
  r.p_f = t.sum[0] / static_cast<double>(L);
  r.p_f_se = bernoulli_se(r.p_f, L);
  const std::size_t K = b.size();
  for (std::size_t k = 0; k < K; ++k) {
    r.sensitivities.push_back(t.wsum[k] / static_cast<double>(L));
    r.sensitivity_se.push_back(mean_se(t.wsum[k], t.wsumsq[k], L));
  }
  r.diagnostics["samples"] = L;
  r.diagnostics["block_size"] = kBlock;
  return r;
}

}  // namespace

ReliabilityReport mcs_failure_probability(const EventSpec& e, const std::vector<PddSurrogate>& s,
                                          const std::vector<DesignBinding>& bindings, const McsOptions& opt) {
  check_shared_inputs(s);
  const auto outs = event_outputs(e, static_cast<int>(s.size()));
  const int N = s[0].N();
  auto factory = [&]() -> SampleFn {
    auto psi = std::make_shared<std::vector<double>>(static_cast<std::size_t>(N) * (s[0].m() + 1));
    auto y = std::make_shared<std::vector<double>>(s.size(), 0.0);
    return [&, psi, y](const double*, const double* x, double* v) {
      for (int o : outs) {
        const auto& sg = s[o];
        psi->resize(static_cast<std::size_t>(N) * (sg.m() + 1));
        sg.fill_psi(std::span<const double>(x, N), psi->data());
        (*y)[o] = sg.evaluate_psi(psi->data());
      }
      v[0] = event_occurs(e.kind, y->data(), outs) ? 1.0 : 0.0;
    };
  };
  const Tally t = run_mcs(s[0].inputs(), bindings, opt, 1, true, factory);
  auto r = pf_report("PDD-MCS", t, bindings, opt.samples);
  r.diagnostics["event"] = to_string(e.kind);
  return r;
}

std::vector<double> mcs_sensitivity(const EventSpec& e, const std::vector<PddSurrogate>& s,
                                    const std::vector<DesignBinding>& bindings, const McsOptions& opt) {
  return mcs_failure_probability(e, s, bindings, opt).sensitivities;
}

ReliabilityReport crude_mcs_sf(const EventSpec& e, const PerformanceModel& y, const std::vector<Marginal>& inputs,
                               const std::vector<DesignBinding>& bindings, const McsOptions& opt) {
  if (y.dimension() != static_cast<int>(inputs.size()))
    throw std::invalid_argument("model dimension does not match inputs");
  const auto outs = event_outputs(e, y.outputs());
  const int N = y.dimension();
  const std::uint64_t before = y.evaluations();
  auto factory = [&]() -> SampleFn {
    auto out = std::make_shared<std::vector<double>>(y.outputs());
    return [&, out](const double*, const double* x, double* v) {
      y.evaluate(std::span<const double>(x, N), *out);
      v[0] = event_occurs(e.kind, out->data(), outs) ? 1.0 : 0.0;
    };
  };
  const Tally t = run_mcs(inputs, bindings, opt, 1, true, factory);
  auto r = pf_report("crude MCS/SF", t, bindings, opt.samples);
  r.model_evaluations = y.evaluations() - before;
  r.diagnostics["event"] = to_string(e.kind);
  return r;
}

ReliabilityReport crude_mcs_fd(const EventSpec& e, const PerformanceModel& y, const std::vector<Marginal>& inputs,
                               const std::vector<DesignBinding>& bindings, const McsOptions& opt,
                               double relative_step) {
  if (y.dimension() != static_cast<int>(inputs.size()))
    throw std::invalid_argument("model dimension does not match inputs");
  if (!(relative_step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const auto outs = event_outputs(e, y.outputs());
  const int N = y.dimension();
  const int K = static_cast<int>(bindings.size());
  for (const auto& b : bindings) validate_binding(b, inputs);
  std::vector<std::vector<Marginal>> pert;
  std::vector<double> steps;
  for (const auto& b : bindings) {
    const double d = design_value(b, inputs);
    const double h = relative_step * (d != 0.0 ? std::abs(d) : 1.0);
    pert.push_back(perturb_design(b, inputs, d + h));
    steps.push_back(h);
  }
  const std::uint64_t before = y.evaluations();
  auto factory = [&]() -> SampleFn {
    auto out = std::make_shared<std::vector<double>>(y.outputs());
    auto xp = std::make_shared<std::vector<double>>(N);
    return [&, out, xp](const double* u, const double* x, double* v) {
      y.evaluate(std::span<const double>(x, N), *out);
      const double i0 = event_occurs(e.kind, out->data(), outs) ? 1.0 : 0.0;
      v[0] = i0;
      for (int k = 0; k < K; ++k) {
        for (int i = 0; i < N; ++i) (*xp)[i] = pert[k][i].quantile(u[i]);
        y.evaluate(*xp, *out);
        const double ik = event_occurs(e.kind, out->data(), outs) ? 1.0 : 0.0;
        v[k + 1] = (ik - i0) / steps[k];
      }
    };
  };
  const Tally t = run_mcs(inputs, {}, opt, K + 1, false, factory);
  ReliabilityReport r;
  r.method = "crude MCS/FD";
  r.samples = opt.samples;
  r.design_names = names_of(bindings);
  const double L = static_cast<double>(opt.samples);
  r.p_f = t.sum[0] / L;
  r.p_f_se = bernoulli_se(r.p_f, opt.samples);
  for (int k = 0; k < K; ++k) {
    r.sensitivities.push_back(t.sum[k + 1] / L);
    r.sensitivity_se.push_back(mean_se(t.sum[k + 1], t.sumsq[k + 1], opt.samples));
  }
  r.model_evaluations = y.evaluations() - before;
  r.diagnostics["event"] = to_string(e.kind);
  r.diagnostics["relative_step"] = relative_step;
  r.diagnostics["steps"] = steps;
  return r;
}

namespace {

CdfReport cdf_report(const std::string& method, const Tally& t, const std::vector<double>& xi,
                     const std::vector<DesignBinding>& b, std::uint64_t L) {
  CdfReport r;
  r.method = method;
  r.samples = L;
  r.xi = xi;
  r.design_names = names_of(b);
  const std::size_t K = b.size();
  for (std::size_t g = 0; g < xi.size(); ++g) {
    const double F = t.sum[g] / static_cast<double>(L);
    r.cdf.push_back(F);
    r.se.push_back(bernoulli_se(F, L));
    std::vector<double> s(K);
    for (std::size_t k = 0; k < K; ++k) s[k] = t.wsum[g * K + k] / static_cast<double>(L);
    r.sensitivities.push_back(s);
  }
  return r;
}

}  // namespace

CdfReport mcs_cdf(const PddSurrogate& s, const std::vector<double>& xi, const std::vector<DesignBinding>& bindings,
                  const McsOptions& opt) {
  const int N = s.N();
  const int G = static_cast<int>(xi.size());
  auto factory = [&]() -> SampleFn {
    auto psi = std::make_shared<std::vector<double>>(static_cast<std::size_t>(N) * (s.m() + 1));
    return [&, psi](const double*, const double* x, double* v) {
      s.fill_psi(std::span<const double>(x, N), psi->data());
      const double y = s.evaluate_psi(psi->data());
      for (int g = 0; g < G; ++g) v[g] = (y <= xi[g]) ? 1.0 : 0.0;
    };
  };
  return cdf_report("PDD-MCS", run_mcs(s.inputs(), bindings, opt, G, true, factory), xi, bindings, opt.samples);
}

CdfReport crude_mcs_cdf(const PerformanceModel& y, int output, const std::vector<Marginal>& inputs,
                        const std::vector<double>& xi, const std::vector<DesignBinding>& bindings,
                        const McsOptions& opt) {
  if (y.dimension() != static_cast<int>(inputs.size()))
    throw std::invalid_argument("model dimension does not match inputs");
  if (output < 0 || output >= y.outputs()) throw std::invalid_argument("output index out of range");
  const int N = y.dimension();
  const int G = static_cast<int>(xi.size());
  auto factory = [&]() -> SampleFn {
    auto out = std::make_shared<std::vector<double>>(y.outputs());
    return [&, out](const double*, const double* x, double* v) {
      y.evaluate(std::span<const double>(x, N), *out);
      const double yy = (*out)[output];
      for (int g = 0; g < G; ++g) v[g] = (yy <= xi[g]) ? 1.0 : 0.0;
    };
  };
  return cdf_report("crude MCS/SF", run_mcs(inputs, bindings, opt, G, true, factory), xi, bindings, opt.samples);
}

}  // namespace pdduq
