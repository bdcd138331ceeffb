#include "pdduq/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "pdduq/models.hpp"
#include "pdduq/pdd.hpp"
#include "pdduq/report.hpp"
#include "pdduq/truss.hpp"

namespace pdduq {

namespace {

using json = nlohmann::json;

void allow_keys(const json& j, const std::string& path, const std::set<std::string>& keys) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) throw ConfigError(path + "." + it.key(), "unknown field");
}

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + "." + key, "missing required field");
  return j.at(key);
}

int get_int(const json& j, const std::string& key, const std::string& path, int dflt) {
  if (!j.contains(key)) return dflt;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key, "expected an integer");
  return v.get<int>();
}

double get_num(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

std::string get_str(const json& j, const std::string& key, const std::string& path, const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

json read_json_file(const std::string& file, const std::string& path) {
  std::ifstream in(file);
  if (!in) throw ConfigError(path, "cannot open data file '" + file + "'");
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(path, std::string("invalid JSON in '") + file + "': " + e.what());
  }
}

std::string resolve(const std::string& base, const std::string& f) {
  std::filesystem::path p(f);
  if (p.is_absolute()) return f;
  return (std::filesystem::path(base) / p).string();
}

Marginal parse_marginal(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const auto kind = get_str(j, "kind", path, "");
  if (kind.empty()) throw ConfigError(path + ".kind", "missing required field");
  std::set<std::string> keys{"kind", "count"};
  std::vector<std::string> params;
  if (kind == "gaussian" || kind == "lognormal")
    params = {"mean", "stdev"};
  else if (kind == "exponential")
    params = {"rate"};
  else if (kind == "truncated_gaussian")
    params = {"mean", "stdev", "half_width"};
  else if (kind == "weibull")
    params = {"scale", "shape"};
  else if (kind == "uniform")
    params = {"lower", "upper"};
  else
    throw ConfigError(path + ".kind",
                      "unknown distribution '" + kind +
                          "' (expected gaussian, exponential, lognormal, truncated_gaussian, weibull or uniform)");
  for (const auto& p : params) {
    keys.insert(p);
    get_num(need(j, p, path), path + "." + p);
  }
  allow_keys(j, path, keys);
  try {
    json clean = j;
    clean.erase("count");
    return marginal_from_json(clean);
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

EventSpec parse_event(const json& j, const std::string& path, int outputs) {
  allow_keys(j, path, {"type", "outputs"});
  EventSpec e;
  try {
    e.kind = event_kind_from_string(get_str(j, "type", path, "component"));
  } catch (const std::exception& ex) {
    throw ConfigError(path + ".type", ex.what());
  }
  if (j.contains("outputs")) {
    const auto& o = j.at("outputs");
    if (!o.is_array()) throw ConfigError(path + ".outputs", "expected an array of 1-based output indices");
    for (std::size_t i = 0; i < o.size(); ++i) {
      const std::string p = path + ".outputs[" + std::to_string(i) + "]";
      if (!o[i].is_number_integer()) throw ConfigError(p, "expected an integer");
      const int k = o[i].get<int>();
      if (k < 1 || k > outputs)
        throw ConfigError(p, "output " + std::to_string(k) + " out of range 1.." + std::to_string(outputs));
      e.outputs.push_back(k - 1);
    }
  }
  if (e.kind == EventKind::Component) {
    if (e.outputs.empty()) e.outputs = {0};
    if (e.outputs.size() != 1) throw ConfigError(path + ".outputs", "a component event takes exactly one output");
  }
  return e;
}

json event_json(const EventSpec& e) {
  std::vector<int> o;
  for (int k : e.outputs) o.push_back(k + 1);
  return {{"type", to_string(e.kind)}, {"outputs", o}};
}

}  // namespace

PerformanceModel builtin_model(const json& spec, const std::string& base_dir, const std::string& path) {
  if (!spec.is_object()) throw ConfigError(path, "expected an object");
  const auto name = get_str(spec, "builtin", path, "");
  if (name.empty()) throw ConfigError(path + ".builtin", "missing required field");
  if (name == "cubic4") {
    allow_keys(spec, path, {"builtin"});
    return cubic4_model();
  }
  if (name == "linear6") {
    allow_keys(spec, path, {"builtin"});
    return linear6_model();
  }
  if (name == "gauss_sum") {
    allow_keys(spec, path, {"builtin", "N"});
    const int N = get_int(spec, "N", path, 0);
    if (N < 1) throw ConfigError(path + ".N", "gauss_sum needs N >= 1");
    return gauss_sum_model(N);
  }
  if (name == "trig_poly") {
    allow_keys(spec, path, {"builtin", "data_file", "seed"});
    if (spec.contains("data_file")) {
      const auto f = resolve(base_dir, get_str(spec, "data_file", path, ""));
      try {
        return trig_poly_model(trig_poly_from_json(read_json_file(f, path + ".data_file")));
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(path + ".data_file", e.what());
      }
    }
    return trig_poly_model(default_trig_poly_coefficients(static_cast<std::uint64_t>(get_int(spec, "seed", path, 15))));
  }
  if (name == "truss21") {
    allow_keys(spec, path, {"builtin", "data_file", "height"});
    if (spec.contains("data_file")) {
      const auto f = resolve(base_dir, get_str(spec, "data_file", path, ""));
      try {
        return truss_model(truss_from_json(read_json_file(f, path + ".data_file")));
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(path + ".data_file", e.what());
      }
    }
    const double h = spec.contains("height") ? get_num(spec.at("height"), path + ".height") : 30.6;
    if (!(h > 0)) throw ConfigError(path + ".height", "height must be positive");
    return truss_model(default_truss21(h));
  }
  throw ConfigError(path + ".builtin",
                    "unknown model '" + name + "' (expected trig_poly, cubic4, gauss_sum, linear6 or truss21)");
}

AnalysisConfig parse_config(const json& j, const std::string& base_dir) {
  AnalysisConfig c;
  allow_keys(j, "config", {"schema_version", "model", "inputs", "design", "truncation", "analyses", "mcs", "output"});
  if (!j.contains("schema_version")) throw ConfigError("config.schema_version", "missing required field");
  if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != 1)
    throw ConfigError("config.schema_version", "unsupported schema version (expected 1)");

  c.model_spec = need(j, "model", "config");
  c.model = builtin_model(c.model_spec, base_dir, "config.model");

  const auto& in = need(j, "inputs", "config");
  if (!in.is_array() || in.empty()) throw ConfigError("config.inputs", "expected a non-empty array");
  for (std::size_t i = 0; i < in.size(); ++i) {
    const std::string p = "config.inputs[" + std::to_string(i) + "]";
    const Marginal mg = parse_marginal(in[i], p);
    const int count = get_int(in[i], "count", p, 1);
    if (count < 1) throw ConfigError(p + ".count", "count must be >= 1");
    for (int k = 0; k < count; ++k) c.inputs.push_back(mg);
  }
  const int N = static_cast<int>(c.inputs.size());
  if (N != c.model.dimension())
    throw ConfigError("config.inputs", std::to_string(N) + " inputs given but model '" + c.model.name() + "' has dimension " +
                                           std::to_string(c.model.dimension()));

  if (j.contains("design")) {
    const auto& d = j.at("design");
    if (!d.is_array()) throw ConfigError("config.design", "expected an array");
    for (std::size_t k = 0; k < d.size(); ++k) {
      const std::string p = "config.design[" + std::to_string(k) + "]";
      allow_keys(d[k], p, {"name", "targets"});
      DesignBinding b;
      b.design_index = static_cast<int>(k);
      b.name = get_str(d[k], "name", p, "d" + std::to_string(k + 1));
      const auto& t = need(d[k], "targets", p);
      if (!t.is_array() || t.empty()) throw ConfigError(p + ".targets", "expected a non-empty array");
      for (std::size_t q = 0; q < t.size(); ++q) {
        const std::string tp = p + ".targets[" + std::to_string(q) + "]";
        allow_keys(t[q], tp, {"input", "parameter"});
        ParameterRole role;
        try {
          role = parameter_role_from_string(get_str(t[q], "parameter", tp, ""));
        } catch (const std::exception& e) {
          throw ConfigError(tp + ".parameter", e.what());
        }
        const auto& iv = need(t[q], "input", tp);
        if (iv.is_string() && iv.get<std::string>() == "all") {
          for (int i = 0; i < N; ++i) b.targets.push_back({i, role});
        } else if (iv.is_number_integer()) {
          const int i = iv.get<int>();
          if (i < 1 || i > N) throw ConfigError(tp + ".input", "input " + std::to_string(i) + " out of range 1.." + std::to_string(N));
          b.targets.push_back({i - 1, role});
        } else {
          throw ConfigError(tp + ".input", "expected a 1-based input index or \"all\"");
        }
      }
      try {
        validate_binding(b, c.inputs);
      } catch (const std::exception& e) {
        throw ConfigError(p, e.what());
      }
      c.bindings.push_back(b);
    }
  }

  const json tr = j.value("truncation", json::object());
  allow_keys(tr, "config.truncation", {"S", "m", "R", "n", "m_prime", "S_bar", "m_bar", "Q", "method", "truncated_gaussian_score"});
  c.pdd.S = get_int(tr, "S", "config.truncation", 1);
  c.pdd.m = get_int(tr, "m", "config.truncation", 1);
  c.pdd.R = get_int(tr, "R", "config.truncation", c.pdd.S);
  c.pdd.n = get_int(tr, "n", "config.truncation", c.pdd.m + 1);
  if (c.pdd.S < 1) throw ConfigError("config.truncation.S", "S must be >= 1");
  if (c.pdd.S > N)
    throw ConfigError("config.truncation.S", "S = " + std::to_string(c.pdd.S) + " exceeds the number of inputs N = " + std::to_string(N));
  if (c.pdd.m < 1) throw ConfigError("config.truncation.m", "m must be >= 1");
  if (c.pdd.R < c.pdd.S) throw ConfigError("config.truncation.R", "R must be >= S");
  if (c.pdd.R > N) throw ConfigError("config.truncation.R", "R must not exceed N");
  if (c.pdd.n < c.pdd.m + 1) throw ConfigError("config.truncation.n", "n must be >= m + 1");
  c.moments.Q = get_int(tr, "Q", "config.truncation", 4);
  if (c.moments.Q < 2 || c.moments.Q > 4) throw ConfigError("config.truncation.Q", "Q must be 2, 3 or 4");
  c.moments.m_prime = get_int(tr, "m_prime", "config.truncation", 2);
  if (c.moments.m_prime < 1) throw ConfigError("config.truncation.m_prime", "m_prime must be >= 1");
  c.moments.S_bar = get_int(tr, "S_bar", "config.truncation", c.pdd.S);
  c.moments.m_bar = get_int(tr, "m_bar", "config.truncation", 2 * c.pdd.m);
  if (c.moments.S_bar < 1 || c.moments.S_bar > N) throw ConfigError("config.truncation.S_bar", "S_bar must satisfy 1 <= S_bar <= N");
  if (c.moments.m_bar < 1) throw ConfigError("config.truncation.m_bar", "m_bar must be >= 1");
  try {
    c.moments.method = higher_moment_method_from_string(get_str(tr, "method", "config.truncation", "optionI"));
  } catch (const std::exception& e) {
    throw ConfigError("config.truncation.method", e.what());
  }
  const auto tg = get_str(tr, "truncated_gaussian_score", "config.truncation", "table");
  if (tg == "table")
    c.moments.score.truncated_gaussian = TruncatedGaussianScore::Table;
  else if (tg == "numeric")
    c.moments.score.truncated_gaussian = TruncatedGaussianScore::Numeric;
  else
    throw ConfigError("config.truncation.truncated_gaussian_score", "expected table or numeric");

  const json mc = j.value("mcs", json::object());
  allow_keys(mc, "config.mcs", {"samples", "seed"});
  if (mc.contains("samples")) {
    if (!mc.at("samples").is_number_integer() || mc.at("samples").get<long long>() < 1)
      throw ConfigError("config.mcs.samples", "expected a positive integer");
    c.mcs.samples = mc.at("samples").get<std::uint64_t>();
  }
  if (mc.contains("seed")) {
    if (!mc.at("seed").is_number_integer() || mc.at("seed").get<long long>() < 0)
      throw ConfigError("config.mcs.seed", "expected a non-negative integer");
    c.mcs.seed = mc.at("seed").get<std::uint64_t>();
  }
  c.mcs.score = c.moments.score;

  const json an = j.value("analyses", json::object());
  allow_keys(an, "config.analyses", {"moments", "reliability", "cdf", "baseline"});
  if (an.contains("moments")) {
    if (!an.at("moments").is_boolean()) throw ConfigError("config.analyses.moments", "expected true or false");
    c.want_moments = an.at("moments").get<bool>();
  }
  const int K = c.model.outputs();
  if (an.contains("reliability")) {
    const auto& r = an.at("reliability");
    if (!r.is_array()) throw ConfigError("config.analyses.reliability", "expected an array");
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string p = "config.analyses.reliability[" + std::to_string(i) + "]";
      allow_keys(r[i], p, {"method", "event", "xi"});
      ReliabilityRequest q;
      q.method = get_str(r[i], "method", p, "spa");
      if (q.method != "spa" && q.method != "mcs") throw ConfigError(p + ".method", "expected spa or mcs");
      q.event = parse_event(r[i].value("event", json::object()), p + ".event", K);
      if (r[i].contains("xi")) q.xi = get_num(r[i].at("xi"), p + ".xi");
      if (q.method == "spa" && q.event.kind != EventKind::Component)
        throw ConfigError(p + ".event.type",
                          "PDD-SPA handles component events only; use method mcs for series or parallel systems");
      if (q.method == "mcs" && q.xi != 0.0) throw ConfigError(p + ".xi", "mcs events use the threshold 0");
      c.reliability.push_back(q);
    }
  }
  if (an.contains("cdf")) {
    const auto& d = an.at("cdf");
    const std::string p = "config.analyses.cdf";
    allow_keys(d, p, {"method", "output", "xi", "xi_range"});
    CdfRequest q;
    q.method = get_str(d, "method", p, "mcs");
    if (q.method != "spa" && q.method != "mcs") throw ConfigError(p + ".method", "expected spa or mcs");
    const int o = get_int(d, "output", p, 1);
    if (o < 1 || o > K) throw ConfigError(p + ".output", "output out of range 1.." + std::to_string(K));
    q.output = o - 1;
    if (d.contains("xi")) {
      if (!d.at("xi").is_array()) throw ConfigError(p + ".xi", "expected an array of numbers");
      for (std::size_t i = 0; i < d.at("xi").size(); ++i)
        q.xi.push_back(get_num(d.at("xi")[i], p + ".xi[" + std::to_string(i) + "]"));
    } else if (d.contains("xi_range")) {
      const auto& rr = d.at("xi_range");
      allow_keys(rr, p + ".xi_range", {"from", "to", "points"});
      const double a = get_num(need(rr, "from", p + ".xi_range"), p + ".xi_range.from");
      const double b = get_num(need(rr, "to", p + ".xi_range"), p + ".xi_range.to");
      const int n = get_int(rr, "points", p + ".xi_range", 0);
      if (n < 2) throw ConfigError(p + ".xi_range.points", "need at least 2 points");
      for (int i = 0; i < n; ++i) q.xi.push_back(a + (b - a) * i / (n - 1));
    } else {
      throw ConfigError(p + ".xi", "missing required field (or xi_range)");
    }
    c.cdf = q;
  }
  c.baseline = get_str(an, "baseline", "config.analyses", "none");
  if (c.baseline != "none" && c.baseline != "mcs-sf" && c.baseline != "mcs-fd")
    throw ConfigError("config.analyses.baseline", "expected none, mcs-sf or mcs-fd");

  const json out = j.value("output", json::object());
  allow_keys(out, "config.output", {"directory"});
  c.output_directory = get_str(out, "directory", "config.output", ".");

  // Effective configuration.
  json e;
  e["schema_version"] = 1;
  e["model"] = c.model_spec;
  e["inputs"] = json::array();
  for (const auto& mg : c.inputs) e["inputs"].push_back(marginal_to_json(mg));
  e["design"] = json::array();
  for (const auto& b : c.bindings) {
    json t = json::array();
    for (const auto& x : b.targets) t.push_back({{"input", x.variable + 1}, {"parameter", to_string(x.role)}});
    e["design"].push_back({{"name", b.name}, {"targets", t}});
  }
  e["truncation"] = {{"S", c.pdd.S},           {"m", c.pdd.m},           {"R", c.pdd.R},
                     {"n", c.pdd.n},           {"m_prime", c.moments.m_prime}, {"S_bar", c.moments.S_bar},
                     {"m_bar", c.moments.m_bar}, {"Q", c.moments.Q},     {"method", to_string(c.moments.method)},
                     {"truncated_gaussian_score", tg}};
  e["mcs"] = {{"samples", c.mcs.samples}, {"seed", c.mcs.seed}};
  json ea;
  ea["moments"] = c.want_moments;
  ea["reliability"] = json::array();
  for (const auto& r : c.reliability) ea["reliability"].push_back({{"method", r.method}, {"event", event_json(r.event)}, {"xi", r.xi}});
  if (c.cdf) ea["cdf"] = {{"method", c.cdf->method}, {"output", c.cdf->output + 1}, {"xi", c.cdf->xi}};
  ea["baseline"] = c.baseline;
  e["analyses"] = ea;
  e["output"] = {{"directory", c.output_directory}};
  c.effective = e;
  return c;
}

namespace {

std::string with_context(const std::string& ctx, const std::exception& e) { return ctx + ": " + e.what(); }

}  // namespace

RunOutput run_analysis(const AnalysisConfig& c, unsigned threads) {
  RunOutput out;
  std::ostringstream sum;
  PddOptions po = c.pdd;
  po.threads = threads;
  const auto before = c.model.evaluations();
  PddBuild build;
  try {
    build = compute_coefficients(c.model, c.inputs, po);
  } catch (const std::exception& e) {
    throw std::runtime_error(with_context("pdd_core", e));
  }
  const auto evals = c.model.evaluations() - before;
  sum << "model " << c.model.name() << ", N = " << c.inputs.size() << ", outputs = " << c.model.outputs() << "\n"
      << "PDD S = " << po.S << ", m = " << po.m << ", R = " << (po.R > 0 ? po.R : po.S) << ", n = " << (po.n > 0 ? po.n : po.m + 1)
      << "\n"
      << "model evaluations: " << evals << " (dimension-reduction bound " << build.evaluation_bound << ")\n";
  nlohmann::json meta;
  meta["config"] = c.effective;
  meta["model_evaluations"] = evals;
  meta["evaluation_bound"] = build.evaluation_bound;
  meta["distinct_points"] = build.distinct_points;

  MomentOptions mo = c.moments;
  mo.threads = threads;
  McsOptions mc = c.mcs;
  mc.threads = threads;

  if (c.want_moments) {
    CsvTable t({"output", "order", "design", "value", "method"});
    nlohmann::json mj = nlohmann::json::array();
    for (std::size_t k = 0; k < build.surrogates.size(); ++k) {
      MomentReport r;
      try {
        r = compute_moments(build.surrogates[k], c.bindings, mo);
      } catch (const std::exception& e) {
        throw std::runtime_error(with_context("moment_sens (output " + std::to_string(k + 1) + ")", e));
      }
      for (std::size_t q = 0; q < r.moments.size(); ++q) {
        t.add_row({std::to_string(k + 1), std::to_string(q + 1), "", format_double(r.moments[q]), r.methods[q]});
        for (std::size_t d = 0; d < r.design_names.size(); ++d)
          t.add_row({std::to_string(k + 1), std::to_string(q + 1), r.design_names[d], format_double(r.sensitivities[q][d]),
                     r.methods[q]});
      }
      auto rj = r.to_json();
      rj["output"] = k + 1;
      mj.push_back(rj);
      sum << "output " << k + 1 << " moments:";
      for (double v : r.moments) sum << " " << v;
      sum << "\n";
    }
    out.files.push_back({"moments.csv", t.str()});
    out.files.push_back({"moments.json", mj.dump(2)});
  }

  if (!c.reliability.empty()) {
    nlohmann::json rj = nlohmann::json::array();
    CsvTable t({"request", "quantity", "design", "value", "standard_error", "method"});
    for (std::size_t i = 0; i < c.reliability.size(); ++i) {
      const auto& q = c.reliability[i];
      ReliabilityReport r;
      try {
        if (q.method == "spa")
          r = spa_reliability(q.event, build.surrogates, c.bindings, mo, q.xi);
        else
          r = mcs_failure_probability(q.event, build.surrogates, c.bindings, mc);
      } catch (const std::exception& e) {
        throw std::runtime_error(with_context("reliability (request " + std::to_string(i + 1) + ")", e));
      }
      r.model_evaluations = evals;
      auto j = r.to_json();
      j["event"] = c.effective["analyses"]["reliability"][i]["event"];
      rj.push_back(j);
      t.add_row({std::to_string(i + 1), "p_f", "", format_double(r.p_f), r.method == "PDD-SPA" ? "" : format_double(r.p_f_se), r.method});
      for (std::size_t d = 0; d < r.sensitivities.size(); ++d)
        t.add_row({std::to_string(i + 1), "sensitivity", r.design_names[d], format_double(r.sensitivities[d]),
                   r.sensitivity_se.empty() ? "" : format_double(r.sensitivity_se[d]), r.method});
      sum << "reliability " << i + 1 << " (" << r.method << ", " << to_string(q.event.kind) << "): P_F = " << r.p_f;
      if (r.method != "PDD-SPA") sum << " (se " << r.p_f_se << ")";
      for (std::size_t d = 0; d < r.sensitivities.size(); ++d) sum << ", d/d" << r.design_names[d] << " = " << r.sensitivities[d];
      sum << "\n";
    }
    out.files.push_back({"reliability.json", rj.dump(2)});
    out.files.push_back({"reliability.csv", t.str()});
  }

  if (c.cdf) {
    CdfReport r;
    try {
      const auto& s = build.surrogates.at(c.cdf->output);
      if (c.cdf->method == "mcs")
        r = mcs_cdf(s, c.cdf->xi, c.bindings, mc);
      else
        r = spa_cdf_curve(compute_moments(s, c.bindings, mo), c.cdf->xi);
    } catch (const std::exception& e) {
      throw std::runtime_error(with_context("reliability (cdf)", e));
    }
    out.files.push_back({"cdf.csv", r.to_csv()});
    sum << "cdf: " << r.xi.size() << " thresholds (" << r.method << ")\n";
  }

  if (c.baseline != "none") {
    nlohmann::json bj = nlohmann::json::array();
    std::vector<EventSpec> events;
    for (const auto& q : c.reliability) events.push_back(q.event);
    if (events.empty()) events.push_back(EventSpec{});
    for (const auto& e : events) {
      ReliabilityReport r;
      try {
        r = c.baseline == "mcs-sf" ? crude_mcs_sf(e, c.model, c.inputs, c.bindings, mc)
                                   : crude_mcs_fd(e, c.model, c.inputs, c.bindings, mc);
      } catch (const std::exception& ex) {
        throw std::runtime_error(with_context("baseline", ex));
      }
      bj.push_back(r.to_json());
      sum << "baseline " << r.method << " (" << to_string(e.kind) << "): P_F = " << r.p_f << " (se " << r.p_f_se << "), "
          << r.model_evaluations << " model evaluations\n";
    }
    out.files.push_back({"baseline.json", bj.dump(2)});
  }
  out.files.push_back({"run.json", meta.dump(2)});
  out.summary = sum.str();
  return out;
}

}  // namespace pdduq
