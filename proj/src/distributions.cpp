#include "pdduq/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pdduq/special.hpp"

namespace pdduq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double trunc_mass(double a) { return normal_cdf(a) - normal_cdf(-a); }

// E[Y^k] for Y ~ N(0,1) truncated to [-a, a].
std::vector<double> trunc_std_moments(double a, int kmax) {
  std::vector<double> m(kmax + 1, 0.0);
  double z = trunc_mass(a);
  double phi = normal_pdf(a);
  m[0] = 1.0;
  for (int k = 2; k <= kmax; ++k) {
    double edge = std::pow(a, k - 1) * phi - std::pow(-a, k - 1) * phi;
    m[k] = (k - 1) * m[k - 2] - edge / z;
  }
  return m;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Marginal::Marginal(MarginalKind k, std::vector<double> p) : kind_(k), p_(std::move(p)) {
  validate();
}

Marginal Marginal::gaussian(double mean, double stdev) {
  return Marginal(MarginalKind::Gaussian, {mean, stdev});
}
Marginal Marginal::exponential(double rate) { return Marginal(MarginalKind::Exponential, {rate}); }
Marginal Marginal::lognormal(double mean, double stdev) {
  return Marginal(MarginalKind::Lognormal, {mean, stdev});
}
Marginal Marginal::truncated_gaussian(double mean, double stdev, double half_width) {
  return Marginal(MarginalKind::TruncatedGaussian, {mean, stdev, half_width});
}
Marginal Marginal::weibull(double scale, double shape) {
  return Marginal(MarginalKind::Weibull, {scale, shape});
}
Marginal Marginal::uniform(double lower, double upper) {
  return Marginal(MarginalKind::Uniform, {lower, upper});
}

void Marginal::validate() const {
  for (double v : p_) require(std::isfinite(v), "marginal parameter must be finite");
  switch (kind_) {
    case MarginalKind::Gaussian:
      require(p_[1] > 0, "Gaussian: stdev must be > 0");
      break;
    case MarginalKind::Exponential:
      require(p_[0] > 0, "Exponential: rate must be > 0");
      break;
    case MarginalKind::Lognormal:
      require(p_[0] > 0, "Lognormal: mean must be > 0");
      require(p_[1] > 0, "Lognormal: stdev must be > 0");
      break;
    case MarginalKind::TruncatedGaussian:
      require(p_[1] > 0, "TruncatedGaussian: stdev must be > 0");
      require(p_[2] > 0, "TruncatedGaussian: half-width D must be > 0");
      break;
    case MarginalKind::Weibull:
      require(p_[0] > 0, "Weibull: scale must be > 0");
      require(p_[1] > 0, "Weibull: shape must be > 0");
      break;
    case MarginalKind::Uniform:
      require(p_[0] < p_[1], "Uniform: lower must be < upper");
      break;
  }
}

double Marginal::log_sigma() const {
  double cv = p_[1] / p_[0];
  return std::sqrt(std::log1p(cv * cv));
}

double Marginal::log_mu() const {
  double s = log_sigma();
  return std::log(p_[0]) - 0.5 * s * s;
}

double Marginal::log_pdf(double x) const {
  if (!in_support(x)) return -kInf;
  switch (kind_) {
    case MarginalKind::Gaussian: {
      double z = (x - p_[0]) / p_[1];
      return -0.5 * z * z - std::log(p_[1]) - 0.5 * std::log(2 * std::numbers::pi);
    }
    case MarginalKind::Exponential:
      return std::log(p_[0]) - p_[0] * x;
    case MarginalKind::Lognormal: {
      double s = log_sigma();
      double z = (std::log(x) - log_mu()) / s;
      return -0.5 * z * z - std::log(x * s) - 0.5 * std::log(2 * std::numbers::pi);
    }
    case MarginalKind::TruncatedGaussian: {
      double z = (x - p_[0]) / p_[1];
      return -0.5 * z * z - std::log(p_[1]) - 0.5 * std::log(2 * std::numbers::pi) -
             std::log(trunc_mass(p_[2] / p_[1]));
    }
    case MarginalKind::Weibull: {
      double lam = p_[0], k = p_[1];
      double r = x / lam;
      return std::log(k / lam) + (k - 1) * std::log(r) - std::pow(r, k);
    }
    case MarginalKind::Uniform:
      return -std::log(p_[1] - p_[0]);
  }
  return -kInf;
}

double Marginal::pdf(double x) const {
  if (!in_support(x)) return 0.0;
  return std::exp(log_pdf(x));
}

double Marginal::cdf(double x) const {
  auto [lo, hi] = support();
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  switch (kind_) {
    case MarginalKind::Gaussian:
      return normal_cdf((x - p_[0]) / p_[1]);
    case MarginalKind::Exponential:
      return -std::expm1(-p_[0] * x);
    case MarginalKind::Lognormal:
      return normal_cdf((std::log(x) - log_mu()) / log_sigma());
    case MarginalKind::TruncatedGaussian: {
      double a = p_[2] / p_[1];
      return (normal_cdf((x - p_[0]) / p_[1]) - normal_cdf(-a)) / trunc_mass(a);
    }
    case MarginalKind::Weibull:
      return -std::expm1(-std::pow(x / p_[0], p_[1]));
    case MarginalKind::Uniform:
      return (x - p_[0]) / (p_[1] - p_[0]);
  }
  return 0.0;
}

double Marginal::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u must lie in (0,1)");
  switch (kind_) {
    case MarginalKind::Gaussian:
      return p_[0] + p_[1] * normal_quantile(u);
    case MarginalKind::Exponential:
      return -std::log1p(-u) / p_[0];
    case MarginalKind::Lognormal:
      return std::exp(log_mu() + log_sigma() * normal_quantile(u));
    case MarginalKind::TruncatedGaussian: {
      double a = p_[2] / p_[1];
      double lo = normal_cdf(-a);
      double z = normal_quantile(lo + u * trunc_mass(a));
      double x = p_[0] + p_[1] * z;
      // Guard against rounding just outside the support.
      return std::min(std::max(x, p_[0] - p_[2]), p_[0] + p_[2]);
    }
    case MarginalKind::Weibull:
      return p_[0] * std::pow(-std::log1p(-u), 1.0 / p_[1]);
    case MarginalKind::Uniform:
      return p_[0] + (p_[1] - p_[0]) * u;
  }
  return 0.0;
}

double Marginal::mean() const {
  switch (kind_) {
    case MarginalKind::Gaussian:
    case MarginalKind::Lognormal:
    case MarginalKind::TruncatedGaussian:
      return p_[0];
    case MarginalKind::Exponential:
      return 1.0 / p_[0];
    case MarginalKind::Weibull:
      return p_[0] * std::tgamma(1.0 + 1.0 / p_[1]);
    case MarginalKind::Uniform:
      return 0.5 * (p_[0] + p_[1]);
  }
  return 0.0;
}

double Marginal::stdev() const {
  switch (kind_) {
    case MarginalKind::Gaussian:
    case MarginalKind::Lognormal:
      return p_[1];
    case MarginalKind::Exponential:
      return 1.0 / p_[0];
    case MarginalKind::TruncatedGaussian: {
      double a = p_[2] / p_[1];
      double v = 1.0 - 2.0 * a * normal_pdf(a) / trunc_mass(a);
      return p_[1] * std::sqrt(v);
    }
    case MarginalKind::Weibull: {
      double g1 = std::tgamma(1.0 + 1.0 / p_[1]);
      double g2 = std::tgamma(1.0 + 2.0 / p_[1]);
      return p_[0] * std::sqrt(g2 - g1 * g1);
    }
    case MarginalKind::Uniform:
      return (p_[1] - p_[0]) / std::sqrt(12.0);
  }
  return 0.0;
}

double Marginal::raw_moment(int r) const {
  if (r < 0) throw std::invalid_argument("raw_moment: order must be >= 0");
  if (r == 0) return 1.0;
  switch (kind_) {
    case MarginalKind::Gaussian: {
      double mu = p_[0], s = p_[1], sum = 0.0, dfact = 1.0;
      for (int k = 0; k <= r; k += 2) {
        if (k >= 2) dfact *= (k - 1);
        sum += binomial(r, k) * std::pow(mu, r - k) * std::pow(s, k) * dfact;
      }
      return sum;
    }
    case MarginalKind::Exponential:
      return factorial(r) / std::pow(p_[0], r);
    case MarginalKind::Lognormal: {
      double s = log_sigma();
      return std::exp(r * log_mu() + 0.5 * r * r * s * s);
    }
    case MarginalKind::TruncatedGaussian: {
      auto m = trunc_std_moments(p_[2] / p_[1], r);
      double sum = 0.0;
      for (int k = 0; k <= r; ++k)
        sum += binomial(r, k) * std::pow(p_[0], r - k) * std::pow(p_[1], k) * m[k];
      return sum;
    }
    case MarginalKind::Weibull:
      return std::pow(p_[0], r) * std::tgamma(1.0 + r / p_[1]);
    case MarginalKind::Uniform:
      return (std::pow(p_[1], r + 1) - std::pow(p_[0], r + 1)) / ((r + 1) * (p_[1] - p_[0]));
  }
  return 0.0;
}

std::pair<double, double> Marginal::support() const {
  switch (kind_) {
    case MarginalKind::Gaussian:
      return {-kInf, kInf};
    case MarginalKind::Exponential:
    case MarginalKind::Lognormal:
    case MarginalKind::Weibull:
      return {0.0, kInf};
    case MarginalKind::TruncatedGaussian:
      return {p_[0] - p_[2], p_[0] + p_[2]};
    case MarginalKind::Uniform:
      return {p_[0], p_[1]};
  }
  return {-kInf, kInf};
}

bool Marginal::in_support(double x) const {
  auto [lo, hi] = support();
  if (kind_ == MarginalKind::Lognormal) return x > 0 && x < hi;
  return x >= lo && x <= hi;
}

bool Marginal::has_role(ParameterRole role) const {
  switch (kind_) {
    case MarginalKind::Gaussian:
    case MarginalKind::Lognormal:
    case MarginalKind::TruncatedGaussian:
      return role == ParameterRole::Mean || role == ParameterRole::Stdev;
    case MarginalKind::Exponential:
      return role == ParameterRole::Rate;
    case MarginalKind::Weibull:
      return role == ParameterRole::Scale || role == ParameterRole::Shape;
    case MarginalKind::Uniform:
      return false;
  }
  return false;
}

namespace {
int role_slot(ParameterRole role) {
  switch (role) {
    case ParameterRole::Mean:
    case ParameterRole::Rate:
    case ParameterRole::Scale:
      return 0;
    case ParameterRole::Stdev:
    case ParameterRole::Shape:
      return 1;
  }
  return 0;
}
}  // namespace

double Marginal::parameter(ParameterRole role) const {
  if (!has_role(role))
    throw std::invalid_argument(to_string(kind_) + " has no parameter '" + to_string(role) + "'");
  return p_[role_slot(role)];
}

Marginal Marginal::with_parameter(ParameterRole role, double value) const {
  if (!has_role(role))
    throw std::invalid_argument(to_string(kind_) + " has no parameter '" + to_string(role) + "'");
  auto p = p_;
  p[role_slot(role)] = value;
  return Marginal(kind_, p);
}

double Marginal::log_density_derivative(ParameterRole role, double x,
                                        const ScoreOptions& opt) const {
  if (!has_role(role))
    throw std::invalid_argument(to_string(kind_) + " has no parameter '" + to_string(role) + "'");
  if (!in_support(x)) throw std::domain_error("log_density_derivative: x outside support");
  switch (kind_) {
    case MarginalKind::Gaussian: {
      double mu = p_[0], s = p_[1], z = (x - mu) / s;
      return role == ParameterRole::Mean ? z / s : (z * z - 1.0) / s;
    }
    case MarginalKind::Exponential:
      return 1.0 / p_[0] - x;
    case MarginalKind::Lognormal: {
      double mu = p_[0], sd = p_[1];
      double st = log_sigma(), mt = log_mu();
      double q = mu * mu + sd * sd;
      double dst, dmt;
      if (role == ParameterRole::Mean) {
        dst = -sd * sd / (st * mu * q);
        dmt = 1.0 / mu - st * dst;
      } else {
        dst = sd / (st * q);
        dmt = -st * dst;
      }
      double lx = std::log(x) - mt;
      double z = lx / st;
      return -dst / st + z / (st * st) * (st * dmt + lx * dst);
    }
    case MarginalKind::TruncatedGaussian: {
      if (opt.truncated_gaussian == TruncatedGaussianScore::Table) {
        double mu = p_[0], s = p_[1], d = p_[2], z = (x - mu) / s;
        double pre = 1.0 / trunc_mass(d);
        return role == ParameterRole::Mean ? pre * z / s : pre * (z * z - 1.0) / s;
      }
      // Central difference of ln pdf with the half-width held fixed.
      double v = parameter(role);
      double h = 1e-5 * std::max(1.0, std::abs(v));
      Marginal up = with_parameter(role, v + h);
      Marginal dn = with_parameter(role, v - h);
      return (up.log_pdf(x) - dn.log_pdf(x)) / (2.0 * h);
    }
    case MarginalKind::Weibull: {
      double lam = p_[0], k = p_[1];
      double r = x / lam;
      double rk = std::pow(r, k);
      if (role == ParameterRole::Scale) return (k / lam) * (rk - 1.0);
      return 1.0 / k + (std::log(x) - std::log(lam)) * (1.0 - rk);
    }
    case MarginalKind::Uniform:
      break;
  }
  return 0.0;
}

std::string Marginal::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind_) << "(";
  for (std::size_t i = 0; i < p_.size(); ++i) os << (i ? ", " : "") << p_[i];
  os << ")";
  return os.str();
}

std::string to_string(MarginalKind k) {
  switch (k) {
    case MarginalKind::Gaussian: return "gaussian";
    case MarginalKind::Exponential: return "exponential";
    case MarginalKind::Lognormal: return "lognormal";
    case MarginalKind::TruncatedGaussian: return "truncated_gaussian";
    case MarginalKind::Weibull: return "weibull";
    case MarginalKind::Uniform: return "uniform";
  }
  return "?";
}

MarginalKind marginal_kind_from_string(const std::string& s) {
  for (auto k : {MarginalKind::Gaussian, MarginalKind::Exponential, MarginalKind::Lognormal,
                 MarginalKind::TruncatedGaussian, MarginalKind::Weibull, MarginalKind::Uniform})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown marginal kind '" + s + "'");
}

std::string to_string(ParameterRole r) {
  switch (r) {
    case ParameterRole::Mean: return "mean";
    case ParameterRole::Stdev: return "stdev";
    case ParameterRole::Rate: return "rate";
    case ParameterRole::Scale: return "scale";
    case ParameterRole::Shape: return "shape";
  }
  return "?";
}

ParameterRole parameter_role_from_string(const std::string& s) {
  for (auto r : {ParameterRole::Mean, ParameterRole::Stdev, ParameterRole::Rate,
                 ParameterRole::Scale, ParameterRole::Shape})
    if (to_string(r) == s) return r;
  throw std::invalid_argument("unknown parameter role '" + s + "'");
}

void validate_binding(const DesignBinding& b, const std::vector<Marginal>& inputs) {
  if (b.targets.empty()) throw std::invalid_argument("design binding has no targets");
  double first = 0.0;
  for (std::size_t t = 0; t < b.targets.size(); ++t) {
    const auto& tg = b.targets[t];
    for (std::size_t u = 0; u < t; ++u)
      if (b.targets[u].variable == tg.variable && b.targets[u].role == tg.role)
        throw std::invalid_argument("design binding '" + b.name + "' lists input " +
                                    std::to_string(tg.variable) + " twice for the same role");
    if (tg.variable < 0 || tg.variable >= static_cast<int>(inputs.size()))
      throw std::invalid_argument("design binding targets input " + std::to_string(tg.variable) +
                                  " which does not exist");
    const auto& mg = inputs[tg.variable];
    if (!mg.has_role(tg.role))
      throw std::invalid_argument("design binding: " + mg.describe() + " has no parameter '" +
                                  to_string(tg.role) + "'");
    double v = mg.parameter(tg.role);
    if (t == 0) first = v;
    else if (v != first)
      throw std::invalid_argument("design binding '" + b.name +
                                  "': targets disagree on the current parameter value");
  }
}

double design_value(const DesignBinding& b, const std::vector<Marginal>& inputs) {
  validate_binding(b, inputs);
  const auto& t = b.targets.front();
  return inputs[t.variable].parameter(t.role);
}

std::vector<Marginal> perturb_design(const DesignBinding& b, const std::vector<Marginal>& inputs,
                                     double new_value) {
  validate_binding(b, inputs);
  auto out = inputs;
  for (const auto& t : b.targets) out[t.variable] = out[t.variable].with_parameter(t.role, new_value);
  return out;
}

double joint_score(const DesignBinding& b, const std::vector<Marginal>& inputs, const double* x,
                   const ScoreOptions& opt) {
  double s = 0.0;
  for (const auto& t : b.targets)
    s += inputs[t.variable].log_density_derivative(t.role, x[t.variable], opt);
  return s;
}

}  // namespace pdduq
