#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pdduq/random.hpp"

namespace pdduq {

enum class MarginalKind { Gaussian, Exponential, Lognormal, TruncatedGaussian, Weibull, Uniform };

// Distribution parameters a design variable may be bound to.
enum class ParameterRole { Mean, Stdev, Rate, Scale, Shape };

enum class TruncatedGaussianScore { Table, Numeric };

struct ScoreOptions {
  TruncatedGaussianScore truncated_gaussian = TruncatedGaussianScore::Table;
};

class Marginal {
 public:
  static Marginal gaussian(double mean, double stdev);
  static Marginal exponential(double rate);
  // Parameterized by the mean and standard deviation of X itself.
  static Marginal lognormal(double mean, double stdev);
  // Gaussian(mean, stdev) restricted to [mean - half_width, mean + half_width].
  static Marginal truncated_gaussian(double mean, double stdev, double half_width);
  static Marginal weibull(double scale, double shape);
  static Marginal uniform(double lower, double upper);

  MarginalKind kind() const { return kind_; }
  // Raw parameters in constructor order.
  const std::vector<double>& params() const { return p_; }

  double pdf(double x) const;
  double log_pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;
  double sample(SampleStream& s) const { return quantile(s.uniform()); }

  double mean() const;
  double stdev() const;
  double raw_moment(int order) const;
  std::pair<double, double> support() const;
  bool in_support(double x) const;

  bool has_role(ParameterRole role) const;
  double parameter(ParameterRole role) const;
  Marginal with_parameter(ParameterRole role, double value) const;

  // d/d(parameter) of ln pdf at x.
  double log_density_derivative(ParameterRole role, double x,
                                const ScoreOptions& opt = {}) const;

  // Lognormal underlying normal parameters (mu~, sigma~).
  double log_mu() const;
  double log_sigma() const;

  std::string describe() const;
  bool operator==(const Marginal&) const = default;

 private:
  Marginal(MarginalKind k, std::vector<double> p);
  void validate() const;

  MarginalKind kind_;
  std::vector<double> p_;
};

std::string to_string(MarginalKind k);
MarginalKind marginal_kind_from_string(const std::string& s);
std::string to_string(ParameterRole r);
ParameterRole parameter_role_from_string(const std::string& s);

struct BindingTarget {
  int variable;  // 0-based input index
  ParameterRole role;
};

// Associates design variable `design_index` with one or more
// (input, parameter) pairs; a shared design parameter lists every input.
struct DesignBinding {
  int design_index = 0;
  std::string name;
  std::vector<BindingTarget> targets;
};

// Throws std::invalid_argument if a target is out of range, the role is
// not a parameter of the marginal, or targets disagree on the current value.
void validate_binding(const DesignBinding& b, const std::vector<Marginal>& inputs);
double design_value(const DesignBinding& b, const std::vector<Marginal>& inputs);
std::vector<Marginal> perturb_design(const DesignBinding& b, const std::vector<Marginal>& inputs,
                                     double new_value);

// Score of the joint density: sum of log-density derivatives of all targets.
double joint_score(const DesignBinding& b, const std::vector<Marginal>& inputs,
                   const double* x, const ScoreOptions& opt = {});

}  // namespace pdduq
