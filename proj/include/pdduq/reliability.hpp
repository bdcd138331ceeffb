#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdduq/distributions.hpp"
#include "pdduq/model.hpp"
#include "pdduq/moments.hpp"
#include "pdduq/pdd.hpp"

namespace pdduq {

// Fourth-order truncated cumulant generating function
// K(t) = sum_{r=1..4} kappa_r t^r / r!; lower orders pad with zeros.
struct CgfModel {
  std::array<double, 4> kappa{};
  int Q = 4;

  double K(double t) const;
  double K1(double t) const;  // K'
  double K2(double t) const;  // K''
  double K3(double t) const;  // K'''
};

// Raw moments (orders 1..Q) to cumulants. Throws when the variance is not
// positive.
std::vector<double> cumulants_from_moments(const std::vector<double>& m);
// d kappa_r / d d_k from d m_r / d d_k; indices [r-1][k].
std::vector<std::vector<double>> cumulant_sensitivities(const std::vector<double>& m,
                                                         const std::vector<double>& kappa,
                                                         const std::vector<std::vector<double>>& dm);
// Q in {2,3,4}; higher orders have no admissible saddlepoint interval.
CgfModel make_cgf(const std::vector<double>& kappa);

struct SaddlepointBracket {
  double t_l = 0.0, t_u = 0.0;  // may be infinite
  int case_id = 0;              // 1..8
  std::optional<double> excluded_point;
};
SaddlepointBracket saddlepoint_bracket(const CgfModel& cgf);

class SaddlepointInfeasible : public std::domain_error {
 public:
  SaddlepointInfeasible(double xi, double lo, double hi);
  double xi, attainable_lo, attainable_hi;
};

// Root of K'(t) = xi inside the bracket.
double solve_saddlepoint(const CgfModel& cgf, const SaddlepointBracket& b, double xi);

struct SpaPoint {
  double xi = 0.0, t_s = 0.0, w = 0.0, v = 0.0, cdf = 0.0, pdf = 0.0;
  bool limit_branch = false;
};
SpaPoint spa_evaluate(const CgfModel& cgf, double xi);
double spa_pdf(const CgfModel& cgf, double xi);
double spa_cdf(const CgfModel& cgf, double xi);
double spa_failure_probability(const CgfModel& cgf);
// Saddlepoints closer to zero than this use the limiting expansion.
double spa_limit_threshold(const CgfModel& cgf);
// dF(xi)/d d_k from cumulant sensitivities [r-1][k].
std::vector<double> spa_cdf_sensitivity(const CgfModel& cgf, const std::vector<std::vector<double>>& dkappa,
                                        double xi);

enum class EventKind { Component, Series, Parallel };
std::string to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

// Failure is y < 0 for the listed responses (all when empty), combined as a
// union (series) or intersection (parallel).
struct EventSpec {
  EventKind kind = EventKind::Component;
  std::vector<int> outputs;
};

struct McsOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  ScoreOptions score;
};

struct ReliabilityReport {
  std::string method;
  double p_f = 0.0;
  double p_f_se = 0.0;  // zero for PDD-SPA
  std::vector<std::string> design_names;
  std::vector<double> sensitivities;
  std::vector<double> sensitivity_se;  // empty for PDD-SPA
  std::uint64_t samples = 0;
  std::uint64_t model_evaluations = 0;
  nlohmann::json diagnostics = nlohmann::json::object();

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// PDD-SPA for the component event y < xi using raw moments of order 1..Q.
ReliabilityReport spa_reliability(const PddSurrogate& s, const std::vector<DesignBinding>& bindings,
                                  const MomentOptions& mopt, double xi = 0.0);
// Same, from precomputed moments and sensitivities.
ReliabilityReport spa_reliability(const MomentReport& moments, double xi = 0.0);
// Rejects series and parallel events.
ReliabilityReport spa_reliability(const EventSpec& e, const std::vector<PddSurrogate>& s,
                                  const std::vector<DesignBinding>& bindings, const MomentOptions& mopt,
                                  double xi = 0.0);

// PDD-MCS: samples the inputs and evaluates only the surrogates.
ReliabilityReport mcs_failure_probability(const EventSpec& e, const std::vector<PddSurrogate>& s,
                                          const std::vector<DesignBinding>& bindings, const McsOptions& opt);
std::vector<double> mcs_sensitivity(const EventSpec& e, const std::vector<PddSurrogate>& s,
                                    const std::vector<DesignBinding>& bindings, const McsOptions& opt);
// Crude MCS with score-function sensitivities on the original model.
ReliabilityReport crude_mcs_sf(const EventSpec& e, const PerformanceModel& y, const std::vector<Marginal>& inputs,
                               const std::vector<DesignBinding>& bindings, const McsOptions& opt);
// Crude MCS with forward finite differences (common random numbers).
ReliabilityReport crude_mcs_fd(const EventSpec& e, const PerformanceModel& y, const std::vector<Marginal>& inputs,
                               const std::vector<DesignBinding>& bindings, const McsOptions& opt,
                               double relative_step = 1e-3);

struct CdfReport {
  std::string method;
  std::vector<double> xi, cdf, se;
  std::vector<std::string> design_names;
  std::vector<std::vector<double>> sensitivities;  // [xi][k]
  std::uint64_t samples = 0;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

CdfReport mcs_cdf(const PddSurrogate& s, const std::vector<double>& xi, const std::vector<DesignBinding>& bindings,
                  const McsOptions& opt);
CdfReport crude_mcs_cdf(const PerformanceModel& y, int output, const std::vector<Marginal>& inputs,
                        const std::vector<double>& xi, const std::vector<DesignBinding>& bindings,
                        const McsOptions& opt);
// SPA curve; points outside the attainable range are reported as NaN.
CdfReport spa_cdf_curve(const MomentReport& moments, const std::vector<double>& xi);

}  // namespace pdduq
