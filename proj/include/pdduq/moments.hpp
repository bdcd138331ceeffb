#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdduq/distributions.hpp"
#include "pdduq/orthopoly.hpp"
#include "pdduq/pdd.hpp"

namespace pdduq {

// Fourier expansion of one variable's log-density derivative in its own
// orthonormal basis: s(x) ~ s_empty + sum_{j=1..m'} D[j-1] psi_j(x).
struct ScoreTerm {
  int variable = 0;
  ParameterRole role = ParameterRole::Mean;
  // Marginal the expansion was built for, used to detect basis mismatch.
  MarginalKind kind = MarginalKind::Gaussian;
  std::vector<double> params;
  double s_empty = 0.0;
  std::vector<double> D;
};

// Expansion of the joint score for one design variable; only targeted
// inputs appear since all others have a zero score.
struct ScoreExpansion {
  int design_index = 0;
  std::string name;
  int m_prime = 0;
  std::vector<ScoreTerm> terms;
};

// Projection of the univariate score onto the given basis, degrees 1..m'.
ScoreTerm project_score(const Marginal& mg, const RecurrenceTable& basis, ParameterRole role,
                        int m_prime, const ScoreOptions& opt = {});
// Uses the memoized basis of each targeted input.
ScoreExpansion build_score_expansion(const DesignBinding& b, const std::vector<Marginal>& inputs,
                                     int m_prime, const ScoreOptions& opt = {});
std::vector<ScoreExpansion> build_score_expansions(const std::vector<DesignBinding>& b,
                                                   const std::vector<Marginal>& inputs,
                                                   int m_prime, const ScoreOptions& opt = {});

// d m1 / d d_k and d m2 / d d_k of the surrogate, one entry per expansion.
std::vector<double> mean_sensitivity(const PddSurrogate& s, const std::vector<ScoreExpansion>& scores);
std::vector<double> second_moment_sensitivity(const PddSurrogate& s,
                                              const std::vector<ScoreExpansion>& scores);

enum class HigherMomentMethod { OptionI, OptionII };
std::string to_string(HigherMomentMethod m);
HigherMomentMethod higher_moment_method_from_string(const std::string& s);

struct MomentOptions {
  int Q = 4;      // highest moment order
  int m_prime = 2;  // score expansion order for orders 1, 2 and Option II
  HigherMomentMethod method = HigherMomentMethod::OptionI;
  int S_bar = 0;  // Option II truncation; 0 -> S
  int m_bar = 0;  // Option II order; 0 -> 2m
  ScoreOptions score;
  unsigned threads = 0;
  // Option I guard: largest integration dimension and total grid points.
  int max_dimension = 6;
  std::uint64_t max_grid_points = 400'000'000;
};

struct MomentReport {
  std::vector<double> moments;                    // raw moments, order 1..Q
  std::vector<std::vector<double>> sensitivities;  // [order-1][design]
  std::vector<std::string> methods;                // per order
  std::vector<std::string> design_names;
  std::uint64_t grid_points = 0;  // integrand evaluations spent on orders > 2

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// Raw moments of the surrogate for orders 1..Q and their design
// sensitivities; orders 1 and 2 are analytic, higher orders follow
// opt.method. With no bindings only moments are computed.
MomentReport compute_moments(const PddSurrogate& s, const std::vector<DesignBinding>& bindings,
                             const MomentOptions& opt);

double higher_moment(const PddSurrogate& s, int r, const MomentOptions& opt);
std::vector<double> higher_moment_sensitivity(const PddSurrogate& s, int r,
                                              const std::vector<DesignBinding>& bindings,
                                              const MomentOptions& opt);

}  // namespace pdduq
