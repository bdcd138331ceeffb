#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdduq/model.hpp"

namespace pdduq {

// y = a1'x + a2' sin x + a3' cos x + x'Mx
struct TrigPolyCoefficients {
  std::vector<double> a1, a2, a3;
  std::vector<std::vector<double>> M;
  int dimension() const { return static_cast<int>(a1.size()); }
};

// Seeded stand-in for the original 15-dimensional coefficient set.
TrigPolyCoefficients default_trig_poly_coefficients(std::uint64_t seed = 15);
TrigPolyCoefficients trig_poly_from_json(const nlohmann::json& j);
nlohmann::json trig_poly_to_json(const TrigPolyCoefficients& c);

PerformanceModel trig_poly_model(const TrigPolyCoefficients& c);
// y = 500 - (x1+x2)^3 + x1 - x2 - x3 + x1 x2 x3 - x4
PerformanceModel cubic4_model();
// y = 1/(1000 + sum x) - 1/(1000 + 3 sqrt(N))
PerformanceModel gauss_sum_model(int N);
// y = x1 + 2x2 + 2x3 + x4 - 5x5 - 5x6
PerformanceModel linear6_model();

// First two moments of the trig-polynomial under iid N(mu, sigma^2) inputs
// and their derivatives, from closed-form Gaussian expectations.
struct TrigPolyMoments {
  double m1, m2;
  double dm1_dmu, dm1_dsigma;
  double dm2_dmu, dm2_dsigma;
};
TrigPolyMoments trig_poly_exact_moments(const TrigPolyCoefficients& c, double mu, double sigma);

// Example-3 closed forms for P[y < 0] with iid N(mu, sigma^2) inputs.
struct GaussSumReliability {
  double pf, dpf_dmu, dpf_dsigma;
};
GaussSumReliability gauss_sum_exact(int N, double mu, double sigma);

}  // namespace pdduq
