#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pdduq/distributions.hpp"
#include "pdduq/model.hpp"
#include "pdduq/models.hpp"
#include "pdduq/truss.hpp"

namespace pdduq {

// Model, input marginals and design bindings of a benchmark problem.
struct ExampleSetup {
  PerformanceModel model;
  std::vector<Marginal> inputs;
  std::vector<DesignBinding> bindings;
};

// One design variable bound to the same parameter of every input.
DesignBinding shared_binding(int design_index, std::string name, int N, ParameterRole role);

// Trig-polynomial, N(mu, sigma^2) inputs, d = (mu, sigma).
ExampleSetup example1_setup(const TrigPolyCoefficients& c, double mu = 0.0, double sigma = 1.0);
// Cubic in four inputs: exponential(lambda = 1) with d = lambda, or
// Weibull(lambda = 1, k = 0.5) with d = (lambda, k).
ExampleSetup example2_setup(bool weibull);
// Gaussian sum, N(mu, sigma^2) inputs, d = (mu, sigma).
ExampleSetup example3_setup(int N, double mu = 0.0, double sigma = 1.0);
// Linear function of six lognormals with coefficient of variation c,
// d = (mu_1..mu_6, sigma_1..sigma_6).
ExampleSetup example4_setup(double c);
// Truss with lognormal member areas (10% coefficient of variation), d = mean areas.
ExampleSetup example5_setup(const TrussDefinition& t);

struct ReproduceOptions {
  int S = 0;                  // 0 -> every truncation the example uses
  int m = 0;                  // 0 -> example default
  std::uint64_t samples = 0;  // 0 -> example default
  std::uint64_t seed = 1;
  std::string method = "all";  // spa, mcs or all
  std::string baseline;        // "" -> example default; none, mcs-sf or mcs-fd
  unsigned threads = 0;
  std::string trig_poly_file;  // optional coefficient data for example1
};

struct ReproduceResult {
  std::string id;
  std::vector<std::pair<std::string, std::string>> files;  // (file name, contents)
  std::string summary;
};

std::vector<std::string> example_ids();
ReproduceResult reproduce(const std::string& id, const ReproduceOptions& opt);

}  // namespace pdduq
