#pragma once

#include <memory>
#include <vector>

#include "pdduq/distributions.hpp"

namespace pdduq {

enum class PolyFamily { Hermite, Laguerre, Legendre, Numeric };

// Recurrence coefficients of the monic orthogonal polynomials of the
// standardized variable z = (x - shift) / scale. beta[0] is the total mass.
// Orthonormal polynomials have positive leading coefficients.
struct RecurrenceTable {
  PolyFamily family = PolyFamily::Numeric;
  double shift = 0.0;
  double scale = 1.0;
  std::vector<double> alpha;  // alpha_0 .. alpha_mmax
  std::vector<double> beta;   // beta_0 .. beta_mmax

  int max_degree() const { return static_cast<int>(alpha.size()) - 1; }
  double standardize(double x) const { return (x - shift) / scale; }
  // out[0..degree] = psi_0(x) .. psi_degree(x)
  void evaluate(double x, int degree, double* out) const;
  std::vector<double> evaluate(double x, int degree) const;
  double evaluate(int j, double x) const;
};

struct GaussRule {
  std::vector<double> nodes;    // x-space, ascending
  std::vector<double> weights;  // sum to 1
};

RecurrenceTable build_recurrence(const Marginal& m, int m_max);

// Shared, memoized tables. The degree is rounded up to a fixed bucket so
// every caller asking for a given marginal sees bit-identical coefficients.
std::shared_ptr<const RecurrenceTable> basis_table(const Marginal& m, int min_degree);

// n-point Gauss rule from the Jacobi matrix; requires n <= max_degree + 1.
GaussRule gauss_rule(const RecurrenceTable& t, int n);

// Fine composite Gauss-Legendre discretization of the marginal accurate for
// polynomial integrands up to the given degree (and smooth functions thereof).
GaussRule dense_rule(const Marginal& m, int degree, int panels);
// Dense rule at the resolution where the recurrence of `degree` has settled.
GaussRule converged_dense_rule(const Marginal& m, int degree);

// E[psi_j1 psi_j2 psi_j3]; closed forms where they have been validated,
// otherwise Gauss quadrature with ceil((j1+j2+j3+1)/2) nodes.
double triple_product(const RecurrenceTable& t, int j1, int j2, int j3);
double triple_product_quadrature(const RecurrenceTable& t, int j1, int j2, int j3);

double hermite_triple_closed_form(int j1, int j2, int j3);
// For the standard Laguerre polynomials L_j (leading coefficient (-1)^j / j!).
double laguerre_triple_closed_form(int j1, int j2, int j3);
double legendre_triple_closed_form(int j1, int j2, int j3);

// True when the closed form agrees with quadrature to 1e-9 for all
// degree triples up to 8. Computed once per process.
bool closed_form_validated(PolyFamily f);

}  // namespace pdduq
