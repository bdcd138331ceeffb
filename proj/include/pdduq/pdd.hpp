#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdduq/distributions.hpp"
#include "pdduq/model.hpp"
#include "pdduq/orthopoly.hpp"

namespace pdduq {

// Variables are 0-based in the API and 1-based in serialized documents.
struct TermKey {
  std::vector<int> vars;
  std::vector<int> degrees;
  auto operator<=>(const TermKey&) const = default;
  bool operator==(const TermKey&) const = default;
};

// All keys with 1 <= |u| <= S and degrees in 1..m, ordered by subset size,
// then subset, then degree tuple.
std::vector<TermKey> enumerate_terms(int N, int S, int m);
std::uint64_t term_count(int N, int S, int m);
// Upper bound on distinct model evaluations for dimension-reduction
// integration with the given R and n.
std::uint64_t evaluation_bound(int N, int R, int n);

// Coefficients of one subset u for all degree tuples, lexicographic in the
// tuple with the first variable most significant.
struct PddComponent {
  std::vector<int> vars;
  std::vector<double> coeffs;
};

class PddSurrogate {
 public:
  PddSurrogate() = default;
  // Builds an empty surrogate (all coefficients zero) over the given inputs.
  PddSurrogate(std::vector<Marginal> inputs, int S, int m, int R, int n,
               std::vector<double> reference);

  int N() const { return static_cast<int>(inputs_.size()); }
  int S() const { return S_; }
  int m() const { return m_; }
  int R() const { return R_; }
  int n() const { return n_; }
  const std::vector<Marginal>& inputs() const { return inputs_; }
  const std::vector<double>& reference() const { return reference_; }
  const RecurrenceTable& basis(int i) const { return *bases_[i]; }
  std::shared_ptr<const RecurrenceTable> basis_ptr(int i) const { return bases_[i]; }

  double y_empty() const { return y_empty_; }
  void set_y_empty(double v) { y_empty_ = v; }
  const std::vector<PddComponent>& components() const { return components_; }
  std::vector<PddComponent>& components() { return components_; }
  // -1 if the subset is not part of the truncation.
  int component_index(const std::vector<int>& vars) const;
  double coefficient(const TermKey& key) const;
  void set_coefficient(const TermKey& key, double value);
  std::vector<std::pair<TermKey, double>> terms() const;
  std::size_t term_count() const;

  double evaluate(std::span<const double> x) const;
  // psi must hold N*(m+1) values laid out as psi[i*(m+1)+j].
  void fill_psi(std::span<const double> x, double* psi) const;
  double evaluate_psi(const double* psi) const;

  double mean() const { return y_empty_; }
  double second_moment() const;
  double variance() const;

 private:
  std::vector<Marginal> inputs_;
  int S_ = 0, m_ = 0, R_ = 0, n_ = 0;
  std::vector<double> reference_;
  std::vector<std::shared_ptr<const RecurrenceTable>> bases_;
  double y_empty_ = 0.0;
  std::vector<PddComponent> components_;
  std::map<std::vector<int>, int> index_;

  void index_components();
};

struct PddOptions {
  int S = 1;
  int m = 1;
  int R = 0;  // 0 -> S
  int n = 0;  // 0 -> m+1
  std::vector<double> reference;  // empty -> input means
  unsigned threads = 0;
};

struct PddBuild {
  std::vector<PddSurrogate> surrogates;  // one per model output
  std::uint64_t distinct_points = 0;
  std::uint64_t evaluation_bound = 0;
};

// Dimension-reduction integration of the PDD coefficients.
PddBuild compute_coefficients(const PerformanceModel& y, const std::vector<Marginal>& inputs,
                              const PddOptions& opt);

nlohmann::json marginal_to_json(const Marginal& m);
Marginal marginal_from_json(const nlohmann::json& j);
nlohmann::json surrogate_to_json(const PddSurrogate& s);
PddSurrogate surrogate_from_json(const nlohmann::json& j);

}  // namespace pdduq
