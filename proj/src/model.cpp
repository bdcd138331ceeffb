#include "pdduq/model.hpp"

#include <cmath>

namespace pdduq {

PerformanceModel::PerformanceModel(std::string name, int dimension, int outputs, Fn fn)
    : name_(std::move(name)),
      dimension_(dimension),
      outputs_(outputs),
      fn_(std::move(fn)),
      counter_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  if (dimension_ < 1) throw std::invalid_argument("model dimension must be >= 1");
  if (outputs_ < 1) throw std::invalid_argument("model must have at least one output");
}

void PerformanceModel::evaluate(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) != dimension_ || static_cast<int>(y.size()) != outputs_)
    throw std::invalid_argument("model '" + name_ + "': argument size mismatch");
  counter_->fetch_add(1, std::memory_order_relaxed);
  try {
    fn_(x, y);
  } catch (const ModelEvaluationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelEvaluationError("model '" + name_ + "' failed: " + e.what(),
                               std::vector<double>(x.begin(), x.end()));
  }
  for (double v : y)
    if (!std::isfinite(v))
      throw ModelEvaluationError("model '" + name_ + "' returned a non-finite value",
                                 std::vector<double>(x.begin(), x.end()));
}

double PerformanceModel::operator()(std::span<const double> x) const {
  if (outputs_ != 1) throw std::logic_error("model '" + name_ + "' has several outputs");
  double y = 0.0;
  evaluate(x, std::span<double>(&y, 1));
  return y;
}

}  // namespace pdduq
