#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdduq {

class ModelEvaluationError : public std::runtime_error {
 public:
  ModelEvaluationError(const std::string& what, std::vector<double> point)
      : std::runtime_error(what), point_(std::move(point)) {}
  const std::vector<double>& point() const { return point_; }

 private:
  std::vector<double> point_;
};

// A deterministic map R^N -> R^K. Evaluation is counted; the counter is
// shared between copies so a model handed to several algorithms reports a
// single total.
class PerformanceModel {
 public:
  using Fn = std::function<void(std::span<const double> x, std::span<double> y)>;

  PerformanceModel() = default;
  PerformanceModel(std::string name, int dimension, int outputs, Fn fn);

  const std::string& name() const { return name_; }
  int dimension() const { return dimension_; }
  int outputs() const { return outputs_; }

  void evaluate(std::span<const double> x, std::span<double> y) const;
  double operator()(std::span<const double> x) const;

  std::uint64_t evaluations() const { return counter_ ? counter_->load() : 0; }
  void reset_count() const {
    if (counter_) counter_->store(0);
  }

 private:
  std::string name_;
  int dimension_ = 0;
  int outputs_ = 1;
  Fn fn_;
  std::shared_ptr<std::atomic<std::uint64_t>> counter_;
};

}  // namespace pdduq
