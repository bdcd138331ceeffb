#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pdduq/distributions.hpp"
#include "pdduq/model.hpp"
#include "pdduq/moments.hpp"
#include "pdduq/reliability.hpp"

namespace pdduq {

// Validation failure; what() starts with the offending field path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& msg)
      : std::invalid_argument(path + ": " + msg), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct ReliabilityRequest {
  std::string method;  // spa or mcs
  EventSpec event;
  double xi = 0.0;  // spa threshold, event y < xi
};

struct CdfRequest {
  std::string method;  // spa or mcs
  int output = 0;
  std::vector<double> xi;
};

struct AnalysisConfig {
  nlohmann::json model_spec;
  PerformanceModel model;
  std::vector<Marginal> inputs;
  std::vector<DesignBinding> bindings;
  PddOptions pdd;  // threads filled at run time
  MomentOptions moments;
  bool want_moments = false;
  std::vector<ReliabilityRequest> reliability;
  std::optional<CdfRequest> cdf;
  std::string baseline = "none";  // none, mcs-sf or mcs-fd
  McsOptions mcs;
  std::string output_directory = ".";
  // Effective configuration with defaults filled in, echoed into outputs.
  nlohmann::json effective;
};

// base_dir resolves relative data_file paths.
AnalysisConfig parse_config(const nlohmann::json& j, const std::string& base_dir = ".");
PerformanceModel builtin_model(const nlohmann::json& spec, const std::string& base_dir, const std::string& path);

struct RunOutput {
  std::vector<std::pair<std::string, std::string>> files;
  std::string summary;
};
RunOutput run_analysis(const AnalysisConfig& c, unsigned threads);

}  // namespace pdduq
