#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pdduq/model.hpp"

namespace pdduq {

// Plane pin-jointed truss. Node and member numbers are 1-based in JSON and
// 0-based here.
struct TrussDefinition {
  struct Node {
    double x, y;
  };
  struct Member {
    int a, b;
  };
  struct Support {
    int node;
    bool fix_x, fix_y;
  };
  struct Load {
    int node;
    double fx, fy;
  };
  std::vector<Node> nodes;
  std::vector<Member> members;
  std::vector<Support> supports;
  std::vector<Load> loads;
  double youngs_modulus = 1e7;
  int monitor_node = 0;  // node whose vertical displacement is checked
  double d_allow = 0.266;
  double sigma_allow = 37680.0;
  std::vector<double> mean_areas;  // nominal member areas
};

struct TrussResponse {
  std::vector<double> displacements;  // 2 per node
  std::vector<double> forces;         // axial, tension positive
  std::vector<double> stresses;
  std::vector<double> reactions;  // 2 per node, zero where free
  double v_monitor = 0.0;
  double sigma_max = 0.0;
};

// Six-bay twenty-one-bar truss reconstructed from the textual description;
// six 20 in bays (120 in span); panel height is a parameter. The default
// height puts the nominal system failure probability near 8e-3.
TrussDefinition default_truss21(double height = 30.6);
TrussDefinition truss_from_json(const nlohmann::json& j);
nlohmann::json truss_to_json(const TrussDefinition& t);

TrussResponse solve_truss(const TrussDefinition& t, const std::vector<double>& areas);

// Outputs y1 = 1 - |v|/d_allow and y2 = 1 - |sigma_max|/sigma_allow.
PerformanceModel truss_model(const TrussDefinition& t);

}  // namespace pdduq
