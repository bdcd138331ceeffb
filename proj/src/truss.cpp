#include "pdduq/truss.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace pdduq {

TrussDefinition default_truss21(double height) {
  constexpr double bay = 20.0;
  TrussDefinition t;
  // Bottom chord nodes 1,3,5,7,9,11,12 and top chord nodes 2,4,6,8,10
  // (1-based), one bay apart.
  t.nodes = {{0, 0},          {bay, height},     {bay, 0},          {2 * bay, height},
             {2 * bay, 0},    {3 * bay, height}, {3 * bay, 0},      {4 * bay, height},
             {4 * bay, 0},    {5 * bay, height}, {5 * bay, 0},      {6 * bay, 0}};
  auto M = [](int a, int b) { return TrussDefinition::Member{a - 1, b - 1}; };
  t.members = {// bottom chord
               M(1, 3), M(3, 5), M(5, 7), M(7, 9), M(9, 11), M(11, 12),
               // end posts and top chord
               M(1, 2), M(2, 4), M(4, 6), M(6, 8), M(8, 10), M(10, 12),
               // verticals
               M(2, 3), M(4, 5), M(6, 7), M(8, 9), M(10, 11),
               // interior diagonals, sloping down toward mid-span
               M(2, 5), M(4, 7), M(8, 7), M(10, 9)};
  t.supports = {{0, true, true}, {11, false, true}};
  t.loads = {{2, 0, -10000}, {4, 0, -10000}, {6, 0, -16000}, {8, 0, -10000}, {10, 0, -10000}};
  t.youngs_modulus = 1e7;
  t.monitor_node = 6;
  t.d_allow = 0.266;
  t.sigma_allow = 37680.0;
  t.mean_areas = {2, 2, 2, 2, 2, 2, 10, 10, 10, 10, 10, 10, 3, 3, 3, 3, 3, 1, 1, 1, 1};
  return t;
}

TrussDefinition truss_from_json(const nlohmann::json& j) {
  TrussDefinition t;
  for (const auto& n : j.at("nodes")) t.nodes.push_back({n.at(0).get<double>(), n.at(1).get<double>()});
  const int nn = static_cast<int>(t.nodes.size());
  auto node = [&](const nlohmann::json& v, const char* what) {
    int k = v.get<int>();
    if (k < 1 || k > nn) throw std::invalid_argument(std::string("truss: ") + what + " node out of range");
    return k - 1;
  };
  for (const auto& m : j.at("members")) t.members.push_back({node(m.at(0), "member"), node(m.at(1), "member")});
  for (const auto& s : j.at("supports"))
    t.supports.push_back({node(s.at("node"), "support"), s.value("fix_x", false), s.value("fix_y", false)});
  for (const auto& l : j.at("loads"))
    t.loads.push_back({node(l.at("node"), "load"), l.value("fx", 0.0), l.value("fy", 0.0)});
  t.youngs_modulus = j.value("youngs_modulus", 1e7);
  t.monitor_node = node(j.at("monitor_node"), "monitor");
  t.d_allow = j.value("d_allow", 0.266);
  t.sigma_allow = j.value("sigma_allow", 37680.0);
  t.mean_areas = j.at("mean_areas").get<std::vector<double>>();
  if (t.mean_areas.size() != t.members.size())
    throw std::invalid_argument("truss: mean_areas must list one area per member");
  return t;
}

nlohmann::json truss_to_json(const TrussDefinition& t) {
  nlohmann::json j;
  for (const auto& n : t.nodes) j["nodes"].push_back({n.x, n.y});
  for (const auto& m : t.members) j["members"].push_back({m.a + 1, m.b + 1});
  for (const auto& s : t.supports)
    j["supports"].push_back({{"node", s.node + 1}, {"fix_x", s.fix_x}, {"fix_y", s.fix_y}});
  for (const auto& l : t.loads) j["loads"].push_back({{"node", l.node + 1}, {"fx", l.fx}, {"fy", l.fy}});
  j["youngs_modulus"] = t.youngs_modulus;
  j["monitor_node"] = t.monitor_node + 1;
  j["d_allow"] = t.d_allow;
  j["sigma_allow"] = t.sigma_allow;
  j["mean_areas"] = t.mean_areas;
  return j;
}

TrussResponse solve_truss(const TrussDefinition& t, const std::vector<double>& areas) {
  const int nn = static_cast<int>(t.nodes.size());
  const int nm = static_cast<int>(t.members.size());
  if (static_cast<int>(areas.size()) != nm) throw std::invalid_argument("truss: one area per member");
  const int nd = 2 * nn;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nd, nd);
  std::vector<double> len(nm), cs(nm), sn(nm);
  for (int e = 0; e < nm; ++e) {
    if (!(areas[e] > 0.0)) throw std::domain_error("truss: member area must be positive");
    const auto& a = t.nodes[t.members[e].a];
    const auto& b = t.nodes[t.members[e].b];
    double dx = b.x - a.x, dy = b.y - a.y;
    len[e] = std::hypot(dx, dy);
    cs[e] = dx / len[e];
    sn[e] = dy / len[e];
    double k = t.youngs_modulus * areas[e] / len[e];
    double g[4] = {-cs[e], -sn[e], cs[e], sn[e]};
    int dof[4] = {2 * t.members[e].a, 2 * t.members[e].a + 1, 2 * t.members[e].b, 2 * t.members[e].b + 1};
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) K(dof[p], dof[q]) += k * g[p] * g[q];
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(nd);
  for (const auto& l : t.loads) {
    f(2 * l.node) += l.fx;
    f(2 * l.node + 1) += l.fy;
  }
  std::vector<bool> fixed(nd, false);
  for (const auto& s : t.supports) {
    if (s.fix_x) fixed[2 * s.node] = true;
    if (s.fix_y) fixed[2 * s.node + 1] = true;
  }
  std::vector<int> freedofs;
  for (int d = 0; d < nd; ++d)
    if (!fixed[d]) freedofs.push_back(d);
  const int nf = static_cast<int>(freedofs.size());
  Eigen::MatrixXd Kff(nf, nf);
  Eigen::VectorXd ff(nf);
  for (int p = 0; p < nf; ++p) {
    ff(p) = f(freedofs[p]);
    for (int q = 0; q < nf; ++q) Kff(p, q) = K(freedofs[p], freedofs[q]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(Kff);
  if (llt.info() != Eigen::Success) throw std::runtime_error("truss: stiffness matrix is singular");
  Eigen::VectorXd uf = llt.solve(ff);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nd);
  for (int p = 0; p < nf; ++p) u(freedofs[p]) = uf(p);

  TrussResponse r;
  r.displacements.assign(u.data(), u.data() + nd);
  Eigen::VectorXd reac = K * u - f;
  r.reactions.assign(nd, 0.0);
  for (int d = 0; d < nd; ++d)
    if (fixed[d]) r.reactions[d] = reac(d);
  r.forces.resize(nm);
  r.stresses.resize(nm);
  for (int e = 0; e < nm; ++e) {
    int a = t.members[e].a, b = t.members[e].b;
    double elong = cs[e] * (u(2 * b) - u(2 * a)) + sn[e] * (u(2 * b + 1) - u(2 * a + 1));
    r.stresses[e] = t.youngs_modulus * elong / len[e];
    r.forces[e] = r.stresses[e] * areas[e];
    r.sigma_max = std::max(r.sigma_max, std::abs(r.stresses[e]));
  }
  r.v_monitor = u(2 * t.monitor_node + 1);
  return r;
}

PerformanceModel truss_model(const TrussDefinition& t) {
  const int nm = static_cast<int>(t.members.size());
  return PerformanceModel("truss", nm, 2, [t](std::span<const double> x, std::span<double> y) {
    TrussResponse r = solve_truss(t, std::vector<double>(x.begin(), x.end()));
    y[0] = 1.0 - std::abs(r.v_monitor) / t.d_allow;
    y[1] = 1.0 - r.sigma_max / t.sigma_allow;
  });
}

}  // namespace pdduq
