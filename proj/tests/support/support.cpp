#include "support/support.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace testsup {

TimeProfile random_profile(Rng& rng, double t_end, double lo, double hi, int pieces) {
  std::vector<std::array<double, 2>> pts;
  for (int k = 0; k <= pieces; ++k)
    pts.push_back({t_end * k / pieces, uniform(rng, lo, hi)});
  return TimeProfile::from_points(pts);
}

Network random_network(Rng& rng, const NetGenConfig& cfg) {
  Network net;
  net.horizon = cfg.horizon;
  int n = 2 + static_cast<int>(uniform_index(
                  rng, static_cast<std::size_t>(cfg.max_nodes - 1)));
  for (int i = 0; i < n; ++i) {
    NetworkNode node;
    node.id = "n" + std::to_string(i);
    net.nodes.push_back(node);
  }

  int eid = 0;
  auto add_edge = [&](int a, int b) {
    NetworkEdge e;
    e.id = "e" + std::to_string(eid++);
    e.from = net.nodes[static_cast<std::size_t>(a)].id;
    e.to = net.nodes[static_cast<std::size_t>(b)].id;
    e.length = uniform(rng, 0.5, 3.0);
    if (cfg.weymouth)
      e.model = DissipationModel::gas_weymouth(uniform(rng, 0.02, 0.2), cfg.delta);
    else
      e.model = DissipationModel::linear(uniform(rng, 0.2, 2.0));
    net.edges.push_back(e);
  };
  // spanning tree, then a few chords
  for (int i = 1; i < n; ++i)
    add_edge(static_cast<int>(uniform_index(rng, static_cast<std::size_t>(i))), i);
  for (int k = 0; k < n / 3; ++k) {
    int a = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n)));
    int b = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n)));
    if (a != b) add_edge(a, b);
  }

  if (cfg.with_injections) {
    for (auto& node : net.nodes) {
      if (uniform01(rng) >= 0.7) continue;
      node.has_injection = true;
      node.injection.nominal = random_profile(rng, cfg.horizon, -0.2, 0.2);
      if (cfg.with_envelopes) {
        auto lo = node.injection.nominal.points();
        auto hi = lo;
        for (auto& p : lo) p[1] -= uniform(rng, 0.0, 0.1);
        for (auto& p : hi) p[1] += uniform(rng, 0.0, 0.1);
        node.injection.lower = TimeProfile::from_points(lo);
        node.injection.upper = TimeProfile::from_points(hi);
      }
    }
  }

  if (cfg.with_actuators) {
    for (const auto& e : net.edges) {
      for (Side s : {Side::Tail, Side::Head}) {
        if (uniform01(rng) >= 0.3) continue;
        Actuator a;
        a.edge = e.id;
        a.side = s;
        a.control = random_profile(rng, cfg.horizon, 0.7, 1.5);
        net.actuators.push_back(a);
      }
    }
  }
  return net;
}

double stable_step(const RefinedNetwork& rnet, double rho_val, double alpha,
                   double t_end) {
  Simulator sim(rnet);
  std::size_t n = sim.size();
  std::vector<double> rho(n, rho_val);
  ConstantControls cc(std::vector<double>(sim.actuator_count(), alpha));
  std::vector<double> jac;
  sim.state_jacobian(0.0, rho.data(), &cc, jac);
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::fabs(jac[i * n + j]);
    bound = std::max(bound, s);
  }
  double step = t_end / 50.0;
  if (bound > 0.0) step = std::min(step, 1.0 / bound);
  return step;
}

void fd_state_jacobian(Simulator& sim, double t, const std::vector<double>& rho,
                       const ControlSource* controls, const InjectionSet& inj,
                       double h, std::vector<double>& jac) {
  std::size_t n = sim.size();
  jac.assign(n * n, 0.0);
  std::vector<double> rp(rho), rm(rho), fp(n), fm(n);
  for (std::size_t j = 0; j < n; ++j) {
    double hj = h * std::max(1.0, std::fabs(rho[j]));
    rp[j] = rho[j] + hj;
    rm[j] = rho[j] - hj;
    sim.rhs(t, rp.data(), controls, inj, fp.data());
    sim.rhs(t, rm.data(), controls, inj, fm.data());
    for (std::size_t i = 0; i < n; ++i)
      jac[i * n + j] = (fp[i] - fm[i]) / (2.0 * hj);
    rp[j] = rho[j];
    rm[j] = rho[j];
  }
}

std::vector<double> fd_injection_jacobian(Simulator& sim, double t,
                                          const std::vector<double>& rho,
                                          const ControlSource* controls,
                                          const InjectionSet& inj, double h) {
  std::size_t n = sim.size();
  std::vector<double> out(n), qp(n, 0.0), qm(n, 0.0), fp(n), fm(n);
  for (std::size_t j = 0; j < n; ++j) {
    qp[j] = h;
    qm[j] = -h;
    sim.rhs(t, rho.data(), controls, inj, fp.data(), qp.data());
    sim.rhs(t, rho.data(), controls, inj, fm.data(), qm.data());
    out[j] = (fp[j] - fm[j]) / (2.0 * h);
    qp[j] = 0.0;
    qm[j] = 0.0;
  }
  return out;
}

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

TimeProfile interior_profile(Rng& rng, const TimeProfile& lo, const TimeProfile& hi,
                             double t0, double t1) {
  std::vector<std::array<double, 2>> pts;
  for (double t : merged_breakpoints(lo, hi, t0, t1)) {
    double a = lo.value(t), b = hi.value(t);
    pts.push_back({t, a + uniform01(rng) * (b - a)});
  }
  return TimeProfile::from_points(pts);
}

std::vector<double> node_positions(const RefinedNetwork& rnet,
                                   const std::vector<double>& base_x) {
  std::vector<double> pos(rnet.node_count(), 0.0);
  for (std::size_t j = 0; j < base_x.size(); ++j) pos[j] = base_x[j];
  double cur = 0.0, dir = 0.0;
  for (const auto& re : rnet.edges) {
    const auto& be = rnet.base.edges[static_cast<std::size_t>(re.parent)];
    if (re.segment == 0) {
      double xa = base_x[static_cast<std::size_t>(rnet.base.node_index(be.from))];
      double xb = base_x[static_cast<std::size_t>(rnet.base.node_index(be.to))];
      cur = xa;
      dir = (xb - xa) / be.length;
    }
    cur += re.length * dir;
    if (rnet.node_base[static_cast<std::size_t>(re.to)] < 0)
      pos[static_cast<std::size_t>(re.to)] = cur;
  }
  return pos;
}

}  // namespace testsup
