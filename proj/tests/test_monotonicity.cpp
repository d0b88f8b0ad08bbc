#include "doctest.h"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "flownet/errors.hpp"
#include "flownet/monotonicity.hpp"
#include "flownet/refine.hpp"
#include "support/support.hpp"

using namespace flownet;

namespace {

Network two_node(DissipationModel model, double length = 1.0) {
  Network net;
  net.horizon = 10.0;
  net.nodes.push_back({"a", {}, false});
  net.nodes.push_back({"b", {}, false});
  NetworkEdge e;
  e.id = "p";
  e.from = "a";
  e.to = "b";
  e.length = length;
  e.model = model;
  net.edges.push_back(e);
  return net;
}

ConstantControls random_controls(Rng& rng, std::size_t count, double lo, double hi) {
  std::vector<double> v(count);
  for (auto& a : v) a = uniform(rng, lo, hi);
  return ConstantControls(std::move(v));
}

}  // namespace

TEST_CASE("analytic jacobians match central differences on random scenes") {
  Rng rng(67);
  const double fd_h = 1e-6;
  for (bool weymouth : {false, true}) {
    int checked = 0;
    for (int trial = 0; trial < 6; ++trial) {
      testsup::NetGenConfig cfg;
      cfg.max_nodes = 6;
      cfg.weymouth = weymouth;
      Network net = testsup::random_network(rng, cfg);
      auto rnet = refine_network(net, 1.2);
      Simulator sim(rnet);
      std::size_t n = sim.size();
      InjectionSet inj = InjectionSet::nominal(rnet);
      for (int s = 0; s < 4; ++s) {
        double t = uniform(rng, 0.0, net.horizon);
        std::vector<double> rho(n);
        for (auto& r : rho) r = uniform(rng, 0.5, 2.0);
        auto cc = random_controls(rng, sim.actuator_count(), 0.5, 2.0);

        std::vector<double> jac;
        sim.state_jacobian(t, rho.data(), &cc, jac);
        std::vector<double> fd;
        testsup::fd_state_jacobian(sim, t, rho, &cc, inj, fd_h, fd);
        for (std::size_t k = 0; k < n * n; ++k) {
          CHECK(testsup::rel_err(jac[k], fd[k]) < 1e-5);
        }

        auto diag = sim.injection_jacobian(t, rho.data(), &cc);
        auto fdd = testsup::fd_injection_jacobian(sim, t, rho, &cc, inj, fd_h);
        for (std::size_t j = 0; j < n; ++j)
          CHECK(testsup::rel_err(diag[j], fdd[j]) < 1e-5);
        ++checked;
      }
    }
    CHECK(checked == 24);
  }
}

TEST_CASE("two-node linear jacobian in closed form") {
  const double beta = 0.8, L = 1.0;
  auto rnet = refine_network(two_node(DissipationModel::linear(beta), L), 2.0);
  Simulator sim(rnet);
  std::vector<double> rho{1.3, 0.9};
  std::vector<double> jac;
  sim.state_jacobian(0.0, rho.data(), nullptr, jac);
  // d(rho1_dot)/d(rho2) = (2/L) * beta / L, and the diagonal mirrors it
  CHECK(jac[0 * 2 + 1] == doctest::Approx(2.0 * beta / (L * L)).epsilon(1e-14));
  CHECK(jac[1 * 2 + 0] == doctest::Approx(2.0 * beta / (L * L)).epsilon(1e-14));
  CHECK(jac[0 * 2 + 0] == doctest::Approx(-2.0 * beta / (L * L)).epsilon(1e-14));
  auto diag = sim.injection_jacobian(0.0, rho.data(), nullptr);
  CHECK(diag[0] == doctest::Approx(2.0 / L).epsilon(1e-14));
  CHECK(diag[1] == doctest::Approx(2.0 / L).epsilon(1e-14));
}

TEST_CASE("weymouth jacobian at zero gradient uses the regularized slope") {
  const double kappa = 0.5, delta = 1e-3, L = 1.0;
  auto rnet =
      refine_network(two_node(DissipationModel::gas_weymouth(kappa, delta), L), 2.0);
  Simulator sim(rnet);
  const double u = 1.4;
  std::vector<double> rho{u, u};  // v = 0: inside the linearized zone
  std::vector<double> jac;
  sim.state_jacobian(0.0, rho.data(), nullptr, jac);
  double slope = std::sqrt(kappa * u * delta) / delta;
  CHECK(jac[0 * 2 + 1] == doctest::Approx(2.0 * slope / (L * L)).epsilon(1e-12));
  CHECK(jac[1 * 2 + 0] == doctest::Approx(2.0 * slope / (L * L)).epsilon(1e-12));
}

TEST_CASE("jacobian sparsity mirrors the refined graph exactly") {
  Rng rng(71);
  for (int trial = 0; trial < 6; ++trial) {
    testsup::NetGenConfig cfg;
    cfg.max_nodes = 7;
    cfg.weymouth = trial % 2 == 0;
    Network net = testsup::random_network(rng, cfg);
    auto rnet = refine_network(net, 0.8);
    Simulator sim(rnet);
    std::size_t n = sim.size();
    std::set<std::pair<int, int>> adjacent;
    for (const auto& e : rnet.edges) {
      adjacent.insert({e.from, e.to});
      adjacent.insert({e.to, e.from});
    }
    std::vector<double> rho(n);
    for (auto& r : rho) r = uniform(rng, 0.6, 1.8);
    auto cc = random_controls(rng, sim.actuator_count(), 0.6, 1.7);
    std::vector<double> jac;
    sim.state_jacobian(0.3, rho.data(), &cc, jac);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        bool adj = adjacent.count({static_cast<int>(i), static_cast<int>(j)}) > 0;
        if (!adj) {
          CHECK(jac[i * n + j] == 0.0);
        } else {
          CHECK(jac[i * n + j] > 0.0);
        }
      }
    }
  }
}

TEST_CASE("sampled sign conditions hold for both provided models") {
  Rng rng(73);
  for (bool weymouth : {false, true}) {
    testsup::NetGenConfig cfg;
    cfg.max_nodes = 8;
    cfg.weymouth = weymouth;
    Network net = testsup::random_network(rng, cfg);
    auto rnet = refine_network(net, 0.9);
    MonotoneSampling ms;
    ms.samples = 40;
    ms.seed = 99;
    auto summary = check_monotone_conditions(rnet, ms);
    CHECK(summary.ok());
    CHECK(summary.metzler_ok);
    CHECK(summary.nonneg_ok);
    CHECK(summary.samples == 40);
    CHECK(summary.min_offdiagonal >= -1e-12);
    CHECK(summary.min_injection_entry > 0.0);
    CHECK(summary.max_abs_nonadjacent == 0.0);
    CHECK(summary.worst_sample >= 0);
    CHECK_FALSE(summary.worst_row_id.empty());
  }
}

TEST_CASE("monotone sampling is deterministic in the seed") {
  Rng rng(79);
  testsup::NetGenConfig cfg;
  cfg.max_nodes = 6;
  Network net = testsup::random_network(rng, cfg);
  auto rnet = refine_network(net, 1.1);
  MonotoneSampling ms;
  ms.samples = 25;
  ms.seed = 1234;
  auto a = check_monotone_conditions(rnet, ms);
  auto b = check_monotone_conditions(rnet, ms);
  CHECK(a.min_offdiagonal == b.min_offdiagonal);
  CHECK(a.min_injection_entry == b.min_injection_entry);
  CHECK(a.worst_sample == b.worst_sample);
  CHECK(a.worst_time == b.worst_time);
}

TEST_CASE("a planted negative-beta edge is caught and located") {
  Network net;
  net.horizon = 10.0;
  for (const char* id : {"a", "b", "c"}) net.nodes.push_back({id, {}, false});
  auto pipe = [&](const char* id, const char* from, const char* to) {
    NetworkEdge e;
    e.id = id;
    e.from = from;
    e.to = to;
    e.length = 1.0;
    e.model = DissipationModel::linear(1.0);
    net.edges.push_back(e);
  };
  pipe("p1", "a", "b");
  pipe("p2", "b", "c");
  // direct assignment bypasses the validated constructors
  net.edges[1].model.beta = -0.4;
  auto rnet = refine_network(net, 2.0);
  MonotoneSampling ms;
  ms.samples = 10;
  auto summary = check_monotone_conditions(rnet, ms);
  CHECK_FALSE(summary.ok());
  CHECK_FALSE(summary.metzler_ok);
  CHECK(summary.min_offdiagonal < 0.0);
  // the worst entry sits on the planted edge
  std::set<std::string> planted{"b", "c"};
  CHECK(planted.count(summary.worst_row_id) == 1);
  CHECK(planted.count(summary.worst_col_id) == 1);
  CHECK(summary.worst_row_id != summary.worst_col_id);
}

TEST_CASE("jacobian report wrapper exposes matrices and sign summary") {
  auto rnet = refine_network(two_node(DissipationModel::linear(1.0)), 0.4);
  std::size_t n = rnet.node_count();
  std::vector<double> rho(n, 1.2);
  auto rep = jacobians(rnet, rho, 0.0, nullptr);
  CHECK(rep.metzler_ok);
  CHECK(rep.nonneg_ok);
  CHECK(rep.state_jacobian.rows() == static_cast<Eigen::Index>(n));
  CHECK(rep.state_jacobian.cols() == static_cast<Eigen::Index>(n));
  CHECK(rep.injection_diagonal.size() == static_cast<Eigen::Index>(n));
  CHECK(rep.max_abs_nonadjacent == 0.0);
  CHECK(rep.min_offdiagonal > 0.0);
  // interior nodes carry two incident half-segments: d = L_hat, entry = 1/L_hat
  double l_hat = rnet.edges[0].length;
  CHECK(rep.injection_diagonal(2) == doctest::Approx(1.0 / l_hat).epsilon(1e-13));
}

TEST_CASE("state jacobian requires ratio-driven actuation") {
  Network net = two_node(DissipationModel::linear(1.0));
  net.actuators.push_back({"p", Side::Tail, FeedbackPolicy::constant(1.1)});
  auto rnet = refine_network(net, 2.0);
  Simulator sim(rnet);
  std::vector<double> rho{1.0, 1.0}, jac;
  CHECK_THROWS_AS(sim.state_jacobian(0.0, rho.data(), nullptr, jac), ValidationError);
  // an explicit override restores ratio mode
  ConstantControls cc({1.1});
  sim.state_jacobian(0.0, rho.data(), &cc, jac);
  CHECK(jac[1] > 0.0);
}

TEST_CASE("order propagation holds on randomized ordered scenarios") {
  Rng rng(83);
  for (int trial = 0; trial < 10; ++trial) {
    testsup::NetGenConfig cfg;
    cfg.max_nodes = 6;
    cfg.weymouth = trial % 2 == 0;
    Network net = testsup::random_network(rng, cfg);
    auto rnet = refine_network(net, 1.0);
    std::size_t n = rnet.node_count();

    std::vector<TimeProfile> q_lo, q_hi;
    for (std::size_t b = 0; b < net.nodes.size(); ++b) {
      auto lo = testsup::random_profile(rng, net.horizon, -0.05, 0.05);
      auto pts = lo.points();
      for (auto& p : pts) p[1] += uniform(rng, 0.0, 0.05);
      q_lo.push_back(lo);
      q_hi.push_back(TimeProfile::from_points(pts));
    }
    std::vector<double> r_lo(n), r_hi(n);
    for (std::size_t j = 0; j < n; ++j) {
      double a = uniform(rng, 0.8, 1.6);
      double b = uniform(rng, 0.8, 1.6);
      r_lo[j] = std::min(a, b);
      r_hi[j] = std::max(a, b);
    }
    auto cc = random_controls(rng, net.actuators.size(), 0.7, 1.4);
    auto inj_lo = InjectionSet::from_base_profiles(rnet, q_lo);
    auto inj_hi = InjectionSet::from_base_profiles(rnet, q_hi);
    double t_end = std::min(net.horizon, 4.0);
    double step = testsup::stable_step(rnet, 1.6, 1.4, t_end);
    auto res =
        verify_order_propagation(rnet, r_lo, r_hi, inj_lo, inj_hi, &cc, t_end, step);
    CHECK(res.holds);
    CHECK(res.margin >= -1e-9);
    CHECK_FALSE(res.first_violation.has_value());
  }
}

TEST_CASE("order propagation reports the first violated sample") {
  // swapping the envelopes flips the ordering and must be flagged
  Network net = two_node(DissipationModel::linear(1.0));
  auto rnet = refine_network(net, 2.0);
  std::vector<TimeProfile> q_hi{TimeProfile::constant(0.2), TimeProfile::constant(0.0)};
  std::vector<TimeProfile> q_lo{TimeProfile::constant(0.0), TimeProfile::constant(0.0)};
  auto inj_hi = InjectionSet::from_base_profiles(rnet, q_hi);
  auto inj_lo = InjectionSet::from_base_profiles(rnet, q_lo);
  std::vector<double> r0{1.0, 1.0};
  // "low" scenario gets the larger injection
  auto res = verify_order_propagation(rnet, r0, r0, inj_hi, inj_lo, nullptr, 2.0, 0.05);
  CHECK_FALSE(res.holds);
  REQUIRE(res.first_violation.has_value());
  CHECK(res.first_violation->time > 0.0);
  CHECK(res.first_violation->node == "a");
  CHECK(res.first_violation->rho_low > res.first_violation->rho_high);
  CHECK(res.margin < 0.0);
}

TEST_CASE("order propagation validates the initial ordering") {
  auto rnet = refine_network(two_node(DissipationModel::linear(1.0)), 2.0);
  auto inj = InjectionSet::zero(rnet);
  std::vector<double> lo{1.2, 1.0}, hi{1.0, 1.2};
  CHECK_THROWS_AS(verify_order_propagation(rnet, lo, hi, inj, inj, nullptr, 1.0, 0.1),
                  ValidationError);
}

TEST_CASE("closed-loop feedback preserves trajectory ordering") {
  Network net = two_node(DissipationModel::linear(0.9));
  net.actuators.push_back({"p", Side::Tail, FeedbackPolicy::power_law(1.1, 0.4)});
  net.actuators.push_back({"p", Side::Head, FeedbackPolicy::power_law(0.9, -0.5)});
  auto rnet = refine_network(net, 0.5);
  std::size_t n = rnet.node_count();
  Rng rng(89);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<TimeProfile> q_lo, q_hi;
    for (std::size_t b = 0; b < 2; ++b) {
      auto lo = testsup::random_profile(rng, net.horizon, -0.05, 0.05);
      auto pts = lo.points();
      for (auto& p : pts) p[1] += uniform(rng, 0.0, 0.08);
      q_lo.push_back(lo);
      q_hi.push_back(TimeProfile::from_points(pts));
    }
    std::vector<double> r_lo(n), r_hi(n);
    for (std::size_t j = 0; j < n; ++j) {
      r_lo[j] = uniform(rng, 0.9, 1.1);
      r_hi[j] = r_lo[j] + uniform(rng, 0.0, 0.3);
    }
    auto inj_lo = InjectionSet::from_base_profiles(rnet, q_lo);
    auto inj_hi = InjectionSet::from_base_profiles(rnet, q_hi);
    auto res = verify_order_propagation(rnet, r_lo, r_hi, inj_lo, inj_hi,
                                        /*controls=*/nullptr, 4.0, 0.01);
    CHECK(res.holds);
  }
}
