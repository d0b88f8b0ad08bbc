#include "flownet/monotonicity.hpp"

#include <cmath>
#include <limits>

#include "flownet/errors.hpp"
#include "flownet/rng.hpp"

namespace flownet {

JacobianReport jacobians(Simulator& sim, const std::vector<double>& rho, double t,
                         const ControlSource* controls, double tol) {
  const std::size_t n = sim.size();
  if (rho.size() != n) throw ValidationError("state has wrong size");

  std::vector<double> flat;
  sim.state_jacobian(t, rho.data(), controls, flat);
  const std::vector<double> inj = sim.injection_jacobian(t, rho.data(), controls);

  JacobianReport r;
  r.time = t;
  r.state_jacobian = Eigen::Map<
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), n, n);
  r.injection_diagonal =
      Eigen::Map<const Eigen::VectorXd>(inj.data(), static_cast<Eigen::Index>(n));

  std::vector<char> adjacent(n * n, 0);
  for (const RefinedEdge& e : sim.refined().edges) {
    adjacent[e.from * n + e.to] = 1;
    adjacent[e.to * n + e.from] = 1;
  }

  r.min_offdiagonal = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = flat[i * n + j];
      if (adjacent[i * n + j]) {
        if (v < r.min_offdiagonal) {
          r.min_offdiagonal = v;
          r.worst_row = static_cast<int>(i);
          r.worst_col = static_cast<int>(j);
        }
      } else {
        r.max_abs_nonadjacent = std::max(r.max_abs_nonadjacent, std::fabs(v));
      }
    }
  }
  r.metzler_ok = r.min_offdiagonal >= -tol && r.max_abs_nonadjacent <= tol;

  r.min_injection_entry = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (inj[j] < r.min_injection_entry) {
      r.min_injection_entry = inj[j];
      r.worst_injection_row = static_cast<int>(j);
    }
  }
  r.nonneg_ok = r.min_injection_entry >= -tol;
  return r;
}

JacobianReport jacobians(const RefinedNetwork& rnet, const std::vector<double>& rho,
                         double t, const ControlSource* controls, double tol) {
  Simulator sim(rnet);
  return jacobians(sim, rho, t, controls, tol);
}

MonotoneSummary check_monotone_conditions(const RefinedNetwork& rnet,
                                          const MonotoneSampling& sampling,
                                          double tol) {
  if (sampling.samples < 1) throw ValidationError("sampling needs at least one sample");
  if (!(sampling.rho_lo > 0.0) || sampling.rho_hi < sampling.rho_lo)
    throw ValidationError("sampling needs 0 < rho_lo <= rho_hi");
  if (!(sampling.alpha_lo > 0.0) || sampling.alpha_hi < sampling.alpha_lo)
    throw ValidationError("sampling needs 0 < alpha_lo <= alpha_hi");

  Simulator sim(rnet);
  const std::size_t n = sim.size();
  const double t_hi =
      sampling.t_hi > sampling.t_lo ? sampling.t_hi : rnet.base.horizon;

  Rng rng(sampling.seed);
  MonotoneSummary s;
  s.min_offdiagonal = std::numeric_limits<double>::infinity();
  s.min_injection_entry = std::numeric_limits<double>::infinity();

  std::vector<double> rho(n);
  std::vector<double> alphas(sim.actuator_count());
  for (int k = 0; k < sampling.samples; ++k) {
    const double t = uniform(rng, sampling.t_lo, t_hi);
    for (std::size_t j = 0; j < n; ++j)
      rho[j] = uniform(rng, sampling.rho_lo, sampling.rho_hi);
    for (auto& a : alphas) a = uniform(rng, sampling.alpha_lo, sampling.alpha_hi);
    const ConstantControls controls{alphas};

    const JacobianReport r = jacobians(sim, rho, t, &controls, tol);
    if (r.min_offdiagonal < s.min_offdiagonal) {
      s.min_offdiagonal = r.min_offdiagonal;
      s.worst_sample = k;
      s.worst_time = t;
      s.worst_row_id = rnet.node_ids[r.worst_row];
      s.worst_col_id = rnet.node_ids[r.worst_col];
    }
    s.min_injection_entry = std::min(s.min_injection_entry, r.min_injection_entry);
    s.max_abs_nonadjacent = std::max(s.max_abs_nonadjacent, r.max_abs_nonadjacent);
    s.metzler_ok = s.metzler_ok && r.metzler_ok;
    s.nonneg_ok = s.nonneg_ok && r.nonneg_ok;
    ++s.samples;
  }
  return s;
}

OrderTestResult verify_order_propagation(const RefinedNetwork& rnet,
                                         const std::vector<double>& rho0_low,
                                         const std::vector<double>& rho0_high,
                                         const InjectionSet& q_low,
                                         const InjectionSet& q_high,
                                         const ControlSource* controls, double t_end,
                                         double step, double tol) {
  if (rho0_low.size() != rho0_high.size())
    throw ValidationError("initial states differ in size");
  for (std::size_t j = 0; j < rho0_low.size(); ++j)
    if (rho0_low[j] > rho0_high[j])
      throw ValidationError("rho0_low must not exceed rho0_high componentwise");

  Simulator sim(rnet);
  const Trajectory low = sim.run(rho0_low, t_end, step, controls, q_low);
  const Trajectory high = sim.run(rho0_high, t_end, step, controls, q_high);

  OrderTestResult result;
  result.margin = std::numeric_limits<double>::infinity();
  result.holds = true;
  for (std::size_t s = 0; s < low.samples(); ++s) {
    const double* a = low.state(s);
    const double* b = high.state(s);
    for (std::size_t j = 0; j < low.node_count; ++j) {
      const double gap = b[j] - a[j];
      result.margin = std::min(result.margin, gap);
      if (gap < -tol && !result.first_violation) {
        result.holds = false;
        result.first_violation =
            OrderViolation{low.times[s], rnet.node_ids[j], a[j], b[j]};
      }
    }
  }
  return result;
}

}  // namespace flownet
