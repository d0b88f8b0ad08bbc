#pragma once

// Shared helpers for the test suite: seeded random networks, profile
// generators, finite-difference Jacobian oracles, and a stable-step picker.

#include <string>
#include <vector>

#include "flownet/monotonicity.hpp"
#include "flownet/network.hpp"
#include "flownet/refine.hpp"
#include "flownet/rng.hpp"
#include "flownet/simulator.hpp"

namespace testsup {

using namespace flownet;

struct NetGenConfig {
  int max_nodes = 10;           // base node count drawn from [2, max_nodes]
  bool weymouth = false;        // linear otherwise
  double delta = 1e-3;          // weymouth regularization width
  double horizon = 10.0;
  bool with_actuators = true;   // random ratio profiles on some edge ends
  bool with_injections = true;  // random nominal profiles on some nodes
  bool with_envelopes = false;  // lower/upper around each nominal
};

/// Random connected network: a random spanning tree plus a few extra edges,
/// random lengths and model parameters, optional injections and actuators.
Network random_network(Rng& rng, const NetGenConfig& cfg);

/// Piecewise-linear profile with `pieces` equal spans over [0, t_end] and
/// values uniform in [lo, hi].
TimeProfile random_profile(Rng& rng, double t_end, double lo, double hi,
                           int pieces = 4);

/// Integrator step from a Gershgorin bound on the state Jacobian evaluated at
/// a uniform density with all ratios at alpha; capped at t_end / 50.
double stable_step(const RefinedNetwork& rnet, double rho, double alpha,
                   double t_end);

/// Central finite differences of Simulator::rhs in the state, column j
/// stepped by h * max(1, |rho_j|). Row-major n x n.
void fd_state_jacobian(Simulator& sim, double t, const std::vector<double>& rho,
                       const ControlSource* controls, const InjectionSet& inj,
                       double h, std::vector<double>& jac);

/// Central finite differences in the per-node injection offsets; the exact
/// matrix is diagonal, so only the diagonal is probed.
std::vector<double> fd_injection_jacobian(Simulator& sim, double t,
                                          const std::vector<double>& rho,
                                          const ControlSource* controls,
                                          const InjectionSet& inj, double h);

/// |a - b| / max(1, |a|, |b|): relative where values are large, absolute
/// near zero.
double rel_err(double a, double b);

/// Random profile lying pointwise inside [lo, hi] on [t0, t1]: a convex
/// combination with an independent weight at every merged breakpoint.
TimeProfile interior_profile(Rng& rng, const TimeProfile& lo, const TimeProfile& hi,
                             double t0, double t1);

/// x-coordinates of refined nodes for a network laid out on a line, given the
/// base node coordinates in base order. Relies on refined edges being emitted
/// per parent in segment order.
std::vector<double> node_positions(const RefinedNetwork& rnet,
                                   const std::vector<double>& base_x);

}  // namespace testsup
