#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "flownet/kernels.hpp"
#include "flownet/refine.hpp"

namespace flownet {

/// Supplies every actuator's compression ratio and its time derivative at t,
/// in Network::actuators order. When a simulation runs without a
/// ControlSource, profile actuators evaluate their own profiles and feedback
/// actuators close the loop on the local nodal density; an explicit source
/// overrides both.
struct ControlSource {
  virtual ~ControlSource() = default;
  virtual void eval(double t, double* values, double* rates) const = 0;
};

class ProfileControls : public ControlSource {
 public:
  explicit ProfileControls(std::vector<TimeProfile> profiles)
      : profiles_(std::move(profiles)) {}
  void eval(double t, double* values, double* rates) const override;

 private:
  std::vector<TimeProfile> profiles_;
};

class ConstantControls : public ControlSource {
 public:
  explicit ConstantControls(std::vector<double> values) : values_(std::move(values)) {}
  void eval(double t, double* values, double* rates) const override;

 private:
  std::vector<double> values_;
};

/// Injection profiles resolved onto the refined node set; nodes without a
/// profile inject nothing. lower()/upper() fall back to the nominal profile
/// where a node declares no envelope.
class InjectionSet {
 public:
  static InjectionSet zero(const RefinedNetwork& rnet);
  static InjectionSet nominal(const RefinedNetwork& rnet);
  static InjectionSet lower(const RefinedNetwork& rnet);
  static InjectionSet upper(const RefinedNetwork& rnet);
  /// One profile per base node, in base node order.
  static InjectionSet from_base_profiles(const RefinedNetwork& rnet,
                                         const std::vector<TimeProfile>& q);

  void set(std::size_t node, TimeProfile p);

  double value(std::size_t node, double t) const {
    return has_[node] ? q_[node].value(t) : 0.0;
  }
  /// Integral over [t0, t1] of the total injection rate.
  double total_integral(double t0, double t1) const;

 private:
  std::vector<TimeProfile> q_;
  std::vector<char> has_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> states;    // sample-major, node_count values per sample
  std::vector<double> rel_diff;  // neighbor relative density difference per sample
  std::size_t node_count = 0;
  double epsilon = 0.0;
  double step = 0.0;  // actual uniform step used

  std::size_t samples() const { return times.size(); }
  const double* state(std::size_t s) const { return states.data() + s * node_count; }
  double max_rel_diff() const;
};

/// Segment dissipation values, sign-flipped to the flux convention
/// (positive = flow from tail to head): phi = -f, evaluated once with the
/// tail-side density argument and once with the head-side one.
struct MidpointFluxes {
  std::vector<double> phi_tail;
  std::vector<double> phi_head;
};

/// Nodal ODE right-hand side and fixed-step 4th-order integrator on a
/// refined network. Construction compiles the edges into per-model batches
/// for the data-parallel kernels; an instance owns scratch buffers and must
/// not be shared across threads mid-call (distinct instances are fine).
class Simulator {
 public:
  explicit Simulator(const RefinedNetwork& rnet,
                     const kernels::KernelTable* table = nullptr);

  std::size_t size() const { return n_; }
  const RefinedNetwork& refined() const { return rnet_; }
  const char* kernel_name() const;

  /// d(rho)/dt at (t, rho). q_extra, when given, adds a per-node constant to
  /// the injections (used by derivative probes). Throws SimulationError on a
  /// non-finite result or a non-positive effective actuation slope, naming
  /// the node.
  void rhs(double t, const double* rho, const ControlSource* controls,
           const InjectionSet& inj, double* out, const double* q_extra = nullptr);

  Trajectory run(const std::vector<double>& rho0, double t_end, double step,
                 const ControlSource* controls, const InjectionSet& inj);

  MidpointFluxes midpoint_fluxes(double t, const double* rho,
                                 const ControlSource* controls);

  /// Dense row-major d(rho_dot)/d(rho), size n*n. Requires ratio-driven
  /// actuation: an explicit ControlSource, or profile-only actuators.
  void state_jacobian(double t, const double* rho, const ControlSource* controls,
                      std::vector<double>& jac);

  /// d(rho_dot_j)/d(q_j); the full matrix is this diagonal.
  std::vector<double> injection_jacobian(double t, const double* rho,
                                         const ControlSource* controls);

  /// Total commodity content: sum over edge ends of
  /// (segment length / 2) * ratio * local density.
  double nodal_mass(double t, const double* rho, const ControlSource* controls);

  /// Max over segments of the relative end-to-end density difference.
  double neighbor_rel_diff(double t, const double* rho, const ControlSource* controls);

  std::size_t actuator_count() const { return n_act_; }

 private:
  struct Batch {
    DissipationModel::Kind kind;
    std::vector<std::int32_t> from, to;
    std::vector<double> inv_len, p0, p1, half_len;
    std::vector<int> tail_act, head_act;  // base actuator index or -1
    std::vector<int> edge_index;          // refined edge index
    // scratch
    std::vector<double> a_tail, a_head;
    std::vector<double> f_tail, f_head, h_tail, h_head, fu_tail, fu_head;
    kernels::EdgeBatchView view() const;
  };

  void fill_actuation(double t, const double* rho, const ControlSource* controls);
  void require_ratio_mode(const ControlSource* controls) const;
  [[noreturn]] void abort_at(const std::string& what, double t, std::size_t node) const;

  RefinedNetwork rnet_;
  std::size_t n_ = 0;
  std::size_t n_act_ = 0;
  const kernels::KernelTable* k_ = nullptr;
  std::vector<Batch> batches_;
  std::vector<char> feedback_;  // per actuator

  std::vector<double> act_val_, act_rate_;
  std::vector<double> d_, c_, acc_;
};

/// Aggregated actuation at a refined node: the sum of incident-end ratios
/// (1 for unactuated ends) and of their time derivatives. Only defined for
/// ratio-profile actuators.
std::pair<double, double> aggregate_actuation(const RefinedNetwork& rnet, int node,
                                              double t);

/// One-call wrappers around Simulator for the common cases; injections are
/// the network's nominal profiles.
std::vector<double> nodal_rhs(const RefinedNetwork& rnet, const std::vector<double>& rho,
                              double t, const ControlSource* controls = nullptr);
std::vector<double> nodal_rhs_feedback(const RefinedNetwork& rnet,
                                       const std::vector<double>& rho, double t);
Trajectory simulate(const RefinedNetwork& rnet, const std::vector<double>& rho0,
                    double t_end, double step, const ControlSource* controls = nullptr);

}  // namespace flownet
