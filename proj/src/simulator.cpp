#include "flownet/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "flownet/errors.hpp"

namespace flownet {

void ProfileControls::eval(double t, double* values, double* rates) const {
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    const auto s = profiles_[i].at(t);
    values[i] = s.value;
    rates[i] = s.rate;
  }
}

void ConstantControls::eval(double, double* values, double* rates) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values[i] = values_[i];
    rates[i] = 0.0;
  }
}

InjectionSet InjectionSet::zero(const RefinedNetwork& rnet) {
  InjectionSet s;
  s.q_.resize(rnet.node_count());
  s.has_.assign(rnet.node_count(), 0);
  return s;
}

namespace {

enum class Envelope { Nominal, Lower, Upper };

InjectionSet resolve(const RefinedNetwork& rnet, Envelope which) {
  InjectionSet s = InjectionSet::zero(rnet);
  for (std::size_t i = 0; i < rnet.node_count(); ++i) {
    const int b = rnet.node_base[i];
    if (b < 0) continue;
    const NetworkNode& node = rnet.base.nodes[b];
    if (!node.has_injection) continue;
    const TimeProfile* p = &node.injection.nominal;
    if (which == Envelope::Lower && node.injection.lower) p = &*node.injection.lower;
    if (which == Envelope::Upper && node.injection.upper) p = &*node.injection.upper;
    s.set(i, *p);
  }
  return s;
}

}  // namespace

void InjectionSet::set(std::size_t node, TimeProfile p) {
  q_[node] = std::move(p);
  has_[node] = 1;
}

InjectionSet InjectionSet::nominal(const RefinedNetwork& rnet) {
  return resolve(rnet, Envelope::Nominal);
}
InjectionSet InjectionSet::lower(const RefinedNetwork& rnet) {
  return resolve(rnet, Envelope::Lower);
}
InjectionSet InjectionSet::upper(const RefinedNetwork& rnet) {
  return resolve(rnet, Envelope::Upper);
}

InjectionSet InjectionSet::from_base_profiles(const RefinedNetwork& rnet,
                                              const std::vector<TimeProfile>& q) {
  if (q.size() != rnet.base.nodes.size())
    throw ValidationError("need one injection profile per base node");
  InjectionSet s = zero(rnet);
  for (std::size_t i = 0; i < rnet.node_count(); ++i) {
    const int b = rnet.node_base[i];
    if (b >= 0) s.set(i, q[b]);
  }
  return s;
}

double InjectionSet::total_integral(double t0, double t1) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < q_.size(); ++i)
    if (has_[i]) sum += q_[i].integral(t0, t1);
  return sum;
}

double Trajectory::max_rel_diff() const {
  double worst = 0.0;
  for (double d : rel_diff) worst = std::max(worst, d);
  return worst;
}

kernels::EdgeBatchView Simulator::Batch::view() const {
  return {from.data(), to.data(), inv_len.data(), p0.data(), p1.data(), from.size()};
}

Simulator::Simulator(const RefinedNetwork& rnet, const kernels::KernelTable* table)
    : rnet_(rnet),
      n_(rnet.node_count()),
      n_act_(rnet.base.actuators.size()),
      k_(table ? table : &kernels::active_table()) {
  feedback_.resize(n_act_);
  for (std::size_t a = 0; a < n_act_; ++a)
    feedback_[a] = rnet_.base.actuators[a].is_feedback();

  for (const auto kind :
       {DissipationModel::Kind::Linear, DissipationModel::Kind::GasWeymouth}) {
    Batch b;
    b.kind = kind;
    for (std::size_t e = 0; e < rnet_.edges.size(); ++e) {
      const RefinedEdge& re = rnet_.edges[e];
      const DissipationModel& m = rnet_.base.edges[re.parent].model;
      if (m.kind != kind) continue;
      b.from.push_back(re.from);
      b.to.push_back(re.to);
      b.inv_len.push_back(1.0 / re.length);
      b.half_len.push_back(0.5 * re.length);
      b.p0.push_back(kind == DissipationModel::Kind::Linear ? m.beta : m.kappa);
      b.p1.push_back(kind == DissipationModel::Kind::Linear ? 0.0 : m.delta);
      b.tail_act.push_back(rnet_.tail_actuator[e]);
      b.head_act.push_back(rnet_.head_actuator[e]);
      b.edge_index.push_back(static_cast<int>(e));
    }
    if (b.from.empty()) continue;
    const std::size_t m = b.from.size();
    for (auto* v : {&b.a_tail, &b.a_head, &b.f_tail, &b.f_head, &b.h_tail, &b.h_head,
                    &b.fu_tail, &b.fu_head})
      v->resize(m);
    batches_.push_back(std::move(b));
  }

  act_val_.resize(n_act_);
  act_rate_.resize(n_act_);
  d_.resize(n_);
  c_.resize(n_);
  acc_.resize(n_);
}

const char* Simulator::kernel_name() const { return k_->name; }

void Simulator::abort_at(const std::string& what, double t, std::size_t node) const {
  throw SimulationError(what + " at node \"" + rnet_.node_ids[node] + "\"", t,
                        rnet_.node_ids[node]);
}

void Simulator::fill_actuation(double t, const double* rho,
                               const ControlSource* controls) {
  if (n_act_ > 0) {
    if (controls) {
      controls->eval(t, act_val_.data(), act_rate_.data());
    } else {
      for (std::size_t a = 0; a < n_act_; ++a) {
        if (feedback_[a]) continue;
        const auto s = rnet_.base.actuators[a].profile().at(t);
        act_val_[a] = s.value;
        act_rate_[a] = s.rate;
      }
    }
  }

  std::fill(d_.begin(), d_.end(), 0.0);
  std::fill(c_.begin(), c_.end(), 0.0);

  for (auto& b : batches_) {
    for (std::size_t i = 0; i < b.from.size(); ++i) {
      for (int end = 0; end < 2; ++end) {
        const int node = end == 0 ? b.from[i] : b.to[i];
        const int slot = end == 0 ? b.tail_act[i] : b.head_act[i];
        double ratio = 1.0, rate = 0.0, slope = 1.0;
        if (slot >= 0) {
          if (!controls && feedback_[slot]) {
            const auto ev = rnet_.base.actuators[slot].policy().eval(rho[node]);
            ratio = ev.k;
            slope = ev.k + ev.dk * rho[node];
            if (!(slope > 0.0) || !std::isfinite(slope))
              abort_at("feedback slope k + k'*rho is not positive", t, node);
          } else {
            ratio = act_val_[slot];
            rate = act_rate_[slot];
            slope = ratio;
            if (!(ratio > 0.0) || !std::isfinite(ratio))
              abort_at("actuation ratio is not positive", t, node);
          }
        }
        (end == 0 ? b.a_tail : b.a_head)[i] = ratio;
        d_[node] += b.half_len[i] * slope;
        c_[node] += b.half_len[i] * rate;
      }
    }
  }
}

void Simulator::rhs(double t, const double* rho, const ControlSource* controls,
                    const InjectionSet& inj, double* out, const double* q_extra) {
  fill_actuation(t, rho, controls);
  std::fill(acc_.begin(), acc_.end(), 0.0);

  for (auto& b : batches_) {
    const kernels::FluxOut fo{b.f_tail.data(), b.f_head.data()};
    const auto fn = b.kind == DissipationModel::Kind::Linear ? k_->flux_linear
                                                             : k_->flux_weymouth;
    fn(b.view(), rho, b.a_tail.data(), b.a_head.data(), fo);
    for (std::size_t i = 0; i < b.from.size(); ++i) {
      acc_[b.from[i]] += b.f_tail[i];
      acc_[b.to[i]] -= b.f_head[i];
    }
  }

  for (std::size_t j = 0; j < n_; ++j) {
    double q = inj.value(j, t);
    if (q_extra) q += q_extra[j];
    out[j] = (acc_[j] + q - c_[j] * rho[j]) / d_[j];
    if (!std::isfinite(out[j])) abort_at("non-finite time derivative", t, j);
  }
}

double Simulator::neighbor_rel_diff(double t, const double* rho,
                                    const ControlSource* controls) {
  fill_actuation(t, rho, controls);
  double worst = 0.0;
  for (auto& b : batches_)
    worst = std::max(worst,
                     k_->max_rel_diff(b.view(), rho, b.a_tail.data(), b.a_head.data()));
  return worst;
}

Trajectory Simulator::run(const std::vector<double>& rho0, double t_end, double step,
                          const ControlSource* controls, const InjectionSet& inj) {
  if (rho0.size() != n_) throw ValidationError("initial state has wrong size");
  if (!std::isfinite(step) || step <= 0.0)
    throw ValidationError("step must be positive");
  if (!std::isfinite(t_end) || t_end <= 0.0)
    throw ValidationError("t_end must be positive");
  for (std::size_t j = 0; j < n_; ++j)
    if (!std::isfinite(rho0[j]) || rho0[j] <= 0.0)
      abort_at("initial density is not positive", 0.0, j);

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / step - 1e-9));
  const double h = t_end / static_cast<double>(steps);

  Trajectory traj;
  traj.node_count = n_;
  traj.epsilon = rnet_.epsilon;
  traj.step = h;
  traj.times.reserve(steps + 1);
  traj.states.reserve((steps + 1) * n_);
  traj.rel_diff.reserve(steps + 1);

  std::vector<double> x = rho0, xn(n_), tmp(n_), k1(n_), k2(n_), k3(n_), k4(n_);

  const auto sample = [&](double t, const double* s) {
    traj.times.push_back(t);
    traj.states.insert(traj.states.end(), s, s + n_);
    traj.rel_diff.push_back(neighbor_rel_diff(t, s, controls));
  };
  sample(0.0, x.data());

  for (std::size_t s = 0; s < steps; ++s) {
    const double t = h * static_cast<double>(s);
    rhs(t, x.data(), controls, inj, k1.data());
    k_->axpy(tmp.data(), x.data(), h * 0.5, k1.data(), n_);
    rhs(t + h * 0.5, tmp.data(), controls, inj, k2.data());
    k_->axpy(tmp.data(), x.data(), h * 0.5, k2.data(), n_);
    rhs(t + h * 0.5, tmp.data(), controls, inj, k3.data());
    k_->axpy(tmp.data(), x.data(), h, k3.data(), n_);
    rhs(t + h, tmp.data(), controls, inj, k4.data());
    k_->rk4_combine(xn.data(), x.data(), h / 6.0, k1.data(), k2.data(), k3.data(),
                    k4.data(), n_);

    const double tn = s + 1 == steps ? t_end : h * static_cast<double>(s + 1);
    for (std::size_t j = 0; j < n_; ++j) {
      if (!std::isfinite(xn[j])) abort_at("non-finite state", tn, j);
      if (xn[j] <= 0.0) abort_at("density dropped to zero or below", tn, j);
    }
    x.swap(xn);
    sample(tn, x.data());
  }
  return traj;
}

MidpointFluxes Simulator::midpoint_fluxes(double t, const double* rho,
                                          const ControlSource* controls) {
  fill_actuation(t, rho, controls);
  MidpointFluxes m;
  m.phi_tail.resize(rnet_.edges.size());
  m.phi_head.resize(rnet_.edges.size());
  for (auto& b : batches_) {
    const kernels::FluxOut fo{b.f_tail.data(), b.f_head.data()};
    const auto fn = b.kind == DissipationModel::Kind::Linear ? k_->flux_linear
                                                             : k_->flux_weymouth;
    fn(b.view(), rho, b.a_tail.data(), b.a_head.data(), fo);
    for (std::size_t i = 0; i < b.from.size(); ++i) {
      m.phi_tail[b.edge_index[i]] = -b.f_tail[i];
      m.phi_head[b.edge_index[i]] = -b.f_head[i];
    }
  }
  return m;
}

void Simulator::require_ratio_mode(const ControlSource* controls) const {
  if (controls) return;
  for (std::size_t a = 0; a < n_act_; ++a)
    if (feedback_[a])
      throw ValidationError(
          "jacobian assembly needs ratio-driven actuation; supply a control "
          "source to override feedback actuators");
}

void Simulator::state_jacobian(double t, const double* rho,
                               const ControlSource* controls,
                               std::vector<double>& jac) {
  require_ratio_mode(controls);
  fill_actuation(t, rho, controls);
  jac.assign(n_ * n_, 0.0);

  for (auto& b : batches_) {
    const kernels::FluxJacOut out{b.f_tail.data(),  b.f_head.data(),
                                  b.h_tail.data(),  b.h_head.data(),
                                  b.fu_tail.data(), b.fu_head.data()};
    const auto fn = b.kind == DissipationModel::Kind::Linear ? k_->flux_jac_linear
                                                             : k_->flux_jac_weymouth;
    fn(b.view(), rho, b.a_tail.data(), b.a_head.data(), out);

    for (std::size_t i = 0; i < b.from.size(); ++i) {
      const std::size_t u = b.from[i], w = b.to[i];
      const double il = b.inv_len[i];
      const double at = b.a_tail[i], ah = b.a_head[i];
      jac[u * n_ + w] += ah * b.h_tail[i] * il;
      jac[u * n_ + u] += at * (b.fu_tail[i] - b.h_tail[i] * il);
      jac[w * n_ + u] += at * b.h_head[i] * il;
      jac[w * n_ + w] -= ah * (b.fu_head[i] + b.h_head[i] * il);
    }
  }

  for (std::size_t j = 0; j < n_; ++j) {
    const double inv_d = 1.0 / d_[j];
    for (std::size_t col = 0; col < n_; ++col) jac[j * n_ + col] *= inv_d;
    jac[j * n_ + j] -= c_[j] / d_[j];
  }
}

std::vector<double> Simulator::injection_jacobian(double t, const double* rho,
                                                  const ControlSource* controls) {
  fill_actuation(t, rho, controls);
  std::vector<double> diag(n_);
  for (std::size_t j = 0; j < n_; ++j) diag[j] = 1.0 / d_[j];
  return diag;
}

double Simulator::nodal_mass(double t, const double* rho,
                             const ControlSource* controls) {
  fill_actuation(t, rho, controls);
  double mass = 0.0;
  for (auto& b : batches_)
    for (std::size_t i = 0; i < b.from.size(); ++i)
      mass += b.half_len[i] *
              (b.a_tail[i] * rho[b.from[i]] + b.a_head[i] * rho[b.to[i]]);
  return mass;
}

std::pair<double, double> aggregate_actuation(const RefinedNetwork& rnet, int node,
                                              double t) {
  double value = 0.0, rate = 0.0;
  const auto add = [&](int slot) {
    if (slot < 0) {
      value += 1.0;
      return;
    }
    const Actuator& a = rnet.base.actuators[slot];
    if (a.is_feedback())
      throw ValidationError(
          "aggregate actuation is defined for ratio-profile actuators only");
    const auto s = a.profile().at(t);
    value += s.value;
    rate += s.rate;
  };
  for (std::size_t e = 0; e < rnet.edges.size(); ++e) {
    if (rnet.edges[e].from == node) add(rnet.tail_actuator[e]);
    if (rnet.edges[e].to == node) add(rnet.head_actuator[e]);
  }
  return {value, rate};
}

std::vector<double> nodal_rhs(const RefinedNetwork& rnet, const std::vector<double>& rho,
                              double t, const ControlSource* controls) {
  Simulator sim(rnet);
  const InjectionSet inj = InjectionSet::nominal(rnet);
  std::vector<double> out(sim.size());
  sim.rhs(t, rho.data(), controls, inj, out.data());
  return out;
}

std::vector<double> nodal_rhs_feedback(const RefinedNetwork& rnet,
                                       const std::vector<double>& rho, double t) {
  return nodal_rhs(rnet, rho, t, nullptr);
}

Trajectory simulate(const RefinedNetwork& rnet, const std::vector<double>& rho0,
                    double t_end, double step, const ControlSource* controls) {
  Simulator sim(rnet);
  return sim.run(rho0, t_end, step, controls, InjectionSet::nominal(rnet));
}

}  // namespace flownet
