#include "flownet/flux_math.hpp"
#include "flownet/kernels.hpp"

namespace flownet::kernels {
namespace fm = ::flownet::detail;

namespace {

void flux_linear(const EdgeBatchView& b, const double* rho, const double* a_tail,
                 const double* a_head, const FluxOut& out) {
  for (std::size_t e = 0; e < b.n; ++e) {
    const double u_tail = a_tail[e] * rho[b.from[e]];
    const double u_head = a_head[e] * rho[b.to[e]];
    const double v = (u_head - u_tail) * b.inv_len[e];
    const double f = fm::linear_flux(b.p0[e], v);
    out.f_tail[e] = f;
    out.f_head[e] = f;
  }
}

void flux_weymouth(const EdgeBatchView& b, const double* rho, const double* a_tail,
                   const double* a_head, const FluxOut& out) {
  for (std::size_t e = 0; e < b.n; ++e) {
    const double u_tail = a_tail[e] * rho[b.from[e]];
    const double u_head = a_head[e] * rho[b.to[e]];
    const double v = (u_head - u_tail) * b.inv_len[e];
    out.f_tail[e] = fm::weymouth_flux(b.p0[e], b.p1[e], u_tail, v);
    out.f_head[e] = fm::weymouth_flux(b.p0[e], b.p1[e], u_head, v);
  }
}

void flux_jac_linear(const EdgeBatchView& b, const double* rho, const double* a_tail,
                     const double* a_head, const FluxJacOut& out) {
  for (std::size_t e = 0; e < b.n; ++e) {
    const double u_tail = a_tail[e] * rho[b.from[e]];
    const double u_head = a_head[e] * rho[b.to[e]];
    const double v = (u_head - u_tail) * b.inv_len[e];
    const double f = fm::linear_flux(b.p0[e], v);
    out.f_tail[e] = f;
    out.f_head[e] = f;
    out.h_tail[e] = b.p0[e];
    out.h_head[e] = b.p0[e];
    out.fu_tail[e] = 0.0;
    out.fu_head[e] = 0.0;
  }
}

void flux_jac_weymouth(const EdgeBatchView& b, const double* rho, const double* a_tail,
                       const double* a_head, const FluxJacOut& out) {
  for (std::size_t e = 0; e < b.n; ++e) {
    const double u_tail = a_tail[e] * rho[b.from[e]];
    const double u_head = a_head[e] * rho[b.to[e]];
    const double v = (u_head - u_tail) * b.inv_len[e];
    const auto t = fm::weymouth_flux_terms(b.p0[e], b.p1[e], u_tail, v);
    const auto h = fm::weymouth_flux_terms(b.p0[e], b.p1[e], u_head, v);
    out.f_tail[e] = t.f;
    out.f_head[e] = h.f;
    out.h_tail[e] = t.h;
    out.h_head[e] = h.h;
    out.fu_tail[e] = t.fu;
    out.fu_head[e] = h.fu;
  }
}

double max_rel_diff(const EdgeBatchView& b, const double* rho, const double* a_tail,
                    const double* a_head) {
  double worst = 0.0;
  for (std::size_t e = 0; e < b.n; ++e) {
    const double u_tail = a_tail[e] * rho[b.from[e]];
    const double u_head = a_head[e] * rho[b.to[e]];
    const double d = u_head - u_tail;
    const double ad = d < 0.0 ? -d : d;
    const double r = (2.0 * ad) / (u_head + u_tail);
    worst = r > worst ? r : worst;
  }
  return worst;
}

void axpy(double* out, const double* x, double a, const double* k, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * k[i];
}

void rk4_combine(double* out, const double* x, double c, const double* k1,
                 const double* k2, const double* k3, const double* k4, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = x[i] + c * ((k1[i] + k4[i]) + 2.0 * (k2[i] + k3[i]));
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar",        flux_linear,  flux_weymouth,
                                 flux_jac_linear, flux_jac_weymouth,
                                 max_rel_diff,    axpy,         rk4_combine};
  return table;
}

}  // namespace flownet::kernels
