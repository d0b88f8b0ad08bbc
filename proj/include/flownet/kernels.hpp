#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops over structure-of-arrays edge batches. Every
// kernel exists as a scalar reference implementation and, on x86-64, an AVX2
// variant; the active table is resolved once at startup. The two paths use
// identical arithmetic (no FMA contraction) and are bit-equivalent, which the
// test suite asserts, so runtime selection never changes results.

namespace flownet::kernels {

/// One batch of refined-edge data sharing a dissipation kind.
/// p0/p1 hold the per-edge law parameters: Linear uses p0 = beta;
/// GasWeymouth uses p0 = kappa, p1 = delta.
struct EdgeBatchView {
  const std::int32_t* from = nullptr;  // tail node index
  const std::int32_t* to = nullptr;    // head node index
  const double* inv_len = nullptr;     // 1 / segment length
  const double* p0 = nullptr;
  const double* p1 = nullptr;
  std::size_t n = 0;
};

/// Dissipation values per edge. f_tail is evaluated with the tail-side
/// density argument (ratio * rho[from]) and enters the tail node's balance;
/// f_head uses the head-side density (ratio * rho[to]) and enters the head
/// node's balance. The two coincide for density-independent laws.
struct FluxOut {
  double* f_tail = nullptr;
  double* f_head = nullptr;
};

/// Values plus partials: h_* with respect to the density gradient, fu_* with
/// respect to the density argument.
struct FluxJacOut {
  double* f_tail = nullptr;
  double* f_head = nullptr;
  double* h_tail = nullptr;
  double* h_head = nullptr;
  double* fu_tail = nullptr;
  double* fu_head = nullptr;
};

using FluxFn = void (*)(const EdgeBatchView&, const double* rho, const double* a_tail,
                        const double* a_head, const FluxOut&);
using FluxJacFn = void (*)(const EdgeBatchView&, const double* rho, const double* a_tail,
                           const double* a_head, const FluxJacOut&);
/// Max over the batch of 2|u_head - u_tail| / (u_head + u_tail), the relative
/// end-to-end density difference of a segment. Returns 0 for an empty batch.
using RelDiffFn = double (*)(const EdgeBatchView&, const double* rho, const double* a_tail,
                             const double* a_head);
/// out = x + a * k
using AxpyFn = void (*)(double* out, const double* x, double a, const double* k,
                        std::size_t n);
/// out = x + c * ((k1 + k4) + 2 * (k2 + k3))
using CombineFn = void (*)(double* out, const double* x, double c, const double* k1,
                           const double* k2, const double* k3, const double* k4,
                           std::size_t n);

struct KernelTable {
  const char* name = "";
  FluxFn flux_linear = nullptr;
  FluxFn flux_weymouth = nullptr;
  FluxJacFn flux_jac_linear = nullptr;
  FluxJacFn flux_jac_weymouth = nullptr;
  RelDiffFn max_rel_diff = nullptr;
  AxpyFn axpy = nullptr;
  CombineFn rk4_combine = nullptr;
};

/// Scalar reference kernels; always available.
const KernelTable& scalar_table();

/// AVX2 kernels, or nullptr when not compiled in or not supported by the CPU.
const KernelTable* avx2_table();

/// The table used by the simulator: AVX2 when available, unless the
/// FLOWNET_KERNELS environment variable ("scalar" or "avx2") overrides it.
const KernelTable& active_table();

namespace detail {
// Defined in kernels_avx2.cpp; returns nullptr when built without AVX2.
const KernelTable* avx2_table_impl();
}  // namespace detail

}  // namespace flownet::kernels
