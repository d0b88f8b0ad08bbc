// AVX2 variants of the edge-batch kernels. Mirrors src/kernels_scalar.cpp
// operation for operation; remainders fall back to the same scalar formulas,
// so results are bit-identical to the reference table.

#include "flownet/flux_math.hpp"
#include "flownet/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace flownet::kernels {
namespace fm = ::flownet::detail;

namespace {

inline __m256d gather(const double* base, const std::int32_t* idx, std::size_t e) {
  const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + e));
  return _mm256_i32gather_pd(base, vi, 8);
}

inline __m256d vabs(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

// copysign for non-negative magnitude
inline __m256d apply_sign(__m256d mag, __m256d sign_src) {
  const __m256d sign_bit = _mm256_and_pd(sign_src, _mm256_set1_pd(-0.0));
  return _mm256_or_pd(mag, sign_bit);
}

struct WeymouthLanes {
  __m256d f, h, fu;
};

inline WeymouthLanes weymouth_lanes(__m256d kappa, __m256d delta, __m256d u, __m256d v) {
  const __m256d av = vabs(v);
  const __m256d outer = _mm256_cmp_pd(av, delta, _CMP_GE_OQ);
  const __m256d m = _mm256_blendv_pd(delta, av, outer);
  const __m256d s = _mm256_sqrt_pd(_mm256_mul_pd(_mm256_mul_pd(kappa, u), m));
  const __m256d f_outer = apply_sign(s, v);
  const __m256d f_inner = _mm256_mul_pd(v, _mm256_div_pd(s, delta));
  const __m256d f = _mm256_blendv_pd(f_inner, f_outer, outer);
  const __m256d scale =
      _mm256_blendv_pd(_mm256_set1_pd(1.0), _mm256_set1_pd(0.5), outer);
  const __m256d h = _mm256_mul_pd(_mm256_div_pd(s, m), scale);
  const __m256d fu = _mm256_mul_pd(_mm256_set1_pd(0.5), _mm256_div_pd(f, u));
  return {f, h, fu};
}

void flux_linear(const EdgeBatchView& b, const double* rho, const double* a_tail,
                 const double* a_head, const FluxOut& out) {
  std::size_t e = 0;
  for (; e + 4 <= b.n; e += 4) {
    const __m256d u_tail = _mm256_mul_pd(_mm256_loadu_pd(a_tail + e), gather(rho, b.from, e));
    const __m256d u_head = _mm256_mul_pd(_mm256_loadu_pd(a_head + e), gather(rho, b.to, e));
    const __m256d v =
        _mm256_mul_pd(_mm256_sub_pd(u_head, u_tail), _mm256_loadu_pd(b.inv_len + e));
    const __m256d f = _mm256_mul_pd(_mm256_loadu_pd(b.p0 + e), v);
    _mm256_storeu_pd(out.f_tail + e, f);
    _mm256_storeu_pd(out.f_head + e, f);
  }
  for (; e < b.n; ++e) {
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
  std::size_t e = 0;
  for (; e + 4 <= b.n; e += 4) {
    const __m256d u_tail = _mm256_mul_pd(_mm256_loadu_pd(a_tail + e), gather(rho, b.from, e));
    const __m256d u_head = _mm256_mul_pd(_mm256_loadu_pd(a_head + e), gather(rho, b.to, e));
    const __m256d v =
        _mm256_mul_pd(_mm256_sub_pd(u_head, u_tail), _mm256_loadu_pd(b.inv_len + e));
    const __m256d kappa = _mm256_loadu_pd(b.p0 + e);
    const __m256d delta = _mm256_loadu_pd(b.p1 + e);
    const __m256d av = vabs(v);
    const __m256d outer = _mm256_cmp_pd(av, delta, _CMP_GE_OQ);
    const __m256d m = _mm256_blendv_pd(delta, av, outer);
    {
      const __m256d s = _mm256_sqrt_pd(_mm256_mul_pd(_mm256_mul_pd(kappa, u_tail), m));
      const __m256d f = _mm256_blendv_pd(_mm256_mul_pd(v, _mm256_div_pd(s, delta)),
                                         apply_sign(s, v), outer);
      _mm256_storeu_pd(out.f_tail + e, f);
    }
    {
      const __m256d s = _mm256_sqrt_pd(_mm256_mul_pd(_mm256_mul_pd(kappa, u_head), m));
      const __m256d f = _mm256_blendv_pd(_mm256_mul_pd(v, _mm256_div_pd(s, delta)),
                                         apply_sign(s, v), outer);
      _mm256_storeu_pd(out.f_head + e, f);
    }
  }
  for (; e < b.n; ++e) {
    const double u_tail = a_tail[e] * rho[b.from[e]];
    const double u_head = a_head[e] * rho[b.to[e]];
    const double v = (u_head - u_tail) * b.inv_len[e];
    out.f_tail[e] = fm::weymouth_flux(b.p0[e], b.p1[e], u_tail, v);
    out.f_head[e] = fm::weymouth_flux(b.p0[e], b.p1[e], u_head, v);
  }
}

void flux_jac_linear(const EdgeBatchView& b, const double* rho, const double* a_tail,
                     const double* a_head, const FluxJacOut& out) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t e = 0;
  for (; e + 4 <= b.n; e += 4) {
    const __m256d beta = _mm256_loadu_pd(b.p0 + e);
    const __m256d u_tail = _mm256_mul_pd(_mm256_loadu_pd(a_tail + e), gather(rho, b.from, e));
    const __m256d u_head = _mm256_mul_pd(_mm256_loadu_pd(a_head + e), gather(rho, b.to, e));
    const __m256d v =
        _mm256_mul_pd(_mm256_sub_pd(u_head, u_tail), _mm256_loadu_pd(b.inv_len + e));
    const __m256d f = _mm256_mul_pd(beta, v);
    _mm256_storeu_pd(out.f_tail + e, f);
    _mm256_storeu_pd(out.f_head + e, f);
    _mm256_storeu_pd(out.h_tail + e, beta);
    _mm256_storeu_pd(out.h_head + e, beta);
    _mm256_storeu_pd(out.fu_tail + e, zero);
    _mm256_storeu_pd(out.fu_head + e, zero);
  }
  for (; e < b.n; ++e) {
    const double u_tail = a_tail[e] * rho[b.from[e]];
    const double u_head = a_head[e] * rho[b.to[e]];
    const double v = (u_head - u_tail) * b.inv_len[e];
    const auto t = fm::linear_flux_terms(b.p0[e], v);
    out.f_tail[e] = t.f;
    out.f_head[e] = t.f;
    out.h_tail[e] = t.h;
    out.h_head[e] = t.h;
    out.fu_tail[e] = 0.0;
    out.fu_head[e] = 0.0;
  }
}

void flux_jac_weymouth(const EdgeBatchView& b, const double* rho, const double* a_tail,
                       const double* a_head, const FluxJacOut& out) {
  std::size_t e = 0;
  for (; e + 4 <= b.n; e += 4) {
    const __m256d u_tail = _mm256_mul_pd(_mm256_loadu_pd(a_tail + e), gather(rho, b.from, e));
    const __m256d u_head = _mm256_mul_pd(_mm256_loadu_pd(a_head + e), gather(rho, b.to, e));
    const __m256d v =
        _mm256_mul_pd(_mm256_sub_pd(u_head, u_tail), _mm256_loadu_pd(b.inv_len + e));
    const __m256d kappa = _mm256_loadu_pd(b.p0 + e);
    const __m256d delta = _mm256_loadu_pd(b.p1 + e);
    const WeymouthLanes t = weymouth_lanes(kappa, delta, u_tail, v);
    const WeymouthLanes h = weymouth_lanes(kappa, delta, u_head, v);
    _mm256_storeu_pd(out.f_tail + e, t.f);
    _mm256_storeu_pd(out.f_head + e, h.f);
    _mm256_storeu_pd(out.h_tail + e, t.h);
    _mm256_storeu_pd(out.h_head + e, h.h);
    _mm256_storeu_pd(out.fu_tail + e, t.fu);
    _mm256_storeu_pd(out.fu_head + e, h.fu);
  }
  for (; e < b.n; ++e) {
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
  __m256d worst4 = _mm256_setzero_pd();
  std::size_t e = 0;
  for (; e + 4 <= b.n; e += 4) {
    const __m256d u_tail = _mm256_mul_pd(_mm256_loadu_pd(a_tail + e), gather(rho, b.from, e));
    const __m256d u_head = _mm256_mul_pd(_mm256_loadu_pd(a_head + e), gather(rho, b.to, e));
    const __m256d d = vabs(_mm256_sub_pd(u_head, u_tail));
    const __m256d r = _mm256_div_pd(_mm256_mul_pd(_mm256_set1_pd(2.0), d),
                                    _mm256_add_pd(u_head, u_tail));
    worst4 = _mm256_max_pd(worst4, r);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, worst4);
  double worst = lanes[0];
  for (int i = 1; i < 4; ++i) worst = lanes[i] > worst ? lanes[i] : worst;
  for (; e < b.n; ++e) {
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
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i),
                                            _mm256_mul_pd(va, _mm256_loadu_pd(k + i))));
  }
  for (; i < n; ++i) out[i] = x[i] + a * k[i];
}

void rk4_combine(double* out, const double* x, double c, const double* k1,
                 const double* k2, const double* k3, const double* k4, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d outer = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_loadu_pd(k4 + i));
    const __m256d inner = _mm256_add_pd(_mm256_loadu_pd(k2 + i), _mm256_loadu_pd(k3 + i));
    const __m256d sum = _mm256_add_pd(outer, _mm256_mul_pd(two, inner));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_mul_pd(vc, sum)));
  }
  for (; i < n; ++i) {
    out[i] = x[i] + c * ((k1[i] + k4[i]) + 2.0 * (k2[i] + k3[i]));
  }
}

}  // namespace

namespace detail {

const KernelTable* avx2_table_impl() {
  static const KernelTable table{"avx2",          flux_linear,  flux_weymouth,
                                 flux_jac_linear, flux_jac_weymouth,
                                 max_rel_diff,    axpy,         rk4_combine};
  return &table;
}

}  // namespace detail
}  // namespace flownet::kernels

#else  // !__AVX2__

namespace flownet::kernels::detail {
const KernelTable* avx2_table_impl() { return nullptr; }
}  // namespace flownet::kernels::detail

#endif
