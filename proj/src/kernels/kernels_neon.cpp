// AArch64 Advanced SIMD variants (two doubles per lane group).
#include <arm_neon.h>

#include <algorithm>

#include "dualscale/kernels.hpp"

namespace dualscale::kernels {

namespace {

RowSums row_terms(std::span<const double> r, std::span<const double> w, double a, double rmin,
                  std::span<double> dobj, std::span<double> dcon) {
  const std::size_t n = r.size();
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t va2 = vdupq_n_f64(2.0 * a);
  const float64x2_t vmin = vdupq_n_f64(rmin);
  float64x2_t sobj = vdupq_n_f64(0.0);
  float64x2_t scon = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vr = vmaxq_f64(vld1q_f64(r.data() + i), vmin);
    const float64x2_t vw = vld1q_f64(w.data() + i);
    const float64x2_t inv = vdivq_f64(one, vr);
    const float64x2_t inv2 = vmulq_f64(inv, inv);
    scon = vfmaq_f64(scon, vw, inv);
    sobj = vfmaq_f64(sobj, vw, vfmaq_f64(inv, va, inv2));
    const float64x2_t winv2 = vmulq_f64(vw, inv2);
    vst1q_f64(dobj.data() + i, vnegq_f64(vmulq_f64(winv2, vfmaq_f64(one, va2, inv))));
    vst1q_f64(dcon.data() + i, vnegq_f64(winv2));
  }
  RowSums s{vaddvq_f64(sobj), vaddvq_f64(scon)};
  for (; i < n; ++i) {
    const double inv = 1.0 / std::max(r[i], rmin);
    const double inv2 = inv * inv;
    s.obj += w[i] * (a * inv2 + inv);
    s.con += w[i] * inv;
    dobj[i] = -w[i] * inv2 * (2.0 * a * inv + 1.0);
    dcon[i] = -w[i] * inv2;
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  float64x2_t s0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) s0 = vfmaq_f64(s0, vld1q_f64(a.data() + i), vld1q_f64(b.data() + i));
  double s = vaddvq_f64(s0);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

SegmentSums segment_sums(std::span<const double> r, std::span<const double> d, std::span<const double> w, double a,
                         double gamma, double rmin) {
  const std::size_t n = r.size();
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t two = vdupq_n_f64(2.0);
  const float64x2_t va2 = vdupq_n_f64(2.0 * a);
  const float64x2_t va6 = vdupq_n_f64(6.0 * a);
  const float64x2_t vg = vdupq_n_f64(gamma);
  const float64x2_t vmin = vdupq_n_f64(rmin);
  float64x2_t con = vdupq_n_f64(0.0), dcon = con, d2con = con, dobj = con, d2obj = con;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vd = vld1q_f64(d.data() + i);
    const float64x2_t vw = vld1q_f64(w.data() + i);
    const float64x2_t vr = vmaxq_f64(vfmaq_f64(vld1q_f64(r.data() + i), vg, vd), vmin);
    const float64x2_t inv = vdivq_f64(one, vr);
    const float64x2_t inv2 = vmulq_f64(inv, inv);
    const float64x2_t inv3 = vmulq_f64(inv2, inv);
    const float64x2_t wd = vmulq_f64(vw, vd);
    const float64x2_t wdd = vmulq_f64(wd, vd);
    con = vfmaq_f64(con, vw, inv);
    dcon = vfmsq_f64(dcon, wd, inv2);
    d2con = vfmaq_f64(d2con, vmulq_f64(two, wdd), inv3);
    dobj = vfmsq_f64(dobj, vmulq_f64(wd, inv2), vfmaq_f64(one, va2, inv));
    d2obj = vfmaq_f64(d2obj, vmulq_f64(wdd, inv3), vfmaq_f64(two, va6, inv));
  }
  SegmentSums s{vaddvq_f64(con), vaddvq_f64(dcon), vaddvq_f64(d2con), vaddvq_f64(dobj), vaddvq_f64(d2obj)};
  for (; i < n; ++i) {
    const double inv = 1.0 / std::max(r[i] + gamma * d[i], rmin);
    const double inv2 = inv * inv;
    const double inv3 = inv2 * inv;
    const double wd = w[i] * d[i];
    const double wdd = wd * d[i];
    s.con += w[i] * inv;
    s.dcon -= wd * inv2;
    s.d2con += 2.0 * wdd * inv3;
    s.dobj -= wd * inv2 * (2.0 * a * inv + 1.0);
    s.d2obj += wdd * inv3 * (6.0 * a * inv + 2.0);
  }
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y.data() + i, vfmaq_f64(vld1q_f64(y.data() + i), va, vld1q_f64(x.data() + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const Ops& neon_ops() {
  static const Ops table{&row_terms, &dot, &segment_sums, &axpy};
  return table;
}

}  // namespace dualscale::kernels
