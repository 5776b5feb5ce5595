// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <algorithm>

#include "dualscale/kernels.hpp"

namespace dualscale::kernels {

namespace {

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

RowSums row_terms(std::span<const double> r, std::span<const double> w, double a, double rmin,
                  std::span<double> dobj, std::span<double> dcon) {
  const std::size_t n = r.size();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d va = _mm256_set1_pd(a);
  const __m256d va2 = _mm256_set1_pd(2.0 * a);
  const __m256d vmin = _mm256_set1_pd(rmin);
  __m256d sobj = _mm256_setzero_pd();
  __m256d scon = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vr = _mm256_max_pd(_mm256_loadu_pd(r.data() + i), vmin);
    const __m256d vw = _mm256_loadu_pd(w.data() + i);
    const __m256d inv = _mm256_div_pd(one, vr);
    const __m256d inv2 = _mm256_mul_pd(inv, inv);
    const __m256d winv = _mm256_mul_pd(vw, inv);
    scon = _mm256_add_pd(scon, winv);
    sobj = _mm256_fmadd_pd(vw, _mm256_fmadd_pd(va, inv2, inv), sobj);
    const __m256d winv2 = _mm256_mul_pd(vw, inv2);
    // -w (2a inv^3 + inv^2) = -(w inv^2) (2a inv + 1)
    const __m256d go = _mm256_mul_pd(winv2, _mm256_fmadd_pd(va2, inv, one));
    _mm256_storeu_pd(dobj.data() + i, _mm256_sub_pd(_mm256_setzero_pd(), go));
    _mm256_storeu_pd(dcon.data() + i, _mm256_sub_pd(_mm256_setzero_pd(), winv2));
  }
  RowSums s{hsum(sobj), hsum(scon)};
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
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4) s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), s0);
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

SegmentSums segment_sums(std::span<const double> r, std::span<const double> d, std::span<const double> w, double a,
                         double gamma, double rmin) {
  const std::size_t n = r.size();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d va2 = _mm256_set1_pd(2.0 * a);
  const __m256d va6 = _mm256_set1_pd(6.0 * a);
  const __m256d vg = _mm256_set1_pd(gamma);
  const __m256d vmin = _mm256_set1_pd(rmin);
  __m256d con = _mm256_setzero_pd(), dcon = _mm256_setzero_pd(), d2con = _mm256_setzero_pd();
  __m256d dobj = _mm256_setzero_pd(), d2obj = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vd = _mm256_loadu_pd(d.data() + i);
    const __m256d vw = _mm256_loadu_pd(w.data() + i);
    const __m256d vr = _mm256_max_pd(_mm256_fmadd_pd(vg, vd, _mm256_loadu_pd(r.data() + i)), vmin);
    const __m256d inv = _mm256_div_pd(one, vr);
    const __m256d inv2 = _mm256_mul_pd(inv, inv);
    const __m256d inv3 = _mm256_mul_pd(inv2, inv);
    const __m256d wd = _mm256_mul_pd(vw, vd);
    const __m256d wdd = _mm256_mul_pd(wd, vd);
    con = _mm256_fmadd_pd(vw, inv, con);
    dcon = _mm256_fnmadd_pd(wd, inv2, dcon);
    d2con = _mm256_fmadd_pd(_mm256_mul_pd(two, wdd), inv3, d2con);
    dobj = _mm256_fnmadd_pd(_mm256_mul_pd(wd, inv2), _mm256_fmadd_pd(va2, inv, one), dobj);
    d2obj = _mm256_fmadd_pd(_mm256_mul_pd(wdd, inv3), _mm256_fmadd_pd(va6, inv, two), d2obj);
  }
  SegmentSums s{hsum(con), hsum(dcon), hsum(d2con), hsum(dobj), hsum(d2obj)};
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
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y.data() + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops table{&row_terms, &dot, &segment_sums, &axpy};
  return table;
}

}  // namespace dualscale::kernels
