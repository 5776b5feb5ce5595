#include <algorithm>

#include "dualscale/kernels.hpp"

namespace dualscale::kernels {

namespace {

RowSums row_terms(std::span<const double> r, std::span<const double> w, double a, double rmin,
                  std::span<double> dobj, std::span<double> dcon) {
  RowSums s;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double inv = 1.0 / std::max(r[i], rmin);
    const double inv2 = inv * inv;
    s.obj += w[i] * (a * inv2 + inv);
    s.con += w[i] * inv;
    dobj[i] = -w[i] * (2.0 * a * inv2 * inv + inv2);
    dcon[i] = -w[i] * inv2;
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

SegmentSums segment_sums(std::span<const double> r, std::span<const double> d, std::span<const double> w, double a,
                         double gamma, double rmin) {
  SegmentSums s;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double inv = 1.0 / std::max(r[i] + gamma * d[i], rmin);
    const double inv2 = inv * inv;
    const double inv3 = inv2 * inv;
    const double wd = w[i] * d[i];
    const double wdd = wd * d[i];
    s.con += w[i] * inv;
    s.dcon -= wd * inv2;
    s.d2con += 2.0 * wdd * inv3;
    s.dobj -= wd * (2.0 * a * inv3 + inv2);
    s.d2obj += wdd * (6.0 * a * inv3 * inv + 2.0 * inv3);
  }
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table{&row_terms, &dot, &segment_sums, &axpy};
  return table;
}

}  // namespace dualscale::kernels
