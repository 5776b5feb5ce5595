#include "dualscale/allocation.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dualscale/error.hpp"

namespace dualscale {

Allocation Allocation::full_reuse(int n, int k) {
  Allocation a;
  a.n = n;
  a.k = k;
  a.y.assign(pattern_count(n), 0.0);
  a.z.assign(pattern_count(n), 0.0);
  a.y.back() = 1.0;
  a.z.back() = 1.0;
  return a;
}

void Allocation::validate(double tol) const {
  const std::size_t np = patterns();
  auto check_dist = [&](const std::vector<double>& v, const char* name) {
    if (v.size() != np) throw Error(ErrorKind::InvalidInput, std::string(name) + " has wrong length");
    for (double e : v)
      if (!std::isfinite(e) || e < -tol) throw Error(ErrorKind::InvalidInput, std::string(name) + " has a negative or non-finite entry");
    const double sum = std::accumulate(v.begin(), v.end(), 0.0);
    if (std::abs(sum - 1.0) > tol * static_cast<double>(np)) throw Error(ErrorKind::InvalidInput, std::string(name) + " does not sum to one");
  };
  check_dist(y, "y");
  check_dist(z, "z");
  if (x.empty()) return;
  if (x.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(k) * np)
    throw Error(ErrorKind::InvalidInput, "x has wrong length");
  for (std::size_t f = 0; f < np; ++f) {
    const Pattern pat{static_cast<std::uint32_t>(f)};
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int j = 0; j < k; ++j) {
        const double v = xv(i, j, pat);
        if (!std::isfinite(v) || v < -tol) throw Error(ErrorKind::InvalidInput, "x has a negative or non-finite entry");
        if (!pat.contains(i) && v > tol) throw Error(ErrorKind::InvalidInput, "x assigns spectrum of a pattern the AP does not hold");
        sum += v;
      }
      if (pat.contains(i) && std::abs(sum - y[f]) > tol * static_cast<double>(k + 1))
        throw Error(ErrorKind::InvalidInput, "x does not split y_F for every AP in F");
    }
  }
}

}  // namespace dualscale
