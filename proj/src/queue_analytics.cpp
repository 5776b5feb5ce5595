#include "dualscale/queue_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "dualscale/error.hpp"
#include "dualscale/sched.hpp"

namespace dualscale {

namespace {

Pattern pat(std::size_t bits) { return Pattern{static_cast<std::uint32_t>(bits)}; }

[[noreturn]] void zero_rate() { throw Error(ErrorKind::Numerical, "zero service rate"); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::string format_vec(std::span<const double> v) {
  std::ostringstream os;
  os.precision(12);
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

using Map = std::function<std::vector<double>(std::span<const double>)>;

// Iterates u <- map(u) until the residual |map(u) - u| drops below eps; returns the last u.
FixedPointResult iterate(std::vector<double> u, const Map& map, const FixedPointOptions& opt, bool check_start,
                         bool guard_unstable) {
  FixedPointResult res;
  if (opt.keep_trace) res.trace.push_back(u);
  for (int it = 0;; ++it) {
    std::vector<double> next = map(u);
    if (check_start && it == 0) {
      for (std::size_t i = 0; i < u.size(); ++i)
        if (next[i] > u[i] + 1e-12) throw Error(ErrorKind::InvalidInput, "non-contractive start");
    }
    if (guard_unstable) {
      for (double v : next)
        if (v >= 1.0) throw Error(ErrorKind::Unstable, "unstable queue: utilization reaches 1");
    }
    if (max_abs_diff(next, u) < opt.eps) {
      res.util = std::move(u);
      res.iterations = it;
      return res;
    }
    if (it >= opt.max_iter)
      throw Error(ErrorKind::Numerical, "fixed-point iteration cap exceeded; last iterate " + format_vec(next));
    u = std::move(next);
    if (opt.keep_trace) res.trace.push_back(u);
  }
}

}  // namespace

std::vector<double> busy_probs(std::span<const double> rho) {
  const int n = static_cast<int>(rho.size());
  std::vector<double> p(pattern_count(n), 0.0);
  p[0] = 1.0;
  for (int i = 0; i < n; ++i) {
    const std::size_t half = std::size_t{1} << i;
    const double r = rho[static_cast<std::size_t>(i)];
    for (std::size_t a = 0; a < half; ++a) {
      p[a | half] = p[a] * r;
      p[a] *= 1.0 - r;
    }
  }
  return p;
}

std::vector<double> conditional_weights(std::span<const double> rho, int i) {
  std::vector<double> r(rho.begin(), rho.end());
  r[static_cast<std::size_t>(i)] = 1.0;
  return busy_probs(r);
}

RateTable rates_fixed(std::span<const double> y, const ApTable& s) {
  const int n = s.n;
  const std::size_t np = pattern_count(n);
  RateTable out(n, n);
  for (std::size_t f = 0; f < np; ++f) {
    const double yf = y[f];
    if (yf == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      if (!pat(f).contains(i)) continue;
      for (std::size_t a = 0; a < np; ++a) out.at(i, pat(a)) += s.at(i, pat(f & a)) * yf;
    }
  }
  return out;
}

RateTable rates_dual(std::span<const double> y, std::span<const double> z, const ApTable& s,
                     std::span<const Pattern> neighbors) {
  const int n = s.n;
  const std::size_t np = pattern_count(n);
  RateTable out(n, n);
  for (std::size_t f = 0; f < np; ++f) {
    if (y[f] == 0.0) continue;
    for (std::size_t t = 0; t < np; ++t) {
      const double w = y[f] * z[t];
      if (w == 0.0) continue;
      for (std::size_t a = 0; a < np; ++a) {
        const Pattern active = active_set(pat(f), pat(t), pat(a), neighbors);
        for (std::uint32_t rest = active.bits(); rest != 0; rest &= rest - 1) {
          const int i = std::countr_zero(rest);
          out.at(i, pat(a)) += s.at(i, active) * w;
        }
      }
    }
  }
  return out;
}

RateTable rates_flex(const Allocation& alloc, const EffTable& eff, std::span<const Pattern> neighbors) {
  const int n = alloc.n;
  const int k = alloc.k;
  const std::size_t np = pattern_count(n);
  RateTable out(k, n);
  for (std::size_t t = 0; t < np; ++t) {
    const double zt = alloc.z[t];
    if (zt == 0.0) continue;
    for (std::size_t f = 1; f < np; ++f) {
      for (int i = 0; i < n; ++i) {
        if (!pat(f).contains(i)) continue;
        for (int j = 0; j < k; ++j) {
          const double w = zt * alloc.xv(i, j, pat(f));
          if (w == 0.0) continue;
          for (std::size_t inter = 0; inter < np; ++inter) {
            const Pattern c = active_set_flex(i, pat(f), pat(t), pat(inter), neighbors);
            out.at(j, pat(inter)) += w * eff.at(i, j, c);
          }
        }
      }
    }
  }
  return out;
}

double delay_mg1(double lambda, double rho, std::span<const double> weights, std::span<const double> rates) {
  if (rho >= 1.0) throw Error(ErrorKind::Unstable, "unstable queue");
  const double wait = lambda / (1.0 - rho);
  double d = 0.0;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    if (weights[c] <= 0.0) continue;
    if (rates[c] <= 0.0) zero_rate();
    const double inv = 1.0 / rates[c];
    d += weights[c] * (inv * inv * wait + inv);
  }
  return d;
}

double delay_fixed(int i, double lambda, std::span<const double> rho, std::span<const double> rate_row) {
  const auto w = conditional_weights(rho, i);
  return delay_mg1(lambda, rho[static_cast<std::size_t>(i)], w, rate_row);
}

double delay_flex(double lambda, double sigma, std::span<const double> p, std::span<const double> rate_row) {
  return delay_mg1(lambda, sigma, p, rate_row);
}

std::vector<double> f_map(std::span<const double> rho, const RateTable& rates, std::span<const double> lambda) {
  const int n = rates.n;
  const std::size_t np = pattern_count(n);
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double li = lambda[static_cast<std::size_t>(i)];
    if (li == 0.0) continue;
    const auto w = conditional_weights(rho, i);
    double acc = 0.0;
    for (std::size_t a = 0; a < np; ++a) {
      if (w[a] <= 0.0) continue;
      const double r = rates.at(i, pat(a));
      if (r <= 0.0) zero_rate();
      acc += w[a] / r;
    }
    out[static_cast<std::size_t>(i)] = li * acc;
  }
  return out;
}

FixedPointResult fixed_point_rho(std::span<const double> rho0, const RateTable& rates, std::span<const double> lambda,
                                 const FixedPointOptions& opt) {
  auto map = [&](std::span<const double> r) { return f_map(r, rates, lambda); };
  auto res = iterate({rho0.begin(), rho0.end()}, map, opt, true, false);
  res.rho = res.util;
  res.p = busy_probs(res.rho);
  return res;
}

FixedPointResult least_fixed_point_rho(const RateTable& rates, std::span<const double> lambda,
                                       const FixedPointOptions& opt) {
  auto map = [&](std::span<const double> r) { return f_map(r, rates, lambda); };
  auto res = iterate(std::vector<double>(static_cast<std::size_t>(rates.n), 0.0), map, opt, false, true);
  res.rho = res.util;
  res.p = busy_probs(res.rho);
  return res;
}

std::vector<double> rho_from_sigma(std::span<const double> sigma, const Allocation& alloc) {
  const std::size_t np = alloc.patterns();
  std::vector<double> rho(static_cast<std::size_t>(alloc.n), 0.0);
  for (int i = 0; i < alloc.n; ++i) {
    double band = 0.0;
    double busy = 0.0;
    for (std::size_t f = 0; f < np; ++f) {
      if (!pat(f).contains(i)) continue;
      band += alloc.y[f];
      for (int j = 0; j < alloc.k; ++j) busy += sigma[static_cast<std::size_t>(j)] * alloc.xv(i, j, pat(f));
    }
    if (band > 0.0) rho[static_cast<std::size_t>(i)] = busy / band;
  }
  return rho;
}

std::vector<double> g_map(std::span<const double> sigma, const Allocation& alloc, const RateTable& rates,
                          std::span<const double> lambda) {
  const auto p = busy_probs(rho_from_sigma(sigma, alloc));
  std::vector<double> out(static_cast<std::size_t>(alloc.k), 0.0);
  for (int j = 0; j < alloc.k; ++j) {
    const double lj = lambda[static_cast<std::size_t>(j)];
    if (lj == 0.0) continue;
    double acc = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
      if (p[a] <= 0.0) continue;
      const double r = rates.at(j, pat(a));
      if (r <= 0.0) zero_rate();
      acc += p[a] / r;
    }
    out[static_cast<std::size_t>(j)] = lj * acc;
  }
  return out;
}

namespace {

FixedPointResult finish_sigma(FixedPointResult res, const Allocation& alloc) {
  res.rho = rho_from_sigma(res.util, alloc);
  res.p = busy_probs(res.rho);
  return res;
}

}  // namespace

FixedPointResult fixed_point_sigma(std::span<const double> sigma0, const Allocation& alloc, const RateTable& rates,
                                   std::span<const double> lambda, const FixedPointOptions& opt) {
  auto map = [&](std::span<const double> s) { return g_map(s, alloc, rates, lambda); };
  return finish_sigma(iterate({sigma0.begin(), sigma0.end()}, map, opt, true, false), alloc);
}

FixedPointResult least_fixed_point_sigma(const Allocation& alloc, const RateTable& rates,
                                         std::span<const double> lambda, const FixedPointOptions& opt) {
  auto map = [&](std::span<const double> s) { return g_map(s, alloc, rates, lambda); };
  return finish_sigma(iterate(std::vector<double>(static_cast<std::size_t>(alloc.k), 0.0), map, opt, false, true), alloc);
}

}  // namespace dualscale
