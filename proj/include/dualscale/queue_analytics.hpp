#pragma once

#include <span>
#include <vector>

#include "dualscale/allocation.hpp"
#include "dualscale/eff_table.hpp"
#include "dualscale/pattern.hpp"

namespace dualscale {

/// r[q][A]: service rate (packets/s) of queue q under busy / interferer set A.
struct RateTable {
  int queues = 0;
  int n = 0;
  std::vector<double> r;

  RateTable() = default;
  RateTable(int queues_, int n_) : queues(queues_), n(n_), r(static_cast<std::size_t>(queues_) * pattern_count(n_), 0.0) {}

  double& at(int q, Pattern a) { return r[static_cast<std::size_t>(q) * pattern_count(n) + a.bits()]; }
  double at(int q, Pattern a) const { return r[static_cast<std::size_t>(q) * pattern_count(n) + a.bits()]; }
  std::span<const double> row(int q) const { return {r.data() + static_cast<std::size_t>(q) * pattern_count(n), pattern_count(n)}; }
};

/// Product-form probability of every busy set: p[A] = prod_{i in A} rho_i prod_{i not in A} (1 - rho_i).
std::vector<double> busy_probs(std::span<const double> rho);

/// p[A] / rho_i evaluated as a product (no division); zero for A not containing i.
std::vector<double> conditional_weights(std::span<const double> rho, int i);

/// r[i][A] = sum_F s^i[F & A] y_F.
RateTable rates_fixed(std::span<const double> y, const ApTable& s);

/// r[i][A] = sum_{F,T} eta^i(F,T,A) y_F z_T with the opportunistic active set.
RateTable rates_dual(std::span<const double> y, std::span<const double> z, const ApTable& s,
                     std::span<const Pattern> neighbors);

/// r[j][I] = sum_T z_T sum_F sum_i eta^{i->j}(F,T,I) x^{i->j}_F.
RateTable rates_flex(const Allocation& alloc, const EffTable& eff, std::span<const Pattern> neighbors);

/// Multi-class M/G/1 mean delay, classes given by normalized weights and their rates:
/// d = sum_c w_c ((1/r_c)^2 lambda/(1-rho) + 1/r_c). Classes with zero weight are skipped.
double delay_mg1(double lambda, double rho, std::span<const double> weights, std::span<const double> rates);

/// Fixed-mode delay of AP i (weights p_A / rho_i over A containing i).
double delay_fixed(int i, double lambda, std::span<const double> rho, std::span<const double> rate_row);

/// Flexible-mode delay of a UE group (weights p_I over every I).
double delay_flex(double lambda, double sigma, std::span<const double> p, std::span<const double> rate_row);

/// f^i(rho) = sum_{A contains i} [prod_{l in A, l != i} rho_l prod_{l not in A} (1-rho_l)] lambda^i / r[i][A].
std::vector<double> f_map(std::span<const double> rho, const RateTable& rates, std::span<const double> lambda);

struct FixedPointResult {
  std::vector<double> util;                  // rho (fixed modes) or sigma (flexible)
  std::vector<double> rho;                   // AP utilizations (equals util in fixed modes)
  std::vector<double> p;                     // busy / interferer set probabilities
  int iterations = 0;
  std::vector<std::vector<double>> trace;    // iterates, only when requested
};

struct FixedPointOptions {
  double eps = 1e-8;
  int max_iter = 10000;
  bool keep_trace = false;
};

/// Downward iteration rho <- f(rho); requires rho0 >= f(rho0).
FixedPointResult fixed_point_rho(std::span<const double> rho0, const RateTable& rates, std::span<const double> lambda,
                                 const FixedPointOptions& opt = {});

/// Least fixed point of f, iterating upward from rho = 0. Throws Unstable if any rho_i reaches 1.
FixedPointResult least_fixed_point_rho(const RateTable& rates, std::span<const double> lambda,
                                       const FixedPointOptions& opt = {});

/// rho_i = sum_{F contains i} sum_j sigma_j x^{i->j}_F / sum_{F contains i} y_F; 0 for APs without spectrum.
std::vector<double> rho_from_sigma(std::span<const double> sigma, const Allocation& alloc);

/// g_j(sigma) = sum_I p_I(rho(sigma)) lambda^j / r[j][I].
std::vector<double> g_map(std::span<const double> sigma, const Allocation& alloc, const RateTable& rates,
                          std::span<const double> lambda);

FixedPointResult fixed_point_sigma(std::span<const double> sigma0, const Allocation& alloc, const RateTable& rates,
                                   std::span<const double> lambda, const FixedPointOptions& opt = {});

FixedPointResult least_fixed_point_sigma(const Allocation& alloc, const RateTable& rates,
                                         std::span<const double> lambda, const FixedPointOptions& opt = {});

}  // namespace dualscale
