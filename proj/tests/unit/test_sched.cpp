#include <doctest.h>

#include <random>

#include "dualscale/eff_table.hpp"
#include "dualscale/error.hpp"
#include "dualscale/sched.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dualscale;
using testsupport::P;

namespace {

// Reference rule written independently: a candidate keeps the PRB if it owns the
// time pattern or none of its neighbors is among the candidates.
Pattern rule(Pattern cand, Pattern t, const std::vector<Pattern>& nb) {
  Pattern out;
  for (int l = 0; l < 32; ++l) {
    if (!cand.contains(l)) continue;
    bool neighbor_busy = false;
    for (int m = 0; m < 32; ++m) neighbor_busy = neighbor_busy || (cand.contains(m) && nb[std::size_t(l)].contains(m));
    if (t.contains(l) || !neighbor_busy) out = out.with(l);
  }
  return out;
}

std::vector<Pattern> random_neighbors(std::mt19937_64& rng, int n) {
  std::vector<Pattern> nb(static_cast<std::size_t>(n));
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < n; ++i)
    for (int l = i + 1; l < n; ++l)
      if (coin(rng)) {
        nb[std::size_t(i)] = nb[std::size_t(i)].with(l);
        nb[std::size_t(l)] = nb[std::size_t(l)].with(i);
      }
  return nb;
}

const std::vector<Pattern> kPair{P({1}), P({0})};

}  // namespace

TEST_SUITE("sched") {

TEST_CASE("active set examples") {
  CHECK(active_set(P({0, 1}), P({0}), P({0, 1}), kPair) == P({0}));
  CHECK(active_set(P({0, 1}), P({0}), P({1}), kPair) == P({1}));
  CHECK(active_set(P({0, 1}), P({0}), Pattern::empty(), kPair) == Pattern::empty());
  // A busy neighbor outside F does not block the PRB.
  CHECK(active_set(P({1}), P({0}), P({0, 1}), kPair) == P({1}));
}

TEST_CASE("active set properties (exhaustive, n <= 4)") {
  std::mt19937_64 rng(2);
  for (int n = 1; n <= 4; ++n) {
    const auto nb = random_neighbors(rng, n);
    const Pattern full = Pattern::full(n);
    int bad = 0;
    for (std::uint32_t f = 0; f < pattern_count(n); ++f)
      for (std::uint32_t t = 0; t < pattern_count(n); ++t)
        for (std::uint32_t a = 0; a < pattern_count(n); ++a) {
          const Pattern F{f}, T{t}, A{a};
          const Pattern b = active_set(F, T, A, nb);
          if (b != rule(F & A, T, nb)) ++bad;
          if (!b.subset_of(F & A)) ++bad;
          if (active_set(F, full, A, nb) != (F & A)) ++bad;
          // More time patterns never deactivate anyone.
          for (int m = 0; m < n; ++m)
            if (!b.subset_of(active_set(F, T.with(m), A, nb))) ++bad;
        }
    CHECK(bad == 0);
  }
}

TEST_CASE("eta in the slow/dual model") {
  const Scenario sc = testsupport::gain_scenario({{6.0, 1.5}, {0.7, 3.0}}, {1.0, 1.0});
  const ApTable s = fixed_view(EffTable(sc), sc);
  CHECK(eta_fixed(0, P({1}), P({0, 1}), P({0, 1}), s, sc.neighbors) == 0.0);
  for (std::uint32_t f = 0; f < 4; ++f)
    for (std::uint32_t a = 0; a < 4; ++a)
      for (int i = 0; i < 2; ++i) {
        if (!Pattern{f}.contains(i)) continue;
        CHECK(eta_fixed(i, Pattern{f}, P({0, 1}), Pattern{a}, s, sc.neighbors) == s.at(i, Pattern{f} & Pattern{a}));
      }
  CHECK(eta_fixed(0, P({0, 1}), P({0}), P({0, 1}), s, sc.neighbors) == s.at(0, P({0})));
  CHECK(eta_fixed(1, P({0, 1}), P({0}), P({0, 1}), s, sc.neighbors) == 0.0);
  CHECK(eta_fixed(1, P({0, 1}), P({0}), P({1}), s, sc.neighbors) == s.at(1, P({1})));
}

TEST_CASE("opportunism never lowers a time-pattern owner below its no-replacement efficiency") {
  std::mt19937_64 rng(4);
  for (int n = 1; n <= 4; ++n) {
    const auto g = testsupport::random_gains(rng, n, n);
    Scenario sc = testsupport::gain_scenario(g, std::vector<double>(std::size_t(n), 1.0));
    sc.neighbors = random_neighbors(rng, n);
    const ApTable s = fixed_view(EffTable(sc), sc);
    int bad = 0;
    for (std::uint32_t f = 0; f < pattern_count(n); ++f)
      for (std::uint32_t t = 0; t < pattern_count(n); ++t)
        for (std::uint32_t a = 0; a < pattern_count(n); ++a)
          for (int i = 0; i < n; ++i) {
            const Pattern F{f}, T{t}, A{a};
            if (!F.contains(i) || !A.contains(i) || !T.contains(i)) continue;
            if (eta_fixed(i, F, T, A, s, sc.neighbors) < s.at(i, F & A) - 1e-15) ++bad;
          }
    CHECK(bad == 0);
  }
}

TEST_CASE("flexible active set examples") {
  // Lone busy server always transmits, whether or not it owns T.
  CHECK(active_set_flex(0, P({0, 1}), P({0}), Pattern::empty(), kPair) == P({0}));
  CHECK(active_set_flex(0, P({0, 1}), P({1}), Pattern::empty(), kPair) == P({0}));
  // A busy neighbor holding F silences a server without T.
  CHECK(active_set_flex(0, P({0, 1}), P({1}), P({1}), kPair) == P({1}));
  // The server owning T keeps it.
  CHECK(active_set_flex(0, P({0, 1}), P({0}), P({1}), kPair) == P({0}));
  CHECK_THROWS_WITH_AS(active_set_flex(0, P({1}), P({0}), P({1}), kPair), doctest::Contains("server lacks pattern"), Error);

  const Scenario sc = testsupport::gain_scenario({{6.0, 1.5, 2.0}, {0.7, 3.0, 2.0}}, {1.0, 1.0, 1.0}, false);
  const EffTable eff(sc);
  CHECK(eta_flex(0, 2, P({0, 1}), P({1}), P({1}), eff, sc.neighbors) == 0.0);
  CHECK(eta_flex(0, 2, P({0}), P({0}), Pattern::empty(), eff, sc.neighbors) == eff.at(0, 2, P({0})));
}

TEST_CASE("collapses match brute-force sums") {
  std::mt19937_64 rng(8);
  const auto g = testsupport::random_gains(rng, 2, 2);
  const Scenario sc = testsupport::gain_scenario(g, {1.0, 1.0});
  const ApTable s = fixed_view(EffTable(sc), sc);
  const std::vector<Pattern> nb = sc.neighbors;
  const auto z = oracle::random_distribution(rng, 4);
  const auto y = oracle::random_distribution(rng, 4);
  const auto mt = collapse_over_time(s, nb, z);
  const auto mf = collapse_over_freq(s, nb, y);
  for (int i = 0; i < 2; ++i)
    for (std::uint32_t p = 0; p < 4; ++p)
      for (std::uint32_t a = 0; a < 4; ++a) {
        double over_t = 0.0;
        double over_f = 0.0;
        for (std::uint32_t q = 0; q < 4; ++q) {
          // q plays T for the time collapse and F for the frequency collapse.
          const Pattern bt = rule(Pattern{p} & Pattern{a}, Pattern{q}, nb);
          if (bt.contains(i)) over_t += z[q] * testsupport::shannon(g, i, i, bt);
          const Pattern bf = rule(Pattern{q} & Pattern{a}, Pattern{p}, nb);
          if (bf.contains(i)) over_f += y[q] * testsupport::shannon(g, i, i, bf);
        }
        CHECK(mt.at(i, Pattern{p}, Pattern{a}) == doctest::Approx(over_t).epsilon(1e-12));
        CHECK(mf.at(i, Pattern{p}, Pattern{a}) == doctest::Approx(over_f).epsilon(1e-12));
      }

  // z_N = 1: no opportunism, the slow-timescale kernel.
  const auto m1 = collapse_over_time(s, nb, testsupport::one_hot(4, 3));
  for (int i = 0; i < 2; ++i)
    for (std::uint32_t f = 0; f < 4; ++f)
      for (std::uint32_t a = 0; a < 4; ++a)
        if (Pattern{f}.contains(i)) CHECK(m1.at(i, Pattern{f}, Pattern{a}) == s.at(i, Pattern{f} & Pattern{a}));

  // Uniform over two time patterns: the average of the two slices.
  const auto ma = collapse_over_time(s, nb, testsupport::one_hot(4, 1));
  const auto mb = collapse_over_time(s, nb, testsupport::one_hot(4, 2));
  const auto mu = collapse_over_time(s, nb, std::vector<double>{0.0, 0.5, 0.5, 0.0});
  for (std::size_t e = 0; e < mu.m.size(); ++e) CHECK(mu.m[e] == doctest::Approx(0.5 * (ma.m[e] + mb.m[e])).epsilon(1e-15));
}

}
