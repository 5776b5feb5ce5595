#include "dualscale/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <string>
#include <unordered_map>

#include "dualscale/eff_table.hpp"
#include "dualscale/error.hpp"
#include "dualscale/sched.hpp"

namespace dualscale {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kWidthTol = 1e-15;
constexpr double kStudentT19 = 2.093;  // two-sided 95%, 19 degrees of freedom

// One elementary interval of a spectrum pattern: every AP holding the pattern
// serves a single group over it.
struct Interval {
  double width = 0.0;
  std::vector<int> group;  // per AP; -1 outside the pattern
};

struct PatternLayout {
  Pattern f;
  std::vector<Interval> intervals;
};

// Rates as a function of the nonempty-queue mask, with a cache.
class RateModel {
 public:
  RateModel(const Scenario& sc, const Allocation& alloc)
      : sc_(sc), alloc_(alloc), eff_(sc), n_(sc.n()), flexible_(!sc.fixed()) {
    const std::size_t np = pattern_count(n_);
    for (std::size_t t = 0; t < np; ++t)
      if (alloc.z[t] > 0.0) times_.push_back(static_cast<std::uint32_t>(t));
    if (flexible_) {
      build_layouts();
      servers_.assign(static_cast<std::size_t>(sc.k()), 0);
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < sc.k(); ++j)
          for (std::size_t f = 1; f < np; ++f)
            if (Pattern{static_cast<std::uint32_t>(f)}.contains(i) && alloc.xv(i, j, Pattern{static_cast<std::uint32_t>(f)}) > 0.0)
              servers_[static_cast<std::size_t>(j)] |= 1u << i;
    } else {
      s_ = fixed_view(eff_, sc);
      for (std::size_t f = 1; f < np; ++f)
        if (alloc.y[f] > 0.0) freqs_.push_back(static_cast<std::uint32_t>(f));
    }
  }

  int queues() const { return flexible_ ? sc_.k() : n_; }

  const std::vector<double>& rates(std::uint64_t nonempty) {
    auto it = cache_.find(nonempty);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(nonempty, compute(nonempty)).first->second;
  }

  std::vector<double> compute(std::uint64_t nonempty) const {
    return flexible_ ? compute_flex(nonempty) : compute_fixed(static_cast<std::uint32_t>(nonempty));
  }

 private:
  std::vector<double> compute_fixed(std::uint32_t busy) const {
    std::vector<double> r(static_cast<std::size_t>(n_), 0.0);
    const Pattern a{busy};
    for (int i = 0; i < n_; ++i) {
      if (!a.contains(i)) continue;
      double acc = 0.0;
      for (auto f : freqs_)
        for (auto t : times_)
          acc += alloc_.y[f] * alloc_.z[t] * eta_fixed(i, Pattern{f}, Pattern{t}, a, s_, sc_.neighbors);
      r[static_cast<std::size_t>(i)] = acc * sc_.mean_packet_bits;
    }
    return r;
  }

  std::vector<double> compute_flex(std::uint64_t nonempty) const {
    std::vector<double> r(static_cast<std::size_t>(sc_.k()), 0.0);
    std::uint32_t busy = 0;
    for (std::uint64_t rest = nonempty; rest != 0; rest &= rest - 1)
      busy |= servers_[static_cast<std::size_t>(std::countr_zero(rest))];
    for (const auto& lay : layouts_) {
      const std::uint32_t holders = lay.f.bits() & busy;
      for (const auto& iv : lay.intervals) {
        std::uint32_t cand = 0;
        for (int i = 0; i < n_; ++i) {
          const int g = iv.group[static_cast<std::size_t>(i)];
          if (g >= 0 && ((nonempty >> g) & 1u)) cand |= 1u << i;
        }
        if (cand == 0) continue;
        for (auto t : times_) {
          std::uint32_t tx = 0;
          for (std::uint32_t rest = cand; rest != 0; rest &= rest - 1) {
            const int l = std::countr_zero(rest);
            if (((t >> l) & 1u) || (sc_.neighbors[static_cast<std::size_t>(l)].bits() & holders) == 0) tx |= 1u << l;
          }
          for (std::uint32_t rest = tx; rest != 0; rest &= rest - 1) {
            const int i = std::countr_zero(rest);
            const int g = iv.group[static_cast<std::size_t>(i)];
            r[static_cast<std::size_t>(g)] += alloc_.z[t] * iv.width * eff_.at(i, g, Pattern{tx});
          }
        }
      }
    }
    for (auto& v : r) v *= sc_.mean_packet_bits;
    return r;
  }

  // Each AP lays its segments of pattern F side by side in group order; the union
  // of all breakpoints splits [0, y_F) into intervals with one group per AP.
  void build_layouts() {
    const std::size_t np = pattern_count(n_);
    const int k = sc_.k();
    for (std::size_t fb = 1; fb < np; ++fb) {
      const Pattern f{static_cast<std::uint32_t>(fb)};
      if (alloc_.y[fb] <= 0.0) continue;
      std::vector<double> cuts{0.0, alloc_.y[fb]};
      for (int i = 0; i < n_; ++i) {
        if (!f.contains(i)) continue;
        double c = 0.0;
        for (int j = 0; j < k; ++j) {
          c += alloc_.xv(i, j, f);
          cuts.push_back(std::min(c, alloc_.y[fb]));
        }
      }
      std::sort(cuts.begin(), cuts.end());
      PatternLayout lay{f, {}};
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double lo = cuts[c];
        const double hi = cuts[c + 1];
        if (hi - lo <= kWidthTol) continue;
        const double mid = 0.5 * (lo + hi);
        Interval iv{hi - lo, std::vector<int>(static_cast<std::size_t>(n_), -1)};
        for (int i = 0; i < n_; ++i) {
          if (!f.contains(i)) continue;
          double acc = 0.0;
          for (int j = 0; j < k; ++j) {
            const double w = alloc_.xv(i, j, f);
            if (w > 0.0 && mid >= acc && mid < acc + w) {
              iv.group[static_cast<std::size_t>(i)] = j;
              break;
            }
            acc += w;
          }
        }
        lay.intervals.push_back(std::move(iv));
      }
      layouts_.push_back(std::move(lay));
    }
  }

  const Scenario& sc_;
  const Allocation& alloc_;
  EffTable eff_;
  ApTable s_;
  int n_;
  bool flexible_;
  std::vector<std::uint32_t> freqs_;
  std::vector<std::uint32_t> times_;
  std::vector<PatternLayout> layouts_;
  std::vector<std::uint32_t> servers_;
  std::unordered_map<std::uint64_t, std::vector<double>> cache_;
};

void check_inputs(const Scenario& sc, const Allocation& alloc) {
  if (alloc.n != sc.n() || alloc.k != sc.k()) throw Error(ErrorKind::InvalidInput, "allocation does not match the scenario size");
  if (sc.fixed() == alloc.flexible()) throw Error(ErrorKind::InvalidInput, "allocation association mode does not match the scenario");
  if (!sc.fixed() && sc.k() > 64) throw Error(ErrorKind::InvalidInput, "simulator supports at most 64 UE groups");
  alloc.validate(1e-6);
}

struct Packet {
  double arrival = 0.0;
  double work = 0.0;
  double remaining = 0.0;
};

// Uniform on (0, 1] from the top 53 bits.
double unit(std::mt19937_64& g) { return (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53; }
double expo(std::mt19937_64& g, double mean) { return -mean * std::log(unit(g)); }

struct BatchStats {
  double mean = kNaN;
  double ci = kNaN;
};

BatchStats batch_means(const std::vector<double>& xs) {
  BatchStats out;
  if (xs.empty()) return out;
  double total = 0.0;
  for (double v : xs) total += v;
  out.mean = total / static_cast<double>(xs.size());
  const std::size_t per = xs.size() / kBatches;
  if (per == 0) {
    out.ci = std::numeric_limits<double>::infinity();
    return out;
  }
  std::vector<double> means(kBatches, 0.0);
  for (int b = 0; b < kBatches; ++b) {
    double s = 0.0;
    for (std::size_t q = 0; q < per; ++q) s += xs[static_cast<std::size_t>(b) * per + q];
    means[static_cast<std::size_t>(b)] = s / static_cast<double>(per);
  }
  double m = 0.0;
  for (double v : means) m += v;
  m /= kBatches;
  double var = 0.0;
  for (double v : means) var += (v - m) * (v - m);
  var /= kBatches - 1;
  out.ci = kStudentT19 * std::sqrt(var / kBatches);
  return out;
}

}  // namespace

std::vector<double> instantaneous_rates(const Scenario& sc, const Allocation& alloc, std::uint64_t nonempty) {
  check_inputs(sc, alloc);
  return RateModel(sc, alloc).compute(nonempty);
}

DelayReport simulate(const Scenario& sc, const Allocation& alloc, const SimOptions& opt) {
  check_inputs(sc, alloc);
  if (opt.packets < 0) throw Error(ErrorKind::InvalidInput, "packet count must be nonnegative");
  if (!(opt.warmup_fraction >= 0.0 && opt.warmup_fraction < 1.0))
    throw Error(ErrorKind::InvalidInput, "warm-up fraction must lie in [0, 1)");

  RateModel model(sc, alloc);
  const int nq = model.queues();
  const int k = sc.k();
  auto group_of = [&](int q) { return sc.fixed() ? sc.group(q) : q; };
  std::vector<double> lam(static_cast<std::size_t>(nq));
  for (int q = 0; q < nq; ++q) lam[static_cast<std::size_t>(q)] = sc.lambda[static_cast<std::size_t>(group_of(q))];

  DelayReport rep;
  rep.simulated = true;
  rep.queue_delay.assign(static_cast<std::size_t>(k), kNaN);
  rep.queue_ci.assign(static_cast<std::size_t>(k), kNaN);

  const bool any_traffic = std::any_of(lam.begin(), lam.end(), [](double l) { return l > 0.0; });
  if (!any_traffic || opt.packets == 0) return rep;

  // Separate arrival and work streams per queue keep runs with different
  // allocations on common random numbers.
  std::vector<std::mt19937_64> arr_rng;
  std::vector<std::mt19937_64> work_rng;
  for (int q = 0; q < nq; ++q) {
    std::seed_seq sa{opt.seed, static_cast<std::uint64_t>(q), std::uint64_t{0}};
    std::seed_seq sw{opt.seed, static_cast<std::uint64_t>(q), std::uint64_t{1}};
    arr_rng.emplace_back(sa);
    work_rng.emplace_back(sw);
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::deque<Packet>> queue(static_cast<std::size_t>(nq));
  std::vector<double> next_arrival(static_cast<std::size_t>(nq), inf);
  for (int q = 0; q < nq; ++q)
    if (lam[static_cast<std::size_t>(q)] > 0.0)
      next_arrival[static_cast<std::size_t>(q)] = expo(arr_rng[static_cast<std::size_t>(q)], 1.0 / lam[static_cast<std::size_t>(q)]);

  const auto warmup = static_cast<std::int64_t>(std::floor(opt.warmup_fraction * static_cast<double>(opt.packets)));
  std::vector<std::vector<double>> delays(static_cast<std::size_t>(nq));
  std::vector<double> all_delays;
  all_delays.reserve(static_cast<std::size_t>(opt.packets - warmup));
  std::int64_t completed = 0;
  double clock = 0.0;
  std::uint64_t nonempty = 0;
  double completed_work = 0.0;

  while (completed < opt.packets) {
    const auto& rate = model.rates(nonempty);
    double dt = inf;
    int who = -1;
    bool is_arrival = false;
    for (int q = 0; q < nq; ++q) {
      const auto uq = static_cast<std::size_t>(q);
      const double ta = next_arrival[uq] - clock;
      if (ta < dt) {
        dt = ta;
        who = q;
        is_arrival = true;
      }
      if (!queue[uq].empty() && rate[uq] > 0.0) {
        const double tc = queue[uq].front().remaining / rate[uq];
        if (tc < dt) {
          dt = tc;
          who = q;
          is_arrival = false;
        }
      }
    }
    if (who < 0) throw Error(ErrorKind::Numerical, "simulation has no pending event");
    dt = std::max(dt, 0.0);

    for (int q = 0; q < nq; ++q) {
      const auto uq = static_cast<std::size_t>(q);
      if (queue[uq].empty() || rate[uq] <= 0.0) continue;
      const double done = rate[uq] * dt;
      rep.work_served_bits += done;
      if (!(q == who && !is_arrival)) queue[uq].front().remaining -= done;
    }
    clock += dt;

    const auto uw = static_cast<std::size_t>(who);
    if (is_arrival) {
      clock = next_arrival[uw];
      const double work = expo(work_rng[uw], sc.mean_packet_bits);
      queue[uw].push_back(Packet{clock, work, work});
      if (static_cast<std::int64_t>(queue[uw].size()) > kSaturationGuard)
        throw Error(ErrorKind::Unstable, "saturated: queue " + std::to_string(who) + " exceeded " +
                                             std::to_string(kSaturationGuard) + " packets");
      nonempty |= std::uint64_t{1} << who;
      next_arrival[uw] = clock + expo(arr_rng[uw], 1.0 / lam[uw]);
    } else {
      const Packet p = queue[uw].front();
      queue[uw].pop_front();
      completed_work += p.work;
      if (queue[uw].empty()) nonempty &= ~(std::uint64_t{1} << who);
      if (completed >= warmup) {
        delays[uw].push_back(clock - p.arrival);
        all_delays.push_back(clock - p.arrival);
      }
      ++completed;
    }
  }

  for (const auto& q : queue)
    if (!q.empty()) completed_work += q.front().work - q.front().remaining;
  rep.work_completed_bits = completed_work;
  rep.served = completed - warmup;
  rep.warmup_discarded = warmup;

  double num = 0.0;
  double den = 0.0;
  for (int q = 0; q < nq; ++q) {
    const auto uq = static_cast<std::size_t>(q);
    const auto st = batch_means(delays[uq]);
    const auto g = static_cast<std::size_t>(group_of(q));
    rep.queue_delay[g] = st.mean;
    rep.queue_ci[g] = st.ci;
    if (lam[uq] > 0.0 && !std::isnan(st.mean)) {
      num += lam[uq] * st.mean;
      den += lam[uq];
    }
  }
  rep.network_delay = den > 0.0 ? num / den : 0.0;
  rep.objective = num;
  rep.network_ci = batch_means(all_delays).ci;
  return rep;
}

}  // namespace dualscale
