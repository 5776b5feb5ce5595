#include "dualscale/eff_table.hpp"

#include <cmath>

#include "dualscale/error.hpp"

namespace dualscale {

double spectral_efficiency(const Scenario& sc, int ap, int ue, Pattern active) {
  if (!active.contains(ap)) return 0.0;
  double interference = sc.noise[static_cast<std::size_t>(ue)];
  for (int l = 0; l < sc.n(); ++l) {
    if (l != ap && active.contains(l)) interference += sc.psd[static_cast<std::size_t>(l)] * link_gain(sc, l, ue);
  }
  const double sinr = sc.psd[static_cast<std::size_t>(ap)] * link_gain(sc, ap, ue) / interference;
  return sc.bandwidth_hz / sc.mean_packet_bits * std::log2(1.0 + sinr);
}

EffTable::EffTable(const Scenario& sc) : n_(sc.n()), k_(sc.k()) {
  if (n_ > kEffTableMaxAps) throw Error(ErrorKind::InvalidInput, "pattern space too large");
  const std::size_t np = patterns();
  data_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(k_) * np, 0.0);

  // Received power q^l h^{l->j} per link, reused across all 2^n sets.
  std::vector<double> rx(static_cast<std::size_t>(n_ * k_));
  for (int l = 0; l < n_; ++l)
    for (int j = 0; j < k_; ++j)
      rx[static_cast<std::size_t>(l * k_ + j)] = sc.psd[static_cast<std::size_t>(l)] * link_gain(sc, l, j);

  const double scale = sc.bandwidth_hz / sc.mean_packet_bits;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < k_; ++j) {
      double* out = data_.data() + offset(i, j);
      const double signal = rx[static_cast<std::size_t>(i * k_ + j)];
      for (std::size_t a = 0; a < np; ++a) {
        const Pattern set{static_cast<std::uint32_t>(a)};
        if (!set.contains(i)) continue;
        double interference = sc.noise[static_cast<std::size_t>(j)];
        for (int l = 0; l < n_; ++l)
          if (l != i && set.contains(l)) interference += rx[static_cast<std::size_t>(l * k_ + j)];
        out[a] = scale * std::log2(1.0 + signal / interference);
      }
    }
  }
}

ApTable fixed_view(const EffTable& eff, const Scenario& sc) {
  ApTable t;
  t.n = eff.n();
  const std::size_t np = eff.patterns();
  t.s.resize(static_cast<std::size_t>(t.n) * np);
  for (int i = 0; i < t.n; ++i) {
    auto row = eff.row(i, sc.group(i));
    std::copy(row.begin(), row.end(), t.s.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * np));
  }
  return t;
}

}  // namespace dualscale
