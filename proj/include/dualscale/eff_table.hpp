#pragma once

#include <span>
#include <vector>

#include "dualscale/pattern.hpp"
#include "dualscale/scenario.hpp"

namespace dualscale {

inline constexpr int kEffTableMaxAps = 12;

/// Shannon efficiency in packets/s for AP i -> group j when the APs in A transmit.
double spectral_efficiency(const Scenario& sc, int ap, int ue, Pattern active);

/// s[i][j][A] for every AP, UE group and active set.
class EffTable {
 public:
  EffTable() = default;
  explicit EffTable(const Scenario& sc);

  int n() const { return n_; }
  int k() const { return k_; }
  std::size_t patterns() const { return pattern_count(n_); }

  double at(int ap, int ue, Pattern a) const { return data_[offset(ap, ue) + a.bits()]; }
  std::span<const double> row(int ap, int ue) const {
    return {data_.data() + offset(ap, ue), patterns()};
  }

  bool operator==(const EffTable&) const = default;

 private:
  std::size_t offset(int ap, int ue) const {
    return (static_cast<std::size_t>(ap) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(ue)) * patterns();
  }

  int n_ = 0;
  int k_ = 0;
  std::vector<double> data_;
};

/// Fixed-association view: s^i[A] = s[i][group(i)][A], n x 2^n.
struct ApTable {
  int n = 0;
  std::vector<double> s;

  double at(int ap, Pattern a) const { return s[static_cast<std::size_t>(ap) * pattern_count(n) + a.bits()]; }
  std::span<const double> row(int ap) const { return {s.data() + static_cast<std::size_t>(ap) * pattern_count(n), pattern_count(n)}; }
};

ApTable fixed_view(const EffTable& eff, const Scenario& sc);

}  // namespace dualscale
