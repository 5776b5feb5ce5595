#pragma once

#include <bit>
#include <cstdint>
#include <string>

namespace dualscale {

/// A subset of APs as a bitmask; bit i set means AP i (0-based) belongs to it.
/// Indexes spectrum patterns F, time patterns T, busy sets A and interferer sets I.
class Pattern {
 public:
  constexpr Pattern() = default;
  constexpr explicit Pattern(std::uint32_t bits) : bits_(bits) {}

  static constexpr Pattern empty() { return Pattern{}; }
  static constexpr Pattern full(int n) { return Pattern{n >= 32 ? ~0u : ((1u << n) - 1u)}; }
  static constexpr Pattern single(int i) { return Pattern{1u << i}; }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool contains(int i) const { return (bits_ >> i) & 1u; }
  constexpr bool is_empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool subset_of(Pattern o) const { return (bits_ & ~o.bits_) == 0; }

  constexpr Pattern with(int i) const { return Pattern{bits_ | (1u << i)}; }
  constexpr Pattern without(int i) const { return Pattern{bits_ & ~(1u << i)}; }

  friend constexpr Pattern operator&(Pattern a, Pattern b) { return Pattern{a.bits_ & b.bits_}; }
  friend constexpr Pattern operator|(Pattern a, Pattern b) { return Pattern{a.bits_ | b.bits_}; }
  friend constexpr bool operator==(Pattern, Pattern) = default;

  /// Member list as "{1,3}" with 1-based AP numbers, for human output.
  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (int i = 0; i < 32; ++i) {
      if (!contains(i)) continue;
      if (!first) s += ',';
      s += std::to_string(i + 1);
      first = false;
    }
    return s + "}";
  }

 private:
  std::uint32_t bits_ = 0;
};

constexpr std::size_t pattern_count(int n) { return std::size_t{1} << n; }

}  // namespace dualscale
