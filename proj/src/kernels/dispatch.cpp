#include <atomic>
#include <stdexcept>
#include <string>

#include "dualscale/kernels.hpp"

namespace dualscale::kernels {

namespace {

Isa detect() {
#if defined(DUALSCALE_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::Avx2;
#endif
#if defined(DUALSCALE_HAVE_NEON)
  return Isa::Neon;
#endif
  return Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(DUALSCALE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(DUALSCALE_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

void set_isa(Isa isa) {
  if (!isa_supported(isa)) throw std::invalid_argument(std::string("ISA not available: ") + isa_name(isa));
  current().store(isa);
}

Isa active_isa() { return current().load(); }

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

const Ops& ops_for(Isa isa) {
  if (!isa_supported(isa)) throw std::invalid_argument(std::string("ISA not available: ") + isa_name(isa));
  switch (isa) {
#if defined(DUALSCALE_HAVE_AVX2)
    case Isa::Avx2: return avx2_ops();
#endif
#if defined(DUALSCALE_HAVE_NEON)
    case Isa::Neon: return neon_ops();
#endif
    default: return scalar_ops();
  }
}

const Ops& ops() { return ops_for(active_isa()); }

}  // namespace dualscale::kernels
