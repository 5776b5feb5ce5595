#pragma once

#include <span>

// Inner loops of the convex solver. Each operation has a scalar reference and
// vector variants; the active variant is picked once at startup from CPU features.

namespace dualscale::kernels {

/// Sums of w (a/r^2 + 1/r) and w/r over a queue's rows, r floored at rmin.
struct RowSums {
  double obj = 0.0;
  double con = 0.0;
};

/// Sums along a segment r + gamma d: constraint value and its first two
/// derivatives in gamma, and the first two derivatives of the objective.
struct SegmentSums {
  double con = 0.0;
  double dcon = 0.0;
  double d2con = 0.0;
  double dobj = 0.0;
  double d2obj = 0.0;
};

enum class Isa { Scalar, Avx2, Neon };

struct Ops {
  // dobj[i], dcon[i] receive the derivatives of the objective and constraint terms in r[i].
  RowSums (*row_terms)(std::span<const double> r, std::span<const double> w, double a, double rmin,
                       std::span<double> dobj, std::span<double> dcon);
  double (*dot)(std::span<const double> a, std::span<const double> b);
  SegmentSums (*segment_sums)(std::span<const double> r, std::span<const double> d, std::span<const double> w,
                              double a, double gamma, double rmin);
  void (*axpy)(double alpha, std::span<const double> x, std::span<double> y);
};

const Ops& scalar_ops();
#if defined(DUALSCALE_HAVE_AVX2)
const Ops& avx2_ops();
#endif
#if defined(DUALSCALE_HAVE_NEON)
const Ops& neon_ops();
#endif

bool isa_supported(Isa isa);
/// Throws std::invalid_argument when the ISA is not available on this build/CPU.
void set_isa(Isa isa);
Isa active_isa();
const char* isa_name(Isa isa);
const Ops& ops();
/// Ops table for a given ISA (for equivalence testing).
const Ops& ops_for(Isa isa);

}  // namespace dualscale::kernels
