#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "dualscale/kernels.hpp"

using namespace dualscale::kernels;

namespace {

bool close(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<Isa> vector_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Avx2, Isa::Neon})
    if (isa_supported(isa)) out.push_back(isa);
  return out;
}

struct Data {
  std::vector<double> r, d, w, x, y;
};

Data make_data(std::mt19937_64& rng, std::size_t len) {
  std::uniform_real_distribution<double> pos(0.05, 5.0);
  std::uniform_real_distribution<double> any(-1.0, 1.0);
  Data v;
  for (std::size_t i = 0; i < len; ++i) {
    v.r.push_back(pos(rng));
    v.d.push_back(any(rng));
    v.w.push_back(pos(rng));
    v.x.push_back(any(rng));
    v.y.push_back(any(rng));
  }
  // Some rates below the floor exercise the clamp.
  if (len > 3) v.r[len / 2] = 1e-15;
  return v;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar is always available and selectable") {
  CHECK(isa_supported(Isa::Scalar));
  const Isa before = active_isa();
  set_isa(Isa::Scalar);
  CHECK(active_isa() == Isa::Scalar);
  CHECK(&ops() == &scalar_ops());
  set_isa(before);
  CHECK(std::string(isa_name(Isa::Avx2)) == "avx2");
}

TEST_CASE("unsupported ISA is rejected") {
  for (Isa isa : {Isa::Avx2, Isa::Neon})
    if (!isa_supported(isa)) CHECK_THROWS_AS(set_isa(isa), std::invalid_argument);
}

TEST_CASE("vector kernels agree with the scalar reference") {
  const auto isas = vector_isas();
  if (isas.empty()) {
    MESSAGE("no vector ISA on this build/CPU; only the scalar path is exercised");
    return;
  }
  std::mt19937_64 rng(99);
  const Ops& ref = scalar_ops();
  for (Isa isa : isas) {
    const Ops& vec = ops_for(isa);
    int bad = 0;
    for (std::size_t len = 0; len <= 37; ++len) {
      for (int rep = 0; rep < 5; ++rep) {
        const Data v = make_data(rng, len);
        const double a = 0.3 + rep;
        const double rmin = 1e-12;

        std::vector<double> go1(len), gc1(len), go2(len), gc2(len);
        const auto s1 = ref.row_terms(v.r, v.w, a, rmin, go1, gc1);
        const auto s2 = vec.row_terms(v.r, v.w, a, rmin, go2, gc2);
        // Terms at the floor are ~1e24 in size; compare relative to the sums.
        if (!close(s1.obj, s2.obj) || !close(s1.con, s2.con)) ++bad;
        for (std::size_t i = 0; i < len; ++i)
          if (!close(go1[i], go2[i]) || !close(gc1[i], gc2[i])) ++bad;

        if (!close(ref.dot(v.x, v.y), vec.dot(v.x, v.y))) ++bad;

        const double gamma = 0.1 * rep;
        const auto g1 = ref.segment_sums(v.r, v.d, v.w, a, gamma, rmin);
        const auto g2 = vec.segment_sums(v.r, v.d, v.w, a, gamma, rmin);
        if (!close(g1.con, g2.con) || !close(g1.dcon, g2.dcon) || !close(g1.d2con, g2.d2con) ||
            !close(g1.dobj, g2.dobj) || !close(g1.d2obj, g2.d2obj))
          ++bad;

        auto y1 = v.y;
        auto y2 = v.y;
        ref.axpy(0.7, v.x, y1);
        vec.axpy(0.7, v.x, y2);
        for (std::size_t i = 0; i < len; ++i)
          if (!close(y1[i], y2[i], 1e-15)) ++bad;
      }
    }
    CHECK_MESSAGE(bad == 0, isa_name(isa));
  }
}

}
