#include "dualscale/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dualscale/error.hpp"
#include "dualscale/kernels.hpp"
#include "dualscale/pattern.hpp"

namespace dualscale {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::MaxIter: return "max-iter";
    case SolveStatus::Stall: return "stall";
  }
  return "?";
}

std::size_t SubproblemSpec::num_columns() const {
  const std::size_t np = pattern_count(n);
  return polytope == Polytope::Simplex ? np : static_cast<std::size_t>(n) * static_cast<std::size_t>(k) * np;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPhase1Target = -1e-3;   // relative slack that counts as comfortably interior
constexpr double kBoundaryTol = -1e-9;    // below this the point is strictly feasible
constexpr double kInfeasibleTol = 1e-7;   // above this no feasible point exists
constexpr double kPhase1Smoothing[] = {1e-1, 1e-2, 1e-3, 1e-4};
constexpr int kPhase1MaxIter = 2000;  // per smoothing stage
constexpr int kProgressWindow = 1000;   // FW iterations between progress checks
constexpr double kProgressTol = 1e-12;
constexpr int kPhase1Patience = 200;        // after this many steps a modest interior point will do
constexpr double kPhase1Enough = -1e-6;

std::vector<int> atom_columns(const SubproblemSpec& spec, const Atom& atom) {
  if (spec.polytope == Polytope::Simplex) return {static_cast<int>(atom.pattern)};
  std::vector<int> cols;
  const std::size_t np = pattern_count(spec.n);
  const Pattern f{atom.pattern};
  for (int i = 0; i < spec.n; ++i) {
    if (!f.contains(i)) continue;
    const int j = atom.groups[static_cast<std::size_t>(i)];
    cols.push_back(static_cast<int>((static_cast<std::size_t>(i) * static_cast<std::size_t>(spec.k) + static_cast<std::size_t>(j)) * np + atom.pattern));
  }
  return cols;
}

struct Active {
  Atom atom;
  std::vector<int> cols;
  std::vector<double> image;
  double weight = 0.0;
};

enum class ModeKind { Barrier, Phase1 };

struct Mode {
  ModeKind kind = ModeKind::Barrier;
  double mu = 0.0;
};

// Shared machinery over the block layout of one subproblem.
class Engine {
 public:
  Engine(const SubproblemSpec& spec, double floor) : spec_(spec), floor_(floor), k_(kernels::ops()) {
    offset_.reserve(spec.blocks.size());
    local_.resize(spec.blocks.size());
    const std::size_t ncols = spec.num_columns();
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
      offset_.push_back(rows_);
      rows_ += spec.blocks[b].rows();
      local_[b].assign(ncols, -1);
      const auto& cols = spec.blocks[b].columns;
      for (std::size_t c = 0; c < cols.size(); ++c) local_[b][static_cast<std::size_t>(cols[c])] = static_cast<int>(c);
    }
    dobj_.resize(rows_);
    dcon_.resize(rows_);
    con_.resize(spec.blocks.size());
    obj_.resize(spec.blocks.size());
  }

  std::size_t rows() const { return rows_; }
  const SubproblemSpec& spec() const { return spec_; }

  Active make_active(const Atom& atom, double weight) const {
    Active a{atom, atom_columns(spec_, atom), std::vector<double>(rows_, 0.0), weight};
    for (std::size_t b = 0; b < spec_.blocks.size(); ++b) {
      const auto& blk = spec_.blocks[b];
      const std::size_t nr = blk.rows();
      for (int c : a.cols) {
        const int lc = local_[b][static_cast<std::size_t>(c)];
        if (lc < 0) continue;
        k_.axpy(1.0, std::span<const double>(blk.coeff.data() + static_cast<std::size_t>(lc) * nr, nr),
                std::span<double>(a.image.data() + offset_[b], nr));
      }
    }
    return a;
  }

  // Rates as the matrix-vector product with a dense decision vector.
  std::vector<double> rates_of(std::span<const double> decision) const {
    std::vector<double> r(rows_, 0.0);
    for (std::size_t b = 0; b < spec_.blocks.size(); ++b) {
      const auto& blk = spec_.blocks[b];
      const std::size_t nr = blk.rows();
      for (std::size_t c = 0; c < blk.columns.size(); ++c) {
        const double v = decision[static_cast<std::size_t>(blk.columns[c])];
        if (v == 0.0) continue;
        k_.axpy(v, std::span<const double>(blk.coeff.data() + c * nr, nr), std::span<double>(r.data() + offset_[b], nr));
      }
    }
    return r;
  }

  // Per-block objective and constraint sums; fills the row derivative scratch.
  void terms(std::span<const double> r) {
    for (std::size_t b = 0; b < spec_.blocks.size(); ++b) {
      const auto& blk = spec_.blocks[b];
      const std::size_t nr = blk.rows();
      const auto s = k_.row_terms(r.subspan(offset_[b], nr), blk.weight, blk.curvature, floor_,
                                  std::span<double>(dobj_.data() + offset_[b], nr),
                                  std::span<double>(dcon_.data() + offset_[b], nr));
      obj_[b] = s.obj;
      con_[b] = s.con;
    }
  }

  double objective() const { return std::accumulate(obj_.begin(), obj_.end(), 0.0); }
  std::span<const double> objective_row_grad() const { return dobj_; }
  const std::vector<double>& util() const { return con_; }

  double max_violation() const {
    double m = -kInf;
    for (std::size_t b = 0; b < con_.size(); ++b) m = std::max(m, con_[b] / spec_.blocks[b].cap - 1.0);
    return con_.empty() ? -1.0 : m;
  }

  // Mode value at r and its row gradient (into grad) after terms(r).
  double value(const Mode& mode, std::span<const double> r, std::vector<double>& grad) {
    terms(r);
    grad.resize(rows_);
    if (mode.kind == ModeKind::Barrier) {
      double phi = objective();
      for (std::size_t b = 0; b < spec_.blocks.size(); ++b) {
        const double slack = spec_.blocks[b].cap - con_[b];
        if (!(slack > 0.0)) return kInf;
        phi -= mode.mu * std::log(slack);
        const double c = mode.mu / slack;
        for (std::size_t i = offset_[b]; i < offset_[b] + spec_.blocks[b].rows(); ++i) grad[i] = dobj_[i] + c * dcon_[i];
      }
      return phi;
    }
    const auto pi = softmax_weights(mode.mu);
    double m = max_violation();
    double sum = 0.0;
    for (std::size_t b = 0; b < con_.size(); ++b) sum += std::exp((con_[b] / spec_.blocks[b].cap - 1.0 - m) / mode.mu);
    for (std::size_t b = 0; b < spec_.blocks.size(); ++b) {
      const double c = pi[b] / spec_.blocks[b].cap;
      for (std::size_t i = offset_[b]; i < offset_[b] + spec_.blocks[b].rows(); ++i) grad[i] = c * dcon_[i];
    }
    return m + mode.mu * std::log(sum);
  }

  void column_grad(std::span<const double> grad, std::vector<double>& out) const {
    out.assign(spec_.num_columns(), 0.0);
    for (std::size_t b = 0; b < spec_.blocks.size(); ++b) {
      const auto& blk = spec_.blocks[b];
      const std::size_t nr = blk.rows();
      const auto g = grad.subspan(offset_[b], nr);
      for (std::size_t c = 0; c < blk.columns.size(); ++c)
        out[static_cast<std::size_t>(blk.columns[c])] += k_.dot(std::span<const double>(blk.coeff.data() + c * nr, nr), g);
    }
  }

  // Barrier-mode curvature after value(): diagonal row part and a rank-one weight per block
  // (the rank-one direction is the constraint row gradient).
  void curvature(const Mode& mode, std::span<const double> r, std::vector<double>& hrow, std::vector<double>& rank1) const {
    hrow.resize(rows_);
    rank1.resize(spec_.blocks.size());
    for (std::size_t b = 0; b < spec_.blocks.size(); ++b) {
      const auto& blk = spec_.blocks[b];
      const double slack = blk.cap - con_[b];
      const double c1 = mode.mu / slack;
      rank1[b] = c1 / slack;
      for (std::size_t i = 0; i < blk.rows(); ++i) {
        const std::size_t row = offset_[b] + i;
        if (r[row] < floor_) {
          hrow[row] = 0.0;
          continue;
        }
        const double inv = 1.0 / r[row];
        const double inv3 = inv * inv * inv;
        hrow[row] = blk.weight[i] * (6.0 * blk.curvature * inv3 * inv + 2.0 * inv3 + 2.0 * c1 * inv3);
      }
    }
  }

  std::span<const double> constraint_row_grad() const { return dcon_; }
  std::size_t block_offset(std::size_t b) const { return offset_[b]; }

  struct Deriv {
    bool feasible = true;
    double d1 = 0.0;
    double d2 = 0.0;
  };

  // First and second derivative in gamma of the mode value along r + gamma d.
  Deriv segment(const Mode& mode, std::span<const double> r, std::span<const double> d, double gamma) const {
    Deriv out;
    const std::size_t nb = spec_.blocks.size();
    std::vector<kernels::SegmentSums> s(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& blk = spec_.blocks[b];
      const std::size_t nr = blk.rows();
      s[b] = k_.segment_sums(r.subspan(offset_[b], nr), d.subspan(offset_[b], nr), blk.weight, blk.curvature, gamma, floor_);
    }
    if (mode.kind == ModeKind::Barrier) {
      for (std::size_t b = 0; b < nb; ++b) {
        const double slack = spec_.blocks[b].cap - s[b].con;
        if (!(slack > 0.0)) return {false, kInf, 0.0};
        out.d1 += s[b].dobj + mode.mu * s[b].dcon / slack;
        out.d2 += s[b].d2obj + mode.mu * (s[b].d2con / slack + s[b].dcon * s[b].dcon / (slack * slack));
      }
      return out;
    }
    double m = -kInf;
    for (std::size_t b = 0; b < nb; ++b) m = std::max(m, s[b].con / spec_.blocks[b].cap);
    double sum = 0.0;
    std::vector<double> e(nb);
    for (std::size_t b = 0; b < nb; ++b) sum += e[b] = std::exp((s[b].con / spec_.blocks[b].cap - m) / mode.mu);
    double mean = 0.0;
    double sq = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const double pi = e[b] / sum;
      const double dv = s[b].dcon / spec_.blocks[b].cap;
      mean += pi * dv;
      sq += pi * dv * dv;
      out.d2 += pi * s[b].d2con / spec_.blocks[b].cap;
    }
    out.d1 = mean;
    out.d2 += (sq - mean * mean) / mode.mu;
    return out;
  }

 private:
  std::vector<double> softmax_weights(double tau) const {
    const double m = max_violation();
    std::vector<double> pi(con_.size());
    double sum = 0.0;
    for (std::size_t b = 0; b < con_.size(); ++b) sum += pi[b] = std::exp((con_[b] / spec_.blocks[b].cap - 1.0 - m) / tau);
    for (double& v : pi) v /= sum;
    return pi;
  }

  const SubproblemSpec& spec_;
  double floor_;
  const kernels::Ops& k_;
  std::vector<std::size_t> offset_;
  std::vector<std::vector<int>> local_;
  std::size_t rows_ = 0;
  std::vector<double> dobj_, dcon_, con_, obj_;
};

// Minimizer of the convex mode value on [0, gmax] along d (safeguarded Newton in a bracket).
double line_search(const Engine& eng, const Mode& mode, std::span<const double> r, std::span<const double> d, double gmax) {
  double ub = gmax;
  auto at_ub = eng.segment(mode, r, d, ub);
  if (!at_ub.feasible) {
    double lo = 0.0;
    double hi = ub;
    for (int it = 0; it < 80 && hi - lo > 1e-16 * gmax; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (eng.segment(mode, r, d, mid).feasible) lo = mid; else hi = mid;
    }
    ub = lo;
    if (ub <= 0.0) return 0.0;
    at_ub = eng.segment(mode, r, d, ub);
  }
  if (at_ub.d1 <= 0.0) return ub;
  auto at0 = eng.segment(mode, r, d, 0.0);
  if (at0.d1 >= 0.0) return 0.0;
  double lo = 0.0;
  double hi = ub;
  double g = at0.d2 > 0.0 ? std::min(ub, -at0.d1 / at0.d2) : 0.5 * ub;
  if (!(g > lo && g < hi)) g = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const auto s = eng.segment(mode, r, d, g);
    if (!s.feasible || s.d1 > 0.0) hi = g; else lo = g;
    if (s.feasible && s.d1 == 0.0) return g;
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    double next = (s.feasible && s.d2 > 0.0) ? g - s.d1 / s.d2 : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    g = next;
  }
  return lo;
}

struct FwOutcome {
  SolveStatus status = SolveStatus::MaxIter;
  double gap = kInf;
  double value = kInf;
  int iterations = 0;
};

std::vector<double> rates_from(const Engine& eng, const std::vector<Active>& active) {
  std::vector<double> r(eng.rows(), 0.0);
  for (const auto& a : active) kernels::ops().axpy(a.weight, a.image, r);
  return r;
}

// Dense solve with partial pivoting; false when singular.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    if (!(std::abs(a[piv * n + c]) > 0.0)) return false;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / a[c * n + c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    double v = b[c];
    for (std::size_t k = c + 1; k < n; ++k) v -= a[c * n + k] * b[k];
    b[c] = v / a[c * n + c];
  }
  return true;
}

// Newton steps on the face spanned by the active atoms (barrier mode only).
void face_newton(Engine& eng, const Mode& mode, std::vector<Active>& active, std::vector<double>& r) {
  const auto& ops = kernels::ops();
  const auto& spec = eng.spec();
  const std::size_t nb = spec.blocks.size();
  std::vector<double> grad, hrow, rank1, tmp(eng.rows()), d(eng.rows());
  for (int it = 0; it < 20; ++it) {
    const double phi = eng.value(mode, r, grad);
    if (!std::isfinite(phi)) return;
    eng.curvature(mode, r, hrow, rank1);
    const std::size_t m = active.size();
    if (m < 2) return;
    std::vector<double> g(m), proj(m * nb, 0.0), hess(m * m, 0.0);
    const auto dcon = eng.constraint_row_grad();
    for (std::size_t a = 0; a < m; ++a) {
      g[a] = ops.dot(active[a].image, grad);
      for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t off = eng.block_offset(b);
        const std::size_t nr = spec.blocks[b].rows();
        proj[a * nb + b] = ops.dot(std::span<const double>(active[a].image.data() + off, nr), dcon.subspan(off, nr));
      }
    }
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = hrow[i] * active[a].image[i];
      for (std::size_t c = a; c < m; ++c) {
        double v = ops.dot(tmp, active[c].image);
        for (std::size_t b = 0; b < nb; ++b) v += rank1[b] * proj[a * nb + b] * proj[c * nb + b];
        hess[a * m + c] = hess[c * m + a] = v;
      }
    }
    double hmax = 0.0;
    for (std::size_t a = 0; a < m; ++a) hmax = std::max(hmax, hess[a * m + a]);
    if (!(hmax > 0.0)) return;

    // Atoms at zero weight that want to go negative leave the free set.
    std::vector<char> free(m, 1);
    std::vector<double> dw(m, 0.0);
    for (;;) {
      std::vector<std::size_t> idx;
      for (std::size_t a = 0; a < m; ++a)
        if (free[a]) idx.push_back(a);
      const std::size_t f = idx.size();
      if (f < 2) return;
      std::vector<double> kkt((f + 1) * (f + 1), 0.0), rhs(f + 1, 0.0);
      for (std::size_t p = 0; p < f; ++p) {
        for (std::size_t q = 0; q < f; ++q) kkt[p * (f + 1) + q] = hess[idx[p] * m + idx[q]];
        kkt[p * (f + 1) + p] += 1e-12 * hmax;
        kkt[p * (f + 1) + f] = kkt[f * (f + 1) + p] = 1.0;
        rhs[p] = -g[idx[p]];
      }
      if (!solve_dense(kkt, rhs, f + 1)) return;
      std::fill(dw.begin(), dw.end(), 0.0);
      bool blocked = false;
      for (std::size_t p = 0; p < f; ++p) {
        dw[idx[p]] = rhs[p];
        if (active[idx[p]].weight <= 0.0 && rhs[p] < 0.0) {
          free[idx[p]] = 0;
          blocked = true;
        }
      }
      if (!blocked) break;
    }

    double decrement = 0.0;
    for (std::size_t a = 0; a < m; ++a) decrement -= g[a] * dw[a];
    if (!(decrement > 1e-14 * std::max(1.0, std::abs(phi)))) return;
    double tmax = 1.0;
    std::size_t hit = m;
    for (std::size_t a = 0; a < m; ++a)
      if (dw[a] < 0.0 && active[a].weight / -dw[a] < tmax) {
        tmax = active[a].weight / -dw[a];
        hit = a;
      }
    std::fill(d.begin(), d.end(), 0.0);
    for (std::size_t a = 0; a < m; ++a)
      if (dw[a] != 0.0) ops.axpy(dw[a], active[a].image, d);
    const double t = line_search(eng, mode, r, d, tmax);
    if (!(t > 0.0)) return;
    for (std::size_t a = 0; a < m; ++a) active[a].weight = std::max(0.0, active[a].weight + t * dw[a]);
    if (hit < m && t >= tmax) active[hit].weight = 0.0;
    std::erase_if(active, [](const Active& a) { return a.weight <= 1e-15; });
    r = rates_from(eng, active);
  }
}

template <typename EarlyStop>
FwOutcome pairwise_fw(Engine& eng, const Mode& mode, std::vector<Active>& active, std::vector<double>& r, double gap_tol,
                      int max_iter, EarlyStop early_stop) {
  FwOutcome out;
  std::vector<double> grad;
  std::vector<double> cgrad;
  std::vector<double> dir(eng.rows());
  int zero_steps = 0;
  double mark = kInf;  // value at the last progress checkpoint
  for (int it = 0;; ++it) {
    if (it % 256 == 255) r = rates_from(eng, active);
    out.iterations = it;
    out.value = eng.value(mode, r, grad);
    if (early_stop()) {
      out.status = SolveStatus::Optimal;
      return out;
    }
    if (it % kProgressWindow == 0) {
      if (it > 0 && !(out.value < mark - kProgressTol * std::max(1.0, std::abs(mark)))) {
        out.status = SolveStatus::Stall;
        return out;
      }
      mark = out.value;
    }
    eng.column_grad(grad, cgrad);
    const Atom s = lmo(cgrad, eng.spec());
    auto score = [&](const std::vector<int>& cols) {
      double v = 0.0;
      for (int c : cols) v += cgrad[static_cast<std::size_t>(c)];
      return v;
    };
    const double s_score = score(atom_columns(eng.spec(), s));
    double inner = 0.0;
    std::size_t away = 0;
    double away_score = -kInf;
    std::size_t s_idx = active.size();
    for (std::size_t a = 0; a < active.size(); ++a) {
      const double sc = score(active[a].cols);
      inner += active[a].weight * sc;
      if (sc > away_score) {
        away_score = sc;
        away = a;
      }
      if (active[a].atom == s) s_idx = a;
    }
    out.gap = inner - s_score;
    if (out.gap <= gap_tol * std::max(1.0, std::abs(out.value)) || s_idx == away) {
      out.status = SolveStatus::Optimal;
      return out;
    }
    if (it >= max_iter) {
      out.status = SolveStatus::MaxIter;
      return out;
    }
    if (s_idx == active.size()) active.push_back(eng.make_active(s, 0.0));

    // Pairwise step: move mass from the away atom to the FW atom.
    for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = active[s_idx].image[i] - active[away].image[i];
    double gamma = line_search(eng, mode, r, dir, active[away].weight);
    if (gamma > 0.0) {
      active[s_idx].weight += gamma;
      active[away].weight -= gamma;
      kernels::ops().axpy(gamma, dir, r);
    } else {
      // Plain FW step toward s as a fallback.
      for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = active[s_idx].image[i] - r[i];
      gamma = line_search(eng, mode, r, dir, 1.0);
      if (gamma > 0.0) {
        for (auto& a : active) a.weight *= 1.0 - gamma;
        active[s_idx].weight += gamma;
        kernels::ops().axpy(gamma, dir, r);
      }
    }
    if (mode.kind == ModeKind::Barrier) {
      std::erase_if(active, [](const Active& a) { return a.weight <= 1e-15; });
      face_newton(eng, mode, active, r);
      if (gamma <= 0.0 && !active.empty()) gamma = 1.0;  // the face step may still make progress
    }
    if (gamma <= 0.0) {
      if (++zero_steps > 3) {
        out.status = SolveStatus::Stall;
        return out;
      }
    } else {
      zero_steps = 0;
    }
    std::erase_if(active, [](const Active& a) { return a.weight <= 1e-15; });
  }
}

std::vector<Active> initial_atoms(const Engine& eng, std::span<const WeightedAtom> start) {
  const auto& spec = eng.spec();
  std::vector<Active> active;
  if (!start.empty()) {
    double total = 0.0;
    for (const auto& wa : start) total += std::max(0.0, wa.weight);
    for (const auto& wa : start)
      if (wa.weight > 0.0) active.push_back(eng.make_active(wa.atom, wa.weight / total));
    if (!active.empty()) return active;
  }
  const std::size_t np = pattern_count(spec.n);
  if (spec.polytope == Polytope::Simplex) {
    for (std::size_t f = 1; f < np; ++f)
      active.push_back(eng.make_active(Atom{static_cast<std::uint32_t>(f), {}}, 1.0 / static_cast<double>(np - 1)));
    return active;
  }
  // Full pattern, every AP cycling over the loaded groups so each group hears every AP.
  std::vector<int> loaded;
  for (const auto& b : spec.blocks) loaded.push_back(b.queue);
  if (loaded.empty()) loaded.push_back(0);
  const std::size_t m = loaded.size();
  for (std::size_t t = 0; t < m; ++t) {
    Atom a{static_cast<std::uint32_t>(np - 1), std::vector<int>(static_cast<std::size_t>(spec.n))};
    for (int i = 0; i < spec.n; ++i) a.groups[static_cast<std::size_t>(i)] = loaded[(t + static_cast<std::size_t>(i)) % m];
    active.push_back(eng.make_active(a, 1.0 / static_cast<double>(m)));
  }
  return active;
}

std::vector<WeightedAtom> export_atoms(const std::vector<Active>& active) {
  std::vector<WeightedAtom> out;
  for (const auto& a : active)
    if (a.weight > 0.0) out.push_back({a.atom, a.weight});
  return out;
}

Phase1Result run_phase1(Engine& eng, std::vector<Active>& active, std::vector<double>& r) {
  Phase1Result res;
  eng.terms(r);
  if (eng.max_violation() > kPhase1Target) {
    // The smoothed max can fall while the true max rises; keep the best iterate.
    std::vector<Active> best = active;
    double best_viol = eng.max_violation();
    int calls = 0;
    bool done = false;
    // A sharp smoothing alone leaves FW zigzagging across the kink far from the
    // minimizer, so sharpen it gradually.
    for (double tau : kPhase1Smoothing) {
      if (done) break;
      pairwise_fw(eng, Mode{ModeKind::Phase1, tau}, active, r, 1e-12, kPhase1MaxIter, [&] {
        const double v = eng.max_violation();
        if (v < best_viol) {
          best_viol = v;
          best = active;
        }
        done = v <= kPhase1Target || (++calls > kPhase1Patience && best_viol <= kPhase1Enough);
        return done;
      });
      r = rates_from(eng, active);
      eng.terms(r);
    }
    if (eng.max_violation() > best_viol) {
      active = std::move(best);
      r = rates_from(eng, active);
      eng.terms(r);
    }
  }
  res.max_violation = eng.max_violation();
  res.feasible = res.max_violation <= kInfeasibleTol;
  res.strict = res.max_violation < kBoundaryTol;
  res.atoms = export_atoms(active);
  return res;
}

}  // namespace

Atom lmo(std::span<const double> column_cost, const SubproblemSpec& spec) {
  const std::size_t np = pattern_count(spec.n);
  if (spec.polytope == Polytope::Simplex) {
    std::size_t best = 0;
    for (std::size_t f = 1; f < np; ++f)
      if (column_cost[f] < column_cost[best]) best = f;
    return Atom{static_cast<std::uint32_t>(best), {}};
  }
  Atom best{0, std::vector<int>(static_cast<std::size_t>(spec.n), -1)};
  double best_score = 0.0;  // empty pattern
  for (std::size_t f = 1; f < np; ++f) {
    const Pattern pat{static_cast<std::uint32_t>(f)};
    Atom cand{pat.bits(), std::vector<int>(static_cast<std::size_t>(spec.n), -1)};
    double score = 0.0;
    for (int i = 0; i < spec.n; ++i) {
      if (!pat.contains(i)) continue;
      int bj = 0;
      double bc = kInf;
      for (int j = 0; j < spec.k; ++j) {
        const double c = column_cost[(static_cast<std::size_t>(i) * static_cast<std::size_t>(spec.k) + static_cast<std::size_t>(j)) * np + f];
        if (c < bc) {
          bc = c;
          bj = j;
        }
      }
      cand.groups[static_cast<std::size_t>(i)] = bj;
      score += bc;
    }
    if (score < best_score) {
      best_score = score;
      best = std::move(cand);
    }
  }
  return best;
}

std::vector<double> decision_of(const SubproblemSpec& spec, std::span<const WeightedAtom> atoms) {
  std::vector<double> d(spec.num_columns(), 0.0);
  for (const auto& wa : atoms)
    for (int c : atom_columns(spec, wa.atom)) d[static_cast<std::size_t>(c)] += wa.weight;
  return d;
}

Evaluation evaluate(const SubproblemSpec& spec, std::span<const double> decision, double rate_floor) {
  Engine eng(spec, rate_floor);
  eng.terms(eng.rates_of(decision));
  Evaluation ev;
  ev.objective = eng.objective();
  ev.util = eng.util();
  eng.column_grad(eng.objective_row_grad(), ev.gradient);
  return ev;
}

Phase1Result phase1(const SubproblemSpec& spec, const SolveOptions& opt, std::span<const WeightedAtom> start) {
  Engine eng(spec, opt.rate_floor);
  auto active = initial_atoms(eng, start);
  auto r = rates_from(eng, active);
  return run_phase1(eng, active, r);
}

SolveResult solve(const SubproblemSpec& spec, const SolveOptions& opt, std::span<const WeightedAtom> start) {
  Engine eng(spec, opt.rate_floor);
  auto active = initial_atoms(eng, start);
  auto r = rates_from(eng, active);
  SolveResult res;

  auto finish = [&](SolveStatus status) {
    res.status = status;
    r = rates_from(eng, active);
    eng.terms(r);
    res.atoms = export_atoms(active);
    const auto d = decision_of(spec, res.atoms);
    if (spec.polytope == Polytope::Simplex) {
      res.y = d;
    } else {
      res.x = d;
      const std::size_t np = pattern_count(spec.n);
      res.y.assign(np, 0.0);
      for (const auto& wa : res.atoms) res.y[wa.atom.pattern] += wa.weight;
    }
    res.rates = r;
    res.util = eng.util();
    res.objective = eng.objective();
    res.max_violation = eng.max_violation();
    return res;
  };

  if (eng.rows() == 0) {
    res.gap = 0.0;
    return finish(SolveStatus::Optimal);
  }

  const auto p1 = run_phase1(eng, active, r);
  if (!p1.feasible) return finish(SolveStatus::Infeasible);
  if (!p1.strict) {
    res.boundary = true;
    res.gap = 0.0;
    return finish(SolveStatus::Optimal);
  }

  r = rates_from(eng, active);
  eng.terms(r);
  const double scale = std::max(eng.objective(), 1e-300);
  FwOutcome last;
  int total = 0;
  for (std::size_t s = 0; s < opt.barrier_scales.size(); ++s) {
    const bool final_stage = s + 1 == opt.barrier_scales.size();
    const double tol = final_stage ? opt.gap_tol : std::max(opt.gap_tol, 1e-4);
    last = pairwise_fw(eng, Mode{ModeKind::Barrier, opt.barrier_scales[s] * scale}, active, r, tol, opt.max_iter,
                       [] { return false; });
    total += last.iterations;
    r = rates_from(eng, active);
  }
  res.gap = last.gap;
  res.iterations = total;
  return finish(last.status);
}

}  // namespace dualscale
