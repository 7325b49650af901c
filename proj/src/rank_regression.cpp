#include "bentrank/rank_regression.hpp"

#include "bentrank/error.hpp"
#include "bentrank/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

namespace bentrank {

namespace {

const double kSqrt12 = std::sqrt(12.0);

void require_finite(const Eigen::Ref<const Vector>& v, const char* what) {
  if (!v.allFinite()) {
    throw Error(ErrorKind::NonFinite, std::string(what) + " contains non-finite values");
  }
}

bool is_degenerate(const Eigen::Ref<const Vector>& e) {
  if (e.size() < 2) return true;
  const double spread = e.maxCoeff() - e.minCoeff();
  return !(spread > 1e-12 * std::max(1.0, e.cwiseAbs().maxCoeff()));
}

double wilcoxon_c_phi(const Eigen::Ref<const Vector>& e, double h) {
  // int fhat^2 for a Gaussian-kernel estimate: n^-2 sum_ij N(e_i - e_j; 0, 2h^2)
  const auto n = e.size();
  const double inv4h2 = 1.0 / (4.0 * h * h);
  double off = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ei = e[i];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = ei - e[j];
      off += std::exp(-d * d * inv4h2);
    }
  }
  const double norm = 1.0 / (2.0 * h * std::sqrt(std::numbers::pi));
  const double nn = static_cast<double>(n);
  const double integral = norm * (nn + 2.0 * off) / (nn * nn);
  return 1.0 / (kSqrt12 * integral);
}

double c_phi_unchecked(const Eigen::Ref<const Vector>& e, ScoreFunction score, double h) {
  if (score.kind == ScoreKind::Sign) return estimate_tau_s(e, 0);
  return wilcoxon_c_phi(e, h);
}

// L1 problem  min_b sum_k |y_k - d_k' b|  with materialized rows; the sign
// score uses the observations with a free location column in front.
struct L1Rows {
  Vector y;
  Matrix d;

  Eigen::Index count() const { return y.size(); }
  Eigen::Index q() const { return d.cols(); }
};

L1Rows sign_rows(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& w) {
  L1Rows rows;
  rows.y = y;
  rows.d.resize(y.size(), w.cols() + 1);
  rows.d.col(0).setOnes();
  rows.d.rightCols(w.cols()) = w;
  return rows;
}

// One IRLS step: minimize sum_k (y_k - d_k' b)^2 / max(|r_k|, eps).
bool l1_irls_step(const L1Rows& rows, const Vector& r, double eps, Vector& b_out) {
  const Vector omega = r.cwiseAbs().cwiseMax(eps).cwiseInverse();
  const Matrix a = rows.d.transpose() * omega.asDiagonal() * rows.d;
  const Vector g = rows.d.transpose() * omega.cwiseProduct(rows.y);
  Eigen::LDLT<Matrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) return false;
  b_out = ldlt.solve(g);
  return b_out.allFinite();
}

struct Breakpoint {
  double t;
  double weight;
  Eigen::Index row;
};

// Smallest breakpoint whose cumulative weight (in t order) reaches target.
Breakpoint weighted_median(std::vector<Breakpoint>& items, double target) {
  auto lo = items.begin();
  auto hi = items.end();
  const auto by_t = [](const Breakpoint& a, const Breakpoint& b) { return a.t < b.t; };
  while (hi - lo > 1) {
    const auto mid = lo + (hi - lo) / 2;
    std::nth_element(lo, mid, hi, by_t);
    double left = 0.0;
    for (auto it = lo; it != mid; ++it) left += it->weight;
    if (left >= target) {
      hi = mid;
    } else if (left + mid->weight >= target) {
      return *mid;
    } else {
      target -= left + mid->weight;
      lo = mid + 1;
    }
  }
  return lo != items.end() ? *lo : items.back();
}

struct L1Solution {
  Vector b;
  int iterations = 0;
  bool optimal = false;
};

// Picks q rows with the smallest |r_k| whose d_k are linearly independent.
bool choose_vertex(const L1Rows& rows, const Vector& r, std::vector<Eigen::Index>& active) {
  const auto q = rows.q();
  const Eigen::Index pool = std::min<Eigen::Index>(rows.count(), 64 * q + 64);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(rows.count()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::partial_sort(idx.begin(), idx.begin() + pool, idx.end(),
                    [&](Eigen::Index a, Eigen::Index b) { return std::abs(r[a]) < std::abs(r[b]); });
  active.clear();
  Matrix basis(q, 0);
  for (Eigen::Index t = 0; t < pool && static_cast<Eigen::Index>(active.size()) < q; ++t) {
    Vector v = rows.d.row(idx[static_cast<std::size_t>(t)]).transpose();
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (Eigen::Index c = 0; c < basis.cols(); ++c) v -= basis.col(c).dot(v) * basis.col(c);
    if (v.norm() <= 1e-9 * norm0) continue;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = v / v.norm();
    active.push_back(idx[static_cast<std::size_t>(t)]);
  }
  return static_cast<Eigen::Index>(active.size()) == q;
}

// IRLS warm start followed by vertex descent: from a vertex (q zero
// residuals), release the active row whose multiplier exceeds one in
// magnitude and line-search exactly (weighted median of breakpoints) along
// the edge that keeps the other active rows at zero.
L1Solution solve_l1(const L1Rows& rows, Vector b, const RankFitOptions& options, int irls_steps) {
  const auto q = rows.q();
  const auto count = rows.count();
  L1Solution sol;
  Vector r = rows.y - rows.d * b;
  const double scale = std::max(rows.y.cwiseAbs().maxCoeff(), 1e-300);
  const double eps = std::max(options.smoothing, 1e-15 * scale);

  Vector next(q);
  for (int it = 0; it < irls_steps; ++it) {
    if (!l1_irls_step(rows, r, eps, next)) {
      throw Error(ErrorKind::NumericalDegeneracy, "IRLS weighted system is singular");
    }
    ++sol.iterations;
    const double change = (next - b).cwiseAbs().maxCoeff();
    b = next;
    r = rows.y - rows.d * b;
    if (change < options.irls_handoff * (1.0 + b.cwiseAbs().maxCoeff())) break;
  }

  const double zero_tol = 1e-12 * scale;
  const double objective = r.cwiseAbs().sum();
  std::vector<Eigen::Index> active;
  if (objective <= zero_tol || !choose_vertex(rows, r, active)) {
    sol.b = b;
    sol.optimal = objective <= zero_tol;
    return sol;
  }

  Matrix da(q, q);
  Vector ya(q);
  auto solve_vertex = [&](Vector& out) {
    for (Eigen::Index a = 0; a < q; ++a) {
      da.row(a) = rows.d.row(active[static_cast<std::size_t>(a)]);
      ya[a] = rows.y[active[static_cast<std::size_t>(a)]];
    }
    Eigen::FullPivLU<Matrix> lu(da);
    if (!lu.isInvertible()) return false;
    out = lu.solve(ya);
    return out.allFinite();
  };

  Vector vb(q);
  if (!solve_vertex(vb)) {
    sol.b = b;
    return sol;
  }
  Vector vr = rows.y - rows.d * vb;
  double vobj = vr.cwiseAbs().sum();

  std::vector<char> is_active(static_cast<std::size_t>(count), 0);
  for (auto k : active) is_active[static_cast<std::size_t>(k)] = 1;
  std::vector<Breakpoint> breaks;
  breaks.reserve(static_cast<std::size_t>(count));
  Vector signs(count);
  for (int pivot = 0; pivot < options.max_pivots; ++pivot) {
    for (Eigen::Index k = 0; k < count; ++k) {
      const double rk = vr[k];
      signs[k] = (is_active[static_cast<std::size_t>(k)] || std::abs(rk) <= zero_tol)
                     ? 0.0
                     : (rk > 0.0 ? 1.0 : -1.0);
    }
    const Vector g = rows.d.transpose() * signs;
    Eigen::FullPivLU<Matrix> lu(da);
    const Vector lambda = lu.transpose().solve(Vector(-g));
    Eigen::Index kstar = 0;
    const double lmax = lambda.cwiseAbs().maxCoeff(&kstar);
    if (lmax <= 1.0 + 1e-9) {
      sol.optimal = true;
      break;
    }
    Vector e = Vector::Zero(q);
    e[kstar] = lambda[kstar] > 0.0 ? -1.0 : 1.0;
    const Vector delta = lu.solve(e);
    const Vector v = rows.d * delta;
    breaks.clear();
    double total = 0.0;
    const Eigen::Index leaving = active[static_cast<std::size_t>(kstar)];
    for (Eigen::Index k = 0; k < count; ++k) {
      if (is_active[static_cast<std::size_t>(k)] && k != leaving) continue;
      const double vk = v[k];
      if (std::abs(vk) <= 1e-14) continue;
      const double t = k == leaving ? 0.0 : vr[k] / vk;
      breaks.push_back({t, std::abs(vk), k});
      total += std::abs(vk);
    }
    const Eigen::Index entering =
        breaks.empty() ? leaving : weighted_median(breaks, 0.5 * total).row;
    if (entering == leaving) break;
    active[static_cast<std::size_t>(kstar)] = entering;
    Vector nb(q);
    Vector nr;
    double nobj = 0.0;
    const bool ok = solve_vertex(nb);
    if (ok) {
      nr = rows.y - rows.d * nb;
      nobj = nr.cwiseAbs().sum();
    }
    if (!ok || nobj > vobj + 1e-12 * (1.0 + vobj)) {
      active[static_cast<std::size_t>(kstar)] = leaving;
      solve_vertex(nb);
      break;
    }
    is_active[static_cast<std::size_t>(leaving)] = 0;
    is_active[static_cast<std::size_t>(entering)] = 1;
    vb = nb;
    vr = std::move(nr);
    vobj = nobj;
    ++sol.iterations;
  }
  if (vobj <= objective) {
    sol.b = vb;
  } else {
    sol.b = b;
    sol.optimal = false;
  }
  return sol;
}

// Pairwise (Wilcoxon) form  min_b sum_{i<j} |e_i - e_j|,  e = y - w b,
// worked from per-observation vectors so the pairs are never stored.
// Breakpoint storage for the exact phase is bounded by kMaxPairs.
constexpr Eigen::Index kMaxPairs = 4'000'000;

struct Pair {
  Eigen::Index i;
  Eigen::Index j;
};

double pairwise_l1(const Vector& e) {
  std::vector<double> s(e.data(), e.data() + e.size());
  std::sort(s.begin(), s.end());
  const auto n = static_cast<double>(s.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) sum += (2.0 * static_cast<double>(k) - n + 1.0) * s[k];
  return sum;
}

bool pairwise_irls_step(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& w,
                        const Vector& e, double eps, Vector& b_out) {
  const auto n = y.size();
  const auto q = w.cols();
  Matrix a = Matrix::Zero(q, q);
  Vector g = Vector::Zero(q);
  Eigen::ArrayXXd dw(n, q);
  Eigen::ArrayXd om(n), ody(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const auto m = n - i - 1;
    om.head(m) = (e.tail(m).array() - e[i]).abs().max(eps).inverse();
    ody.head(m) = om.head(m) * (y.tail(m).array() - y[i]);
    for (Eigen::Index l = 0; l < q; ++l) {
      dw.col(l).head(m) = w.col(l).tail(m).array() - w(i, l);
      g[l] += (dw.col(l).head(m) * ody.head(m)).sum();
    }
    for (Eigen::Index l = 0; l < q; ++l) {
      const Eigen::ArrayXd wl = dw.col(l).head(m) * om.head(m);
      for (Eigen::Index k = l; k < q; ++k) a(l, k) += (wl * dw.col(k).head(m)).sum();
    }
  }
  a.triangularView<Eigen::StrictlyLower>() = a.transpose().triangularView<Eigen::StrictlyLower>();
  Eigen::LDLT<Matrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) return false;
  b_out = ldlt.solve(g);
  return b_out.allFinite();
}

struct PairBreak {
  double t;
  double weight;
  Pair pair;
};

PairBreak pair_weighted_median(std::vector<PairBreak>& items, double target) {
  auto lo = items.begin();
  auto hi = items.end();
  const auto by_t = [](const PairBreak& a, const PairBreak& b) { return a.t < b.t; };
  while (hi - lo > 1) {
    const auto mid = lo + (hi - lo) / 2;
    std::nth_element(lo, mid, hi, by_t);
    double left = 0.0;
    for (auto it = lo; it != mid; ++it) left += it->weight;
    if (left >= target) {
      hi = mid;
    } else if (left + mid->weight >= target) {
      return *mid;
    } else {
      target -= left + mid->weight;
      lo = mid + 1;
    }
  }
  return *lo;
}

// Same scheme as solve_l1: IRLS, then vertex descent with exact line search.
L1Solution solve_pairwise(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& w,
                          Vector b, const RankFitOptions& options, int irls_steps) {
  const auto n = y.size();
  const auto q = w.cols();
  const bool exact = n * (n - 1) / 2 <= kMaxPairs;
  L1Solution sol;
  Vector e = y - w * b;
  const double scale = std::max(y.cwiseAbs().maxCoeff(), 1e-300);
  const double eps = std::max(options.smoothing, 1e-15 * scale);

  Vector next(q);
  bool irls_converged = false;
  for (int it = 0; it < irls_steps; ++it) {
    if (!pairwise_irls_step(y, w, e, eps, next)) {
      throw Error(ErrorKind::NumericalDegeneracy, "IRLS weighted system is singular");
    }
    ++sol.iterations;
    const double change = (next - b).cwiseAbs().maxCoeff();
    b = next;
    e = y - w * b;
    const double tol = exact ? options.irls_handoff : options.tol;
    if (change < tol * (1.0 + b.cwiseAbs().maxCoeff())) {
      irls_converged = true;
      break;
    }
  }
  const double zero_tol = 1e-12 * scale;
  const double objective = pairwise_l1(e);
  if (!exact || objective <= zero_tol) {
    sol.b = b;
    sol.optimal = exact ? true : irls_converged;
    return sol;
  }

  // order of the residuals and positions within it
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> pos(static_cast<std::size_t>(n));
  const auto sort_residuals = [&](const Vector& res) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index c) { return res[a] < res[c]; });
    for (Eigen::Index k = 0; k < n; ++k) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = k;
  };

  // initial vertex: nearly tied pairs, which sit close in sorted order
  sort_residuals(e);
  std::vector<Pair> cand;
  const Eigen::Index reach = std::min<Eigen::Index>(n - 1, 4 * q + 4);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index s = 1; s <= reach && a + s < n; ++s) {
      cand.push_back({order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(a + s)]});
    }
  }
  const auto closer = [&](const Pair& u, const Pair& v) {
    return std::abs(e[u.i] - e[u.j]) < std::abs(e[v.i] - e[v.j]);
  };
  const auto head = std::min<std::size_t>(cand.size(), static_cast<std::size_t>(8 * q + 8));
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(head), cand.end(), closer);
  std::vector<Pair> active;
  Matrix basis(q, 0);
  for (std::size_t k = 0; k < cand.size(); ++k) {
    if (static_cast<Eigen::Index>(active.size()) == q) break;
    if (k == head) std::sort(cand.begin() + static_cast<std::ptrdiff_t>(head), cand.end(), closer);
    const Pair& pr = cand[k];
    Vector v = (w.row(pr.i) - w.row(pr.j)).transpose();
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (Eigen::Index c = 0; c < basis.cols(); ++c) v -= basis.col(c).dot(v) * basis.col(c);
    if (v.norm() <= 1e-9 * norm0) continue;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = v / v.norm();
    active.push_back(pr);
  }
  if (static_cast<Eigen::Index>(active.size()) < q) {
    sol.b = b;
    return sol;
  }

  Matrix da(q, q);
  Vector ya(q);
  const auto solve_vertex = [&](Vector& out) {
    for (Eigen::Index a = 0; a < q; ++a) {
      const Pair& pr = active[static_cast<std::size_t>(a)];
      da.row(a) = w.row(pr.i) - w.row(pr.j);
      ya[a] = y[pr.i] - y[pr.j];
    }
    Eigen::FullPivLU<Matrix> lu(da);
    if (!lu.isInvertible()) return false;
    out = lu.solve(ya);
    return out.allFinite();
  };

  Vector vb(q);
  if (!solve_vertex(vb)) {
    sol.b = b;
    return sol;
  }
  Vector ve = y - w * vb;
  double vobj = pairwise_l1(ve);

  std::vector<PairBreak> breaks;
  breaks.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  Vector c(n), u(n), de(n), dv(n);
  std::vector<Pair> excluded;
  for (int pivot = 0; pivot < options.max_pivots; ++pivot) {
    // c_i = sum_j sign(e_i - e_j) over pairs that are neither active nor tied
    sort_residuals(ve);
    for (Eigen::Index k = 0; k < n; ++k) {
      c[order[static_cast<std::size_t>(k)]] = 2.0 * static_cast<double>(k) - static_cast<double>(n) + 1.0;
    }
    excluded.clear();
    const auto exclude = [&](Eigen::Index i, Eigen::Index j) {
      const Eigen::Index lo = std::min(i, j), hi = std::max(i, j);
      for (const Pair& x : excluded) {
        if (x.i == lo && x.j == hi) return;
      }
      excluded.push_back({lo, hi});
      const bool i_first = pos[static_cast<std::size_t>(i)] < pos[static_cast<std::size_t>(j)];
      c[i] += i_first ? 1.0 : -1.0;
      c[j] += i_first ? -1.0 : 1.0;
    };
    for (Eigen::Index a = 0; a < n; ++a) {
      const Eigen::Index ia = order[static_cast<std::size_t>(a)];
      for (Eigen::Index s = a + 1; s < n; ++s) {
        const Eigen::Index is = order[static_cast<std::size_t>(s)];
        if (ve[is] - ve[ia] > zero_tol) break;
        exclude(ia, is);
      }
    }
    for (const Pair& pr : active) exclude(pr.i, pr.j);
    const Vector g = w.transpose() * c;

    Eigen::FullPivLU<Matrix> lu(da);
    const Vector lambda = lu.transpose().solve(Vector(-g));
    Eigen::Index kstar = 0;
    const double lmax = lambda.cwiseAbs().maxCoeff(&kstar);
    if (lmax <= 1.0 + 1e-9) {
      sol.optimal = true;
      break;
    }
    Vector dir = Vector::Zero(q);
    dir[kstar] = lambda[kstar] > 0.0 ? -1.0 : 1.0;
    const Vector delta = lu.solve(dir);
    u = w * delta;
    const Pair leaving = active[static_cast<std::size_t>(kstar)];

    // exact line search over t > 0 on sum_{i<j} |(e_i - e_j) - t (u_i - u_j)|
    const double vtol = 1e-12 * std::max(u.cwiseAbs().maxCoeff(), 1e-300);
    breaks.clear();
    double below = std::abs(u[leaving.i] - u[leaving.j]);
    double total = below;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const auto m = n - i - 1;
      de.head(m) = (ve.tail(m).array() - ve[i]).matrix();
      dv.head(m) = (u.tail(m).array() - u[i]).matrix();
      for (Eigen::Index k = 0; k < m; ++k) {
        const double v = dv[k];
        if (std::abs(v) <= vtol) continue;
        const Eigen::Index j = i + 1 + k;
        if ((i == leaving.i && j == leaving.j) || (i == leaving.j && j == leaving.i)) continue;
        const double t = de[k] / v;
        const double wt = std::abs(v);
        total += wt;
        if (t > 0.0) {
          breaks.push_back({t, wt, {i, j}});
        } else {
          below += wt;
        }
      }
    }
    const double target = 0.5 * total - below;
    if (breaks.empty() || !(target > 0.0)) break;
    const Pair entering = pair_weighted_median(breaks, target).pair;
    active[static_cast<std::size_t>(kstar)] = entering;
    Vector nb(q);
    Vector ne;
    double nobj = 0.0;
    const bool ok = solve_vertex(nb);
    if (ok) {
      ne = y - w * nb;
      nobj = pairwise_l1(ne);
    }
    if (!ok || nobj > vobj + 1e-12 * (1.0 + vobj)) {
      active[static_cast<std::size_t>(kstar)] = leaving;
      solve_vertex(nb);
      break;
    }
    vb = nb;
    ve = std::move(ne);
    vobj = nobj;
    ++sol.iterations;
  }
  if (vobj <= objective) {
    sol.b = vb;
  } else {
    sol.b = b;
    sol.optimal = false;
  }
  return sol;
}

}  // namespace

double ScoreFunction::operator()(double t) const {
  switch (kind) {
    case ScoreKind::Wilcoxon: return kSqrt12 * (t - 0.5);
    case ScoreKind::Sign: return t > 0.5 ? 1.0 : (t < 0.5 ? -1.0 : 0.0);
  }
  return 0.0;
}

Vector ranks(const Eigen::Ref<const Vector>& values) {
  require_finite(values, "rank input");
  const auto n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
  Vector out(n);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && values[order[stop]] == values[order[start]]) ++stop;
    // positions start..stop-1 hold ranks start+1..stop
    const double mid = 0.5 * static_cast<double>(start + 1 + stop);
    for (Eigen::Index k = start; k < stop; ++k) out[order[k]] = mid;
    start = stop;
  }
  return out;
}

double dispersion(const Eigen::Ref<const Vector>& residuals, ScoreFunction score) {
  const auto n = residuals.size();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "dispersion needs at least 2 residuals");
  require_finite(residuals, "rank input");
  std::vector<double> sorted(residuals.data(), residuals.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const double denom = static_cast<double>(n + 1);
  // tied residuals share the average of their scores
  double sum = 0.0;
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && sorted[stop] == sorted[start]) ++stop;
    const auto size = static_cast<double>(stop - start);
    double a = 0.0;
    if (score.kind == ScoreKind::Wilcoxon) {
      a = size * score(0.5 * static_cast<double>(start + stop + 1) / denom);
    } else {
      for (Eigen::Index k = start; k < stop; ++k) a += score(static_cast<double>(k + 1) / denom);
    }
    sum += a * sorted[start];
    start = stop;
  }
  // all-tied residuals give exactly zero; rounding can leave a tiny negative
  return std::max(sum, 0.0);
}

double silverman_bandwidth(const Eigen::Ref<const Vector>& residuals, double mult) {
  const double n = static_cast<double>(residuals.size());
  return mult * sample_sd(residuals) * std::pow(n, -0.2);
}

double estimate_tau_s(const Eigen::Ref<const Vector>& residuals, Eigen::Index q) {
  const auto n = residuals.size();
  if (n < q + 2) {
    throw Error(ErrorKind::InvalidArgument, "too few residuals for the location scale");
  }
  std::vector<double> s(residuals.data(), residuals.data() + n);
  std::sort(s.begin(), s.end());
  const double zc = normal_quantile(0.975);
  const double nn = static_cast<double>(n);
  const auto c = static_cast<Eigen::Index>(
      std::max(0.0, std::floor(0.5 * nn - 0.5 * std::sqrt(nn) * zc - 0.5)));
  const double width = s[static_cast<std::size_t>(n - c - 1)] - s[static_cast<std::size_t>(c)];
  const double dof = std::sqrt(nn / static_cast<double>(n - q - 1));
  return dof * std::sqrt(nn) * width / (2.0 * zc);
}

double estimate_c_phi(const Eigen::Ref<const Vector>& residuals, ScoreFunction score,
                      double bandwidth) {
  require_finite(residuals, "residuals");
  if (residuals.size() < 10) {
    throw Error(ErrorKind::InvalidArgument, "c_phi estimation needs at least 10 residuals");
  }
  if (!(bandwidth > 0.0)) throw Error(ErrorKind::InvalidArgument, "bandwidth must be positive");
  if (is_degenerate(residuals)) {
    throw Error(ErrorKind::NumericalDegeneracy, "residuals are all equal");
  }
  return c_phi_unchecked(residuals, score, bandwidth);
}

double estimate_c_phi(const Eigen::Ref<const Vector>& residuals, ScoreFunction score) {
  return estimate_c_phi(residuals, score, silverman_bandwidth(residuals));
}

RankLinearFit fit_rank_linear(const Eigen::Ref<const Vector>& y,
                              const Eigen::Ref<const Matrix>& w, ScoreFunction score,
                              const RankFitOptions& options) {
  const auto n = y.size();
  const auto q = w.cols();
  if (w.rows() != n) throw Error(ErrorKind::DimensionMismatch, "design rows differ from y");
  if (n < 2 || q >= n) {
    throw Error(ErrorKind::RankDeficient, "need more observations than design columns");
  }
  require_finite(y, "response");
  if (!w.allFinite()) throw Error(ErrorKind::NonFinite, "design contains non-finite values");

  const Eigen::RowVectorXd wbar = w.colwise().mean();
  const Matrix wc = w.rowwise() - wbar;
  for (Eigen::Index k = 0; k < q; ++k) {
    if (is_degenerate(w.col(k))) {
      throw Error(ErrorKind::RankDeficient,
                  "design column " + std::to_string(k) + " is constant; the intercept is "
                  "estimated separately");
    }
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(wc);
  if (q > 0 && qr.rank() < q) throw Error(ErrorKind::RankDeficient, "design is rank deficient");

  RankLinearFit fit;
  Vector b = q > 0 ? Vector(qr.solve(y - Vector::Constant(n, y.mean()))) : Vector(0);
  Vector r = y - w * b;

  if (q > 0) {
    const bool warm = options.start && options.start->size() == q;
    if (warm) b = *options.start;
    const int irls_steps = warm ? options.warm_irls : options.max_iter;
    L1Solution sol;
    if (score.kind == ScoreKind::Sign) {
      Vector start(q + 1);
      start[0] = median(Vector(y - w * b));
      start.tail(q) = b;
      sol = solve_l1(sign_rows(y, w), start, options, irls_steps);
      b = sol.b.tail(q);
    } else {
      sol = solve_pairwise(y, w, b, options, irls_steps);
      b = sol.b;
    }
    fit.iterations = sol.iterations;
    fit.converged = sol.optimal;
    r = y - w * b;
  } else {
    fit.converged = true;
  }

  fit.coefficients = b;
  fit.residuals = r;
  fit.intercept = median(r);
  fit.dispersion_value = dispersion(r, score);
  if (!options.inference) return fit;

  const Matrix gram_inv = q > 0 ? Matrix((wc.transpose() * wc).inverse()) : Matrix(0, 0);
  if (is_degenerate(r)) {
    fit.c_phi_hat = 0.0;
    fit.tau_s_hat = 0.0;
  } else {
    fit.c_phi_hat = c_phi_unchecked(r, score, silverman_bandwidth(r));
    fit.tau_s_hat = n >= q + 2 ? estimate_tau_s(r, q) : 0.0;
  }
  fit.covariance = fit.c_phi_hat * fit.c_phi_hat * gram_inv;
  const Vector wbar_col = wbar.transpose();
  fit.intercept_covariance = -(fit.covariance * wbar_col);
  fit.intercept_variance = fit.tau_s_hat * fit.tau_s_hat / static_cast<double>(n) +
                           wbar_col.dot(fit.covariance * wbar_col);
  return fit;
}

}  // namespace bentrank
