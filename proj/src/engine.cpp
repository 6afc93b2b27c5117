#include "bicomb/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>

namespace bicomb {

namespace {

constexpr double kTiny = 1e-13;
constexpr double kHuge = 1e100;
constexpr double kPi = 3.141592653589793238462643383279502884;

// ---------------------------------------------------------------- 1-D solves

// Bounded 1-D minimization, Brent's parabolic/golden hybrid.
double brent_min(const std::function<double(double)>& f, double a, double b, double* fout) {
  const double gold = 0.3819660112501051;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < 120; ++it) {
    const double m = 0.5 * (a + b);
    const double tol = 1e-12 * (1.0 + std::fabs(x));
    const double t2 = 2.0 * tol;
    if (std::fabs(x - m) <= t2 - 0.5 * (b - a)) break;
    double p = 0.0, q = 0.0, r = 0.0;
    if (std::fabs(e) > tol) {
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0)
        p = -p;
      else
        q = -q;
      r = e;
      e = d;
    }
    if (std::fabs(p) < std::fabs(0.5 * q * r) && p > q * (a - x) && p < q * (b - x)) {
      d = p / q;
      const double u = x + d;
      if (u - a < t2 || b - u < t2) d = x < m ? tol : -tol;
    } else {
      e = (x < m ? b : a) - x;
      d = gold * e;
    }
    const double u = std::fabs(d) >= tol ? x + d : x + (d > 0.0 ? tol : -tol);
    const double fu = f(u);
    if (fu <= fx) {
      if (u < x)
        b = x;
      else
        a = x;
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x)
        a = u;
      else
        b = u;
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  if (fout) *fout = fx;
  return x;
}

// Expands from t0 until the convex function rises on both sides.
void bracket_convex(const std::function<double(double)>& f, double t0, double lo_cap, double hi_cap,
                    double& a, double& b) {
  double step = 0.5 * (1.0 + std::fabs(t0));
  double f0 = f(t0);
  a = std::max(lo_cap, t0 - step);
  b = std::min(hi_cap, t0 + step);
  for (int it = 0; it < 80 && a > lo_cap && f(a) <= f0; ++it) {
    step *= 2.0;
    a = std::max(lo_cap, t0 - step);
  }
  step = 0.5 * (1.0 + std::fabs(t0));
  for (int it = 0; it < 80 && b < hi_cap && f(b) <= f0; ++it) {
    step *= 2.0;
    b = std::min(hi_cap, t0 + step);
  }
}

double line_min(const std::function<double(double)>& f, double t0, double lo, double hi,
                double* fout) {
  double a, b;
  bracket_convex(f, t0, lo, hi, a, b);
  return brent_min(f, a, b, fout);
}

// Edge of the sublevel set {f <= cut} starting inside it at t_in, moving
// toward dir; f convex, so the edge is a single point (or the domain cap).
double flat_edge(const std::function<double(double)>& f, double t_in, double cut, double dir,
                 double cap) {
  double step = 1e-6 * (1.0 + std::fabs(t_in));
  double inside = t_in, outside = t_in;
  bool found = false;
  for (int it = 0; it < 80; ++it) {
    double probe = t_in + dir * step;
    if ((dir > 0 && probe >= cap) || (dir < 0 && probe <= cap)) probe = cap;
    if (f(probe) > cut) {
      outside = probe;
      found = true;
      break;
    }
    inside = probe;
    if (probe == cap) return cap;
    step *= 2.0;
  }
  if (!found) return cap;
  for (int it = 0; it < 60 && std::fabs(outside - inside) > 1e-13 * (1.0 + std::fabs(inside)); ++it) {
    double mid = 0.5 * (inside + outside);
    if (f(mid) > cut)
      outside = mid;
    else
      inside = mid;
  }
  return inside;
}

// ----------------------------------------------------- crossing optimization

// Objective for one chart sequence: x in chart c_0, crossing parameters on
// each hop's gluing locus, y in chart c_k; length = sum of in-chart segments.
struct HopRef {
  const Locus* in_prev;  // locus in the chart being left
  const Locus* in_next;  // same locus seen from the chart being entered
  int to_chart;
  int gluing;
  int offset;  // first slot in the flattened parameter vector
};

struct SeqProblem {
  Vec x;
  Vec y;
  bool has_target = false;
  std::vector<HopRef> hops;
  int nparams = 0;

  double eval(const std::vector<double>& t, PExponent q) const {
    double sum = 0.0;
    Vec cur = x;
    for (const HopRef& h : hops) {
      const int k = h.in_prev->nparams();
      const double* slice = t.data() + h.offset;
      sum += lp_dist(cur, h.in_prev->at(slice, k), q);
      cur = h.in_next->at(slice, k);
    }
    if (has_target) sum += lp_dist(cur, y, q);
    return sum;
  }
};

struct SolveResult {
  std::vector<double> t;
  double value = 0.0;    // objective at the requested p
  double value2 = 0.0;   // ℓ² objective at the same parameters (tie ordering)
};

// How much of the solution a caller consumes. Reach bounds and plain
// distances only need the minimal value; crossing positions (with ℓ²
// settling of flat minima for p ∈ {1, ∞}, so they resolve to the crossing
// shared with the ℓ² trajectory) are only worth iterating on when the
// caller keeps the path.
enum class SolveMode { reach, value, path };

// Cyclic coordinate descent over the crossing parameters, with joint-
// direction escapes from the norm kinks where a leg collapses.
SolveResult solve_sequence(const SeqProblem& prob, PExponent p, std::vector<double> t0,
                           SolveMode mode = SolveMode::path) {
  const PExponent p2 = PExponent::finite(2);
  const bool precise = mode == SolveMode::path;
  // Flat objectives (p = 1, infinity) stall cyclic descent on max/sum
  // plateaus in every mode: single coordinates sit on level sets while joint
  // moves still descend. Settling plateau ties toward the l2 objective walks
  // the flat and re-opens p-descent, so it is a correctness device here, not
  // just canonical-path cosmetics.
  const bool flat_risk = p.is_infinite() || p.value() == 1.0;
  std::vector<double> t = std::move(t0);
  t.resize(static_cast<size_t>(prob.nparams), 0.0);

  auto coord_fn = [&prob, &t](int j, PExponent q) {
    return [&prob, &t, j, q](double s) {
      double keep = t[static_cast<size_t>(j)];
      t[static_cast<size_t>(j)] = s;
      double v = prob.eval(t, q);
      t[static_cast<size_t>(j)] = keep;
      return v;
    };
  };

  // Parameter domains from the locus boxes.
  std::vector<double> lo(static_cast<size_t>(prob.nparams)), hi(lo.size());
  for (const HopRef& h : prob.hops)
    for (int k = 0; k < h.in_prev->nparams(); ++k) {
      lo[static_cast<size_t>(h.offset + k)] = h.in_prev->plo[static_cast<size_t>(k)];
      hi[static_cast<size_t>(h.offset + k)] = h.in_prev->phi[static_cast<size_t>(k)];
    }
  for (size_t j = 0; j < t.size(); ++j) t[j] = std::min(std::max(t[j], lo[j]), hi[j]);

  double cur = prob.eval(t, p);
  double cur2 = prob.eval(t, p2);
  // Lexicographic line minimum along an arbitrary direction: minimize the
  // p-objective, then pick the l2-least point of its flat when asked.
  std::vector<double> pat_probe(t.size());
  auto dir_min = [&](const std::vector<double>& dir, double alo, double ahi, bool tie,
                     double* fout) {
    auto along = [&](PExponent q) {
      return [&, q](double a) {
        for (size_t j = 0; j < t.size(); ++j)
          pat_probe[j] = std::min(std::max(t[j] + a * dir[j], lo[j]), hi[j]);
        return prob.eval(pat_probe, q);
      };
    };
    auto gp = along(p);
    double fmin;
    double astar = line_min(gp, 0.0, alo, ahi, &fmin);
    if (tie) {
      const double cut = fmin + 1e-11 * (1.0 + fmin);
      double a = flat_edge(gp, astar, cut, -1.0, alo);
      double b = flat_edge(gp, astar, cut, +1.0, ahi);
      if (std::isfinite(a) && std::isfinite(b) && b - a > 1e-10)
        astar = brent_min(along(p2), a, b, nullptr);
    }
    if (fout) *fout = gp(astar);
    return astar;
  };

  auto run_sweeps = [&]() {
    int stalls = 0;
    // Path mode settles ties every sweep so trajectories land on the
    // canonical (l2-selected) representative, and follows each sweep with a
    // pattern step along the net displacement, which cuts through the zigzag
    // of cyclic descent in coupled valleys. Value and reach solves only need
    // tie settling to cross plateaus of the flat norms, so they run cheap
    // sweeps until the objective stalls, then try settled sweeps and stop
    // once one fails to reopen the descent.
    bool settle = precise && flat_risk;
    std::vector<double> tprev(t.size()), dir(t.size());
    for (int sweep = 0; sweep < 10000; ++sweep) {
      const double before = cur, before2 = cur2;
      const bool settled_sweep = settle;
      if (precise) tprev = t;
      double moved = 0.0, scale = 1.0;
      for (int j = 0; j < prob.nparams; ++j) {
        auto g = coord_fn(j, p);
        double fmin;
        double s = line_min(g, t[static_cast<size_t>(j)], lo[static_cast<size_t>(j)],
                            hi[static_cast<size_t>(j)], &fmin);
        if (settle) {
          const double cut = fmin + 1e-11 * (1.0 + fmin);
          double a = flat_edge(g, s, cut, -1.0, lo[static_cast<size_t>(j)]);
          double b = flat_edge(g, s, cut, +1.0, hi[static_cast<size_t>(j)]);
          if (std::isfinite(a) && std::isfinite(b) && b - a > 1e-10)
            s = brent_min(coord_fn(j, p2), a, b, nullptr);
        }
        moved = std::max(moved, std::fabs(s - t[static_cast<size_t>(j)]));
        scale = std::max(scale, std::fabs(s));
        t[static_cast<size_t>(j)] = s;
        cur = prob.eval(t, p);
      }
      if (precise) {
        double dn = 0.0;
        for (size_t j = 0; j < t.size(); ++j) {
          dir[j] = t[j] - tprev[j];
          dn = std::max(dn, std::fabs(dir[j]));
        }
        if (dn > 1e-14 * scale) {
          double alo = -kHuge, ahi = kHuge;
          for (size_t j = 0; j < t.size(); ++j) {
            if (dir[j] > 0.0) {
              ahi = std::min(ahi, (hi[j] - t[j]) / dir[j]);
              alo = std::max(alo, (lo[j] - t[j]) / dir[j]);
            } else if (dir[j] < 0.0) {
              ahi = std::min(ahi, (lo[j] - t[j]) / dir[j]);
              alo = std::max(alo, (hi[j] - t[j]) / dir[j]);
            }
          }
          if (ahi > alo) {
            double fp;
            double astar = dir_min(dir, alo, ahi, settle, &fp);
            for (size_t j = 0; j < t.size(); ++j)
              pat_probe[j] = std::min(std::max(t[j] + astar * dir[j], lo[j]), hi[j]);
            const double f2 = prob.eval(pat_probe, p2);
            if (fp < cur || (fp <= cur + 1e-11 * (1.0 + cur) && f2 < cur2)) {
              for (size_t j = 0; j < t.size(); ++j) {
                moved = std::max(moved, std::fabs(pat_probe[j] - t[j]));
                scale = std::max(scale, std::fabs(pat_probe[j]));
                t[j] = pat_probe[j];
              }
              cur = prob.eval(t, p);
            }
          }
        }
      }
      cur2 = prob.eval(t, p2);
      const bool p_done = before - cur < kTiny * (1.0 + cur);
      if (!precise) {
        if (p_done && settled_sweep) break;
        if (p_done && !flat_risk && sweep > 0) break;
        settle = flat_risk && p_done;
        continue;
      }
      // Objective stalls well before the crossing points settle (alternating
      // minimization converges geometrically), so require both. On an exact
      // plateau the positions wander forever without moving the objective
      // (the breakpoints are then collinear with the locus, so the wander
      // never changes the path as a set): give up on settling after a while.
      const bool tie_done = !settle || before2 - cur2 < kTiny * (1.0 + cur2);
      stalls = p_done && tie_done ? stalls + 1 : 0;
      const bool settled = moved < 1e-10 * scale || stalls >= 50;
      if (p_done && tie_done && settled && sweep > 0) break;
    }
  };

  // Objective with one leg removed, for estimating the pull of the other
  // legs at a point where that leg has collapsed.
  auto eval_skip = [&](size_t skip) {
    double sum = 0.0;
    Vec at = prob.x;
    for (size_t i = 0; i < prob.hops.size(); ++i) {
      const HopRef& h = prob.hops[i];
      const int k = h.in_prev->nparams();
      const double* slice = t.data() + h.offset;
      if (i != skip) sum += lp_dist(at, h.in_prev->at(slice, k), p);
      at = h.in_next->at(slice, k);
    }
    if (prob.has_target && skip != prob.hops.size()) sum += lp_dist(at, prob.y, p);
    return sum;
  };

  // A leg that collapses to a point (a path through a chart corner or a locus
  // intersection) puts a norm kink in the objective: every single crossing can
  // be pinned while sliding adjacent crossings together still shortens the
  // path. Escape by line searches along joint directions of the parameter
  // blocks on both sides of the dead leg.
  auto kink_escape = [&]() -> bool {
    const size_t nlegs = prob.hops.size() + (prob.has_target ? 1 : 0);
    for (size_t i = 0; i < nlegs; ++i) {
      std::vector<int> idx;
      auto add_block = [&idx](const HopRef& h) {
        for (int k = 0; k < h.in_prev->nparams(); ++k) idx.push_back(h.offset + k);
      };
      Vec from, to;
      if (i == 0) {
        from = prob.x;
      } else {
        const HopRef& h = prob.hops[i - 1];
        from = h.in_next->at(t.data() + h.offset, h.in_prev->nparams());
        add_block(h);
      }
      if (i < prob.hops.size()) {
        const HopRef& h = prob.hops[i];
        to = h.in_prev->at(t.data() + h.offset, h.in_prev->nparams());
        add_block(h);
      } else {
        to = prob.y;
      }
      if (idx.size() < 2) continue;  // one parameter is plain line search
      if (lp_dist(from, to, p) > 1e-7 * (1.0 + cur)) continue;

      std::vector<double> keep(idx.size());
      for (size_t m = 0; m < idx.size(); ++m) keep[m] = t[static_cast<size_t>(idx[m])];
      auto dir_min = [&](const std::vector<double>& v, double& alpha) {
        double alo = -std::numeric_limits<double>::infinity();
        double ahi = std::numeric_limits<double>::infinity();
        for (size_t m = 0; m < idx.size(); ++m) {
          const size_t j = static_cast<size_t>(idx[m]);
          if (v[m] > 0.0) {
            alo = std::max(alo, (lo[j] - t[j]) / v[m]);
            ahi = std::min(ahi, (hi[j] - t[j]) / v[m]);
          } else if (v[m] < 0.0) {
            alo = std::max(alo, (hi[j] - t[j]) / v[m]);
            ahi = std::min(ahi, (lo[j] - t[j]) / v[m]);
          }
        }
        if (!(ahi - alo > kTiny)) {
          alpha = 0.0;
          return cur;
        }
        auto f = [&](double a) {
          for (size_t m = 0; m < idx.size(); ++m)
            t[static_cast<size_t>(idx[m])] = keep[m] + a * v[m];
          const double val = prob.eval(t, p);
          for (size_t m = 0; m < idx.size(); ++m) t[static_cast<size_t>(idx[m])] = keep[m];
          return val;
        };
        double fmin;
        alpha = line_min(f, 0.0, alo, ahi, &fmin);
        return fmin;
      };

      std::vector<std::vector<double>> dirs;
      if (idx.size() == 2) {
        for (int a = 0; a < 24; ++a) {
          const double phi = kPi * a / 24.0;
          dirs.push_back({std::cos(phi), std::sin(phi)});
        }
      } else {
        for (size_t m = 0; m + 1 < idx.size(); ++m)
          for (size_t n = m + 1; n < idx.size(); ++n) {
            std::vector<double> v(idx.size(), 0.0);
            v[m] = 1.0;
            v[n] = 1.0;
            dirs.push_back(v);
            v[n] = -1.0;
            dirs.push_back(v);
          }
      }
      // The dead leg grows by at most the parameter step in any direction,
      // so the steepest descent of the remaining legs is the escape
      // direction whenever one exists.
      {
        std::vector<double> g(idx.size(), 0.0);
        double gn = 0.0;
        for (size_t m = 0; m < idx.size(); ++m) {
          const size_t j = static_cast<size_t>(idx[m]);
          const double h = 1e-7 * (1.0 + std::fabs(t[j]));
          t[j] = keep[m] + h;
          const double fp = eval_skip(i);
          t[j] = keep[m] - h;
          const double fm = eval_skip(i);
          t[j] = keep[m];
          g[m] = (fp - fm) / (2.0 * h);
          gn += g[m] * g[m];
        }
        if (gn > kTiny) {
          for (double& gm : g) gm = -gm / std::sqrt(gn);
          dirs.push_back(std::move(g));
        }
      }

      double best = cur, best_alpha = 0.0;
      const std::vector<double>* best_dir = nullptr;
      for (const auto& v : dirs) {
        double alpha;
        const double f = dir_min(v, alpha);
        if (f < best) {
          best = f;
          best_alpha = alpha;
          best_dir = &v;
        }
      }
      if (best_dir && best < cur - 1e-12 * (1.0 + cur)) {
        for (size_t m = 0; m < idx.size(); ++m)
          t[static_cast<size_t>(idx[m])] = keep[m] + best_alpha * (*best_dir)[m];
        cur = prob.eval(t, p);
        cur2 = prob.eval(t, p2);
        return true;
      }
    }
    return false;
  };

  run_sweeps();
  for (int round = 0; round < (mode == SolveMode::reach ? 2 : 6); ++round) {
    if (!kink_escape()) break;
    run_sweeps();
  }
  SolveResult res;
  res.t = std::move(t);
  res.value = cur;
  res.value2 = prob.eval(res.t, p2);
  return res;
}

// --------------------------------------------------------- sequence search

struct Route {
  int start_chart = -1;
  Vec x;
  Vec y;
  std::vector<HopRef> hops;
  SolveResult solution;
};

struct SearchNode {
  double reach = 0.0;
  int chart = -1;
  int last_gluing = -1;
  std::vector<HopRef> hops;
  Vec x;
  std::vector<double> t;
  std::vector<char> visited;
  bool operator>(const SearchNode& o) const { return reach > o.reach; }
};

const Locus& side_locus(const Gluing& g, bool a_side) { return a_side ? g.locus_a : g.locus_b; }

// Equality of already-canonicalized points: canonical forms are unique, so a
// coordinate comparison suffices (no orbit walk).
bool canonical_equal(const SpacePoint& a, const SpacePoint& b, double tol = 1e-12) {
  if (a.chart != b.chart) return false;
  double scale = 1.0, diff = 0.0;
  for (int i = 0; i < a.coords.dim(); ++i) {
    scale = std::max({scale, std::fabs(a.coords[i]), std::fabs(b.coords[i])});
    diff = std::max(diff, std::fabs(a.coords[i] - b.coords[i]));
  }
  return diff <= tol * scale;
}

// Admissible lower bound on the d_p distance from y to any point of the
// locus: ℓ² distance to the unclamped affine span, rescaled for p > 2.
double locus_distance_bound(const Locus& L, const Vec& y, PExponent p) {
  const double d2 = lp_dist(L.at(L.project(y, /*clamp=*/false)), y, PExponent::finite(2));
  if (p.is_infinite() || p.value() > 2.0) return d2 / std::sqrt(static_cast<double>(y.dim()));
  return d2;
}

// Minimal crossing route between x and y; null start_chart when x = y.
// Returns the best sequence ordered by (p-length, ℓ²-length). Callers that
// discard the crossing points pass need_path = false: ties with the
// incumbent are then skipped instead of solved to full precision.
Route best_route(const ChartAtlas& atlas, const SpacePoint& x, const SpacePoint& y, PExponent p,
                 const EngineOptions& opts, bool need_path = true) {
  const auto rx = orbit(atlas, x), ry = orbit(atlas, y);
  std::vector<std::optional<Vec>> target(atlas.charts.size());
  for (const SpacePoint& r : ry)
    if (!target[static_cast<size_t>(r.chart)]) target[static_cast<size_t>(r.chart)] = r.coords;

  Route best;
  double best_value = std::numeric_limits<double>::infinity();
  double best_value2 = std::numeric_limits<double>::infinity();
  auto consider = [&](Route cand) {
    const double v = cand.solution.value, v2 = cand.solution.value2;
    const double band = 1e-11 * (1.0 + v);
    if (v < best_value - band || (v < best_value + band && v2 < best_value2 - band)) {
      best_value = v;
      best_value2 = v2;
      best = std::move(cand);
    }
  };

  // Co-resident candidates: single straight segment.
  bool co_resident = false;
  for (const SpacePoint& r : rx)
    if (target[static_cast<size_t>(r.chart)]) {
      co_resident = true;
      Route direct;
      direct.start_chart = r.chart;
      direct.x = r.coords;
      direct.y = *target[static_cast<size_t>(r.chart)];
      direct.solution.value = lp_dist(direct.x, direct.y, p);
      direct.solution.value2 = lp_dist(direct.x, direct.y, PExponent::finite(2));
      consider(std::move(direct));
    }
  if (co_resident && atlas.convex_charts) return best;

  const int max_hops = std::max(0, opts.max_chart_seq_len - 1);
  std::priority_queue<SearchNode, std::vector<SearchNode>, std::greater<SearchNode>> open;
  for (const SpacePoint& r : rx) {
    SearchNode n;
    n.chart = r.chart;
    n.x = r.coords;
    n.visited.assign(atlas.charts.size(), 0);
    n.visited[static_cast<size_t>(r.chart)] = 1;
    open.push(std::move(n));
  }
  while (!open.empty()) {
    SearchNode node = open.top();
    open.pop();
    // Reach costs are monotone along extensions, so once the cheapest open
    // node exceeds the incumbent nothing left can improve on it.
    if (node.reach > best_value + 1e-9 * (1.0 + best_value)) break;
    if (!node.hops.empty() && target[static_cast<size_t>(node.chart)]) {
      const Vec& y_here = *target[static_cast<size_t>(node.chart)];
      const double tail = locus_distance_bound(*node.hops.back().in_next, y_here, p);
      double gate = best_value + 1e-9 * (1.0 + best_value);
      if (!need_path && std::isfinite(best_value)) gate = best_value - 1e-12 * (1.0 + best_value);
      if (node.reach + tail <= gate) {
        SeqProblem prob;
        prob.x = node.x;
        prob.hops = node.hops;
        prob.nparams = static_cast<int>(node.t.size());
        prob.y = y_here;
        prob.has_target = true;
        Route cand;
        cand.solution =
            solve_sequence(prob, p, node.t, need_path ? SolveMode::path : SolveMode::value);
        cand.x = node.x;
        cand.y = prob.y;
        cand.hops = node.hops;
        const Gluing& g0 = atlas.gluings[static_cast<size_t>(node.hops.front().gluing)];
        cand.start_chart = node.hops.front().in_prev == &g0.locus_a ? g0.chart_a : g0.chart_b;
        consider(std::move(cand));
      }
    }
    if (static_cast<int>(node.hops.size()) >= max_hops) continue;
    for (int gi : atlas.chart_gluings[static_cast<size_t>(node.chart)]) {
      if (gi == node.last_gluing) continue;
      const Gluing& g = atlas.gluings[static_cast<size_t>(gi)];
      if (g.chart_a == g.chart_b) continue;
      for (bool a_side : {true, false}) {
        if ((a_side ? g.chart_a : g.chart_b) != node.chart) continue;
        const int dest = a_side ? g.chart_b : g.chart_a;
        // Straight segments inside convex charts are globally geodesic, so a
        // minimizing route never revisits a chart there.
        if (atlas.convex_charts && node.visited[static_cast<size_t>(dest)]) continue;
        SearchNode next = node;
        next.last_gluing = gi;
        next.visited[static_cast<size_t>(dest)] = 1;
        HopRef hop;
        hop.in_prev = &side_locus(g, a_side);
        hop.in_next = &side_locus(g, !a_side);
        hop.to_chart = a_side ? g.chart_b : g.chart_a;
        hop.gluing = gi;
        hop.offset = static_cast<int>(next.t.size());
        next.chart = hop.to_chart;
        next.hops.push_back(hop);
        // Initial crossing parameters: project the entry point onto the locus.
        Vec entry = next.hops.size() == 1 ? next.x
                                          : next.hops[next.hops.size() - 2].in_next->at(std::vector<double>(
                                                next.t.end() - next.hops[next.hops.size() - 2].in_prev->nparams(),
                                                next.t.end()));
        for (double s : hop.in_prev->project(entry)) next.t.push_back(s);
        SeqProblem prefix;
        prefix.x = next.x;
        prefix.hops = next.hops;
        prefix.nparams = static_cast<int>(next.t.size());
        SolveResult sol = solve_sequence(prefix, p, next.t, SolveMode::reach);
        next.reach = sol.value;
        next.t = sol.t;
        if (next.reach > best_value + 1e-9 * (1.0 + best_value)) continue;
        open.push(std::move(next));
      }
    }
  }
  if (!std::isfinite(best_value))
    throw SearchExhausted("no chart sequence of length <= " +
                          std::to_string(opts.max_chart_seq_len) + " connects " +
                          point_str(atlas, x) + " and " + point_str(atlas, y));
  return best;
}

PolyPath route_to_path(const ChartAtlas& atlas, const Route& r) {
  PolyPath path;
  std::vector<SpacePoint> pts;
  std::vector<int> charts;
  int chart = r.start_chart;
  pts.push_back({chart, r.x});
  size_t off = 0;
  for (const HopRef& h : r.hops) {
    const int k = h.in_prev->nparams();
    std::vector<double> slice(r.solution.t.begin() + static_cast<long>(off),
                              r.solution.t.begin() + static_cast<long>(off) + k);
    off += static_cast<size_t>(k);
    charts.push_back(chart);
    pts.push_back({chart, h.in_prev->at(slice)});
    chart = h.to_chart;
  }
  charts.push_back(chart);
  pts.push_back({chart, r.y});

  // Collapse zero-length segments (crossings that landed on an endpoint).
  path.breakpoints.push_back(canonicalize(atlas, pts.front()));
  for (size_t i = 1; i < pts.size(); ++i) {
    SpacePoint next = canonicalize(atlas, pts[i]);
    if (canonical_equal(path.breakpoints.back(), next)) continue;
    path.breakpoints.push_back(next);
    path.chart_seq.push_back(atlas.chart(charts[i - 1]).id);
  }
  if (path.breakpoints.size() == 1) path.chart_seq.clear();
  return path;
}

PolyPath reverse_path(const PolyPath& p) {
  PolyPath r;
  r.breakpoints.assign(p.breakpoints.rbegin(), p.breakpoints.rend());
  r.chart_seq.assign(p.chart_seq.rbegin(), p.chart_seq.rend());
  return r;
}

struct OrderedRoute {
  Route route;
  bool flip = false;
};

// Solves the canonically ordered pair so results are exactly symmetric in
// (x, y); callers reverse the path when flip is set.
OrderedRoute ordered_best_route(const ChartAtlas& atlas, const SpacePoint& cx,
                                const SpacePoint& cy, PExponent p, const EngineOptions& opts,
                                bool need_path = true) {
  bool flip = cy.chart < cx.chart;
  if (cy.chart == cx.chart)
    for (int i = 0; i < cx.coords.dim(); ++i)
      if (cx.coords[i] != cy.coords[i]) {
        flip = cy.coords[i] < cx.coords[i];
        break;
      }
  const SpacePoint& a = flip ? cy : cx;
  const SpacePoint& b = flip ? cx : cy;
  return {best_route(atlas, a, b, p, opts, need_path), flip};
}

// ------------------------------------------------------------ product split

struct FactorPoints {
  SpacePoint xl, xr;
};

FactorPoints split_product_point(const ChartAtlas& atlas, const SpacePoint& x) {
  const ProductInfo& info = *atlas.product;
  const int cl = info.left_of(x.chart), cr = info.right_of(x.chart);
  const int dl = info.left->chart(cl).dim, dr = info.right->chart(cr).dim;
  FactorPoints f;
  f.xl.chart = cl;
  f.xl.coords = Vec(dl);
  for (int i = 0; i < dl; ++i) f.xl.coords[i] = x.coords[i];
  f.xr.chart = cr;
  f.xr.coords = Vec(dr);
  for (int i = 0; i < dr; ++i) f.xr.coords[i] = x.coords[dl + i];
  return f;
}

SpacePoint join_product_point(const ChartAtlas& atlas, const SpacePoint& l, const SpacePoint& r) {
  const ProductInfo& info = *atlas.product;
  SpacePoint out;
  out.chart = l.chart * info.right_chart_count + r.chart;
  const int dl = info.left->chart(l.chart).dim, dr = info.right->chart(r.chart).dim;
  out.coords = Vec(dl + dr);
  for (int i = 0; i < dl; ++i) out.coords[i] = l.coords[i];
  for (int i = 0; i < dr; ++i) out.coords[dl + i] = r.coords[i];
  return out;
}

}  // namespace

// ------------------------------------------------------------- path helpers

SegmentFrame segment_frame(const ChartAtlas& atlas, const PolyPath& path, int i) {
  const int chart = atlas.chart_index(path.chart_seq[static_cast<size_t>(i)]);
  if (chart < 0) throw MalformedInput("path references unknown chart " + path.chart_seq[static_cast<size_t>(i)]);
  auto a = chart_rep(atlas, path.breakpoints[static_cast<size_t>(i)], chart);
  auto b = chart_rep(atlas, path.breakpoints[static_cast<size_t>(i) + 1], chart);
  if (!a || !b)
    throw MalformedInput("path breakpoints " + std::to_string(i) + "," + std::to_string(i + 1) +
                         " are not co-resident in chart " + path.chart_seq[static_cast<size_t>(i)]);
  return {chart, *a, *b};
}

double path_length(const ChartAtlas& atlas, const PolyPath& path, PExponent p) {
  double sum = 0.0;
  for (int i = 0; i < path.segments(); ++i) {
    SegmentFrame f = segment_frame(atlas, path, i);
    sum += lp_dist(f.a, f.b, p);
  }
  return sum;
}

SpacePoint path_eval(const ChartAtlas& atlas, const PolyPath& path, PExponent p, double t) {
  if (t < -1e-12 || t > 1.0 + 1e-12) throw MalformedInput("path parameter must lie in [0,1]");
  t = std::min(std::max(t, 0.0), 1.0);
  if (path.single_point()) return canonicalize(atlas, path.breakpoints.front());
  if (t == 0.0) return canonicalize(atlas, path.breakpoints.front());
  if (t == 1.0) return canonicalize(atlas, path.breakpoints.back());
  std::vector<double> cum{0.0};
  for (int i = 0; i < path.segments(); ++i) {
    SegmentFrame f = segment_frame(atlas, path, i);
    cum.push_back(cum.back() + lp_dist(f.a, f.b, p));
  }
  const double s = t * cum.back();
  int seg = 0;
  while (seg + 1 < path.segments() && s > cum[static_cast<size_t>(seg) + 1]) ++seg;
  SegmentFrame f = segment_frame(atlas, path, seg);
  const double len = cum[static_cast<size_t>(seg) + 1] - cum[static_cast<size_t>(seg)];
  const double u = len > 0.0 ? (s - cum[static_cast<size_t>(seg)]) / len : 0.0;
  return canonicalize(atlas, {f.chart, lerp(f.a, f.b, u)});
}

double trajectory_hausdorff(const ChartAtlas& atlas, const PolyPath& a, const PolyPath& b,
                            int samples_per_segment) {
  const PExponent p2 = PExponent::finite(2);
  auto point_seg = [](const Vec& q, const Vec& u, const Vec& v) {
    Vec d = v - u;
    double den = 0.0, num = 0.0;
    for (int i = 0; i < d.dim(); ++i) {
      den += d[i] * d[i];
      num += (q[i] - u[i]) * d[i];
    }
    double s = den > 0.0 ? std::min(std::max(num / den, 0.0), 1.0) : 0.0;
    return lp_dist(q, lerp(u, v, s), PExponent::finite(2));
  };
  auto directed = [&](const PolyPath& from, const PolyPath& to) {
    double worst = 0.0;
    auto visit = [&](const SpacePoint& q) {
      double best = std::numeric_limits<double>::infinity();
      auto reps = orbit(atlas, q);
      if (to.single_point()) {
        for (const SpacePoint& r : reps) {
          auto rep = chart_rep(atlas, to.breakpoints.front(), r.chart);
          if (rep) best = std::min(best, lp_dist(r.coords, *rep, p2));
        }
      }
      for (int i = 0; i < to.segments(); ++i) {
        SegmentFrame f = segment_frame(atlas, to, i);
        for (const SpacePoint& r : reps)
          if (r.chart == f.chart) best = std::min(best, point_seg(r.coords, f.a, f.b));
      }
      if (!std::isfinite(best)) {
        // No chart shared with any segment: fall back to breakpoint distances.
        const PExponent fp = atlas.declares(p2) ? p2 : atlas.declared_p.front();
        for (const SpacePoint& bp : to.breakpoints)
          best = std::min(best, distance(atlas, q, bp, fp));
      }
      worst = std::max(worst, best);
    };
    if (from.single_point()) {
      visit(from.breakpoints.front());
      return worst;
    }
    for (int i = 0; i < from.segments(); ++i) {
      SegmentFrame f = segment_frame(atlas, from, i);
      for (int k = 0; k <= samples_per_segment; ++k)
        visit({f.chart, lerp(f.a, f.b, static_cast<double>(k) / samples_per_segment)});
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

// ------------------------------------------------------------------ queries

double distance(const ChartAtlas& atlas, const SpacePoint& x, const SpacePoint& y, PExponent p,
                const EngineOptions& opts) {
  if (!atlas.declares(p)) throw MalformedInput("space does not carry p=" + p.str());
  if (atlas.product && !opts.force_generic) {
    FactorPoints fx = split_product_point(atlas, x), fy = split_product_point(atlas, y);
    const double dl = distance(*atlas.product->left, fx.xl, fy.xl, p, opts);
    const double dr = distance(*atlas.product->right, fx.xr, fy.xr, p, opts);
    return lp_norm(Vec{dl, dr}, p);
  }
  SpacePoint cx = canonicalize(atlas, x), cy = canonicalize(atlas, y);
  if (canonical_equal(cx, cy)) return 0.0;
  return ordered_best_route(atlas, cx, cy, p, opts, /*need_path=*/false).route.solution.value;
}

PolyPath optimal_path(const ChartAtlas& atlas, const SpacePoint& x, const SpacePoint& y,
                      PExponent p, const EngineOptions& opts) {
  if (!atlas.declares(p)) throw MalformedInput("space does not carry p=" + p.str());
  SpacePoint cx = canonicalize(atlas, x), cy = canonicalize(atlas, y);
  if (canonical_equal(cx, cy)) return PolyPath{{cx}, {}};
  if (atlas.product && !opts.force_generic) return geodesic(atlas, x, y, p, opts);
  OrderedRoute os = ordered_best_route(atlas, cx, cy, p, opts);
  PolyPath path = route_to_path(atlas, os.route);
  return os.flip ? reverse_path(path) : path;
}

namespace {

PolyPath product_geodesic(const ChartAtlas& atlas, const SpacePoint& x, const SpacePoint& y,
                          PExponent p, const EngineOptions& opts) {
  FactorPoints fx = split_product_point(atlas, x), fy = split_product_point(atlas, y);
  const ChartAtlas& L = *atlas.product->left;
  const ChartAtlas& R = *atlas.product->right;
  PolyPath pl = geodesic(L, fx.xl, fy.xl, p, opts);
  PolyPath pr = geodesic(R, fx.xr, fy.xr, p, opts);
  const double ll = path_length(L, pl, p), lr = path_length(R, pr, p);
  if (ll == 0.0 && lr == 0.0) return PolyPath{{canonicalize(atlas, x)}, {}};

  std::vector<double> ts{0.0, 1.0};
  auto add_breaks = [&ts](const ChartAtlas& f, const PolyPath& path, PExponent q, double total) {
    if (total <= 0.0) return;
    double cum = 0.0;
    for (int i = 0; i + 1 < path.segments(); ++i) {
      SegmentFrame fr = segment_frame(f, path, i);
      cum += lp_dist(fr.a, fr.b, q);
      ts.push_back(cum / total);
    }
  };
  add_breaks(L, pl, p, ll);
  add_breaks(R, pr, p, lr);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(), [](double a, double b) { return std::fabs(a - b) < 1e-13; }),
           ts.end());

  auto factor_chart_at = [](const ChartAtlas& f, const PolyPath& path, PExponent q, double tmid) {
    if (path.single_point()) return path.breakpoints.front().chart;
    double total = path_length(f, path, q);
    double s = tmid * total, cum = 0.0;
    for (int i = 0; i < path.segments(); ++i) {
      SegmentFrame fr = segment_frame(f, path, i);
      cum += lp_dist(fr.a, fr.b, q);
      if (s <= cum + 1e-15 || i + 1 == path.segments()) return fr.chart;
    }
    return f.chart_index(path.chart_seq.back());
  };

  PolyPath out;
  for (size_t k = 0; k < ts.size(); ++k) {
    SpacePoint lpt = path_eval(L, pl, p, ts[k]);
    SpacePoint rpt = path_eval(R, pr, p, ts[k]);
    if (k + 1 < ts.size()) {
      const double tmid = 0.5 * (ts[k] + ts[k + 1]);
      int cl = factor_chart_at(L, pl, p, tmid);
      int cr = factor_chart_at(R, pr, p, tmid);
      auto lrep = chart_rep(L, lpt, cl);
      auto rrep = chart_rep(R, rpt, cr);
      if (!lrep || !rrep) throw NonConvergence("product geodesic lost a factor chart");
      out.breakpoints.push_back(
          canonicalize(atlas, join_product_point(atlas, {cl, *lrep}, {cr, *rrep})));
      out.chart_seq.push_back(atlas.chart(cl * atlas.product->right_chart_count + cr).id);
    } else {
      out.breakpoints.push_back(canonicalize(atlas, join_product_point(atlas, lpt, rpt)));
    }
  }
  return out;
}

}  // namespace

PolyPath geodesic(const ChartAtlas& atlas, const SpacePoint& x, const SpacePoint& y, PExponent p,
                  const EngineOptions& opts) {
  if (!atlas.declares(p)) throw MalformedInput("space does not carry p=" + p.str());
  SpacePoint cx = canonicalize(atlas, x), cy = canonicalize(atlas, y);
  if (canonical_equal(cx, cy)) return PolyPath{{cx}, {}};
  PolyPath path;
  double dist_p;
  if (atlas.product && !opts.force_generic) {
    path = product_geodesic(atlas, x, y, p, opts);
    dist_p = distance(atlas, x, y, p, opts);
  } else {
    // Canonical trajectory shape: the ℓ² optimum when the space carries ℓ²,
    // otherwise the space's own tie-broken optimum.
    const PExponent shape_p =
        atlas.declares(PExponent::finite(2)) ? PExponent::finite(2) : p;
    if (shape_p == p) {
      OrderedRoute os = ordered_best_route(atlas, cx, cy, p, opts);
      path = route_to_path(atlas, os.route);
      if (os.flip) path = reverse_path(path);
      dist_p = os.route.solution.value;
    } else {
      path = optimal_path(atlas, x, y, shape_p, opts);
      dist_p = distance(atlas, x, y, p, opts);
    }
  }
  // Two-sided: a length above the distance means the trajectory is not a
  // geodesic, a length below it means the distance solve stalled high.
  const double len_p = path_length(atlas, path, p);
  if (std::fabs(len_p - dist_p) > opts.tol * (1.0 + dist_p))
    throw CertificateFailure("canonical trajectory length does not certify d_" + p.str() +
                             ": length " + std::to_string(len_p) + " vs distance " +
                             std::to_string(dist_p));
  return path;
}

// ------------------------------------------------------------------ handles

std::string method_name(BicombingMethod m) {
  switch (m) {
    case BicombingMethod::canonical:
      return "cat0-trajectory";
    case BicombingMethod::direct_lp:
      return "direct-lp";
    case BicombingMethod::reversibilized:
      return "midpoint-reversibilized";
    default:
      return "custom";
  }
}

BicombingHandle make_bicombing(AtlasPtr space, PExponent p, BicombingMethod method,
                               const EngineOptions& opts) {
  if (!space) throw MalformedInput("bicombing needs a built space");
  BicombingHandle h;
  h.space = std::move(space);
  h.p = p;
  h.method = method;
  h.opts = opts;
  const AtlasPtr atlas = h.space;
  if (method == BicombingMethod::canonical) {
    h.path_fn = [atlas, p, opts](const SpacePoint& x, const SpacePoint& y) {
      return geodesic(*atlas, x, y, p, opts);
    };
  } else if (method == BicombingMethod::direct_lp) {
    h.path_fn = [atlas, p, opts](const SpacePoint& x, const SpacePoint& y) {
      return optimal_path(*atlas, x, y, p, opts);
    };
  } else {
    throw MalformedInput("reversibilized handles are built by reversibilize()");
  }
  PExponent hp = h.p;
  auto path_fn = h.path_fn;
  h.eval_fn = [atlas, hp, path_fn](const SpacePoint& x, const SpacePoint& y, double t) {
    return path_eval(*atlas, path_fn(x, y), hp, t);
  };
  return h;
}

SpacePoint sigma_eval(const BicombingHandle& handle, const SpacePoint& x, const SpacePoint& y,
                      double t) {
  if (t < 0.0 || t > 1.0) throw MalformedInput("bicombing parameter must lie in [0,1]");
  return handle.eval_fn(x, y, t);
}

SpacePoint midpoint(const BicombingHandle& handle, const SpacePoint& x, const SpacePoint& y,
                    double tol, MidpointTrace* trace, int max_iter) {
  SpacePoint xn = canonicalize(*handle.space, x), yn = canonicalize(*handle.space, y);
  for (int it = 0; it < max_iter; ++it) {
    const double gap = distance(*handle.space, xn, yn, handle.p, handle.opts);
    if (trace) trace->gaps.push_back(gap);
    if (gap < tol) return canonicalize(*handle.space, xn);
    SpacePoint nx = handle.eval_fn(xn, yn, 0.5);
    SpacePoint ny = handle.eval_fn(yn, xn, 0.5);
    xn = nx;
    yn = ny;
  }
  throw NonConvergence("midpoint iteration failed to contract below " + std::to_string(tol));
}

BicombingHandle reversibilize(const BicombingHandle& handle, double tol) {
  BicombingHandle out;
  out.space = handle.space;
  out.p = handle.p;
  out.method = BicombingMethod::reversibilized;
  out.opts = handle.opts;
  BicombingHandle inner = handle;
  out.eval_fn = [inner, tol](const SpacePoint& x, const SpacePoint& y, double t) {
    SpacePoint a = inner.eval_fn(x, y, t);
    SpacePoint b = inner.eval_fn(y, x, 1.0 - t);
    return midpoint(inner, a, b, tol);
  };
  return out;
}

LocalCheckResult local_geodesic_check(const ChartAtlas& atlas, const PolyPath& path, PExponent p,
                                      double eps, const EngineOptions& opts) {
  if (eps <= 0.0) throw MalformedInput("window width must be positive");
  LocalCheckResult res;
  const double total = path_length(atlas, path, p);
  if (total == 0.0) return res;
  // Window must not span more than one breakpoint.
  double min_spacing = total;
  {
    double cum = 0.0;
    for (int i = 0; i < path.segments(); ++i) {
      SegmentFrame f = segment_frame(atlas, path, i);
      double len = lp_dist(f.a, f.b, p);
      min_spacing = std::min(min_spacing, len);
      cum += len;
    }
  }
  if (eps >= 0.5 * min_spacing)
    throw MalformedInput("window width must be smaller than half the breakpoint spacing");
  const double frac = eps / total;
  for (double s = 0.0; s < 1.0; s += 0.5 * frac) {
    const double t = std::min(s + frac, 1.0);
    SpacePoint ps = path_eval(atlas, path, p, s);
    SpacePoint pt = path_eval(atlas, path, p, t);
    const double sub = (t - s) * total;
    const double gap = sub - distance(atlas, ps, pt, p, opts);
    if (gap > res.worst_gap) {
      res.worst_gap = gap;
      res.s = s;
      res.t = t;
    }
    if (t >= 1.0) break;
  }
  res.ok = res.worst_gap <= opts.tol * (1.0 + total);
  return res;
}

}  // namespace bicomb
