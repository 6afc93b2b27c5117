#include "bicomb/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bicomb/errors.hpp"

namespace bicomb {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAlign = 1e-9;

using Key = std::int64_t;
using IK = std::array<Key, kMaxDim>;

struct ChartWindow {
  IK klo{}, khi{};
  // Face lies strictly inside the chart, i.e. the window (not the space)
  // truncates the lattice there.
  std::array<bool, kMaxDim> cut_lo{}, cut_hi{};
  Key offset = 0;
  Key count = 0;  // 0 = window empty
};

struct Box {
  std::array<double, kMaxDim> lo{}, hi{};
};

// One lattice level: a window per chart, flat node ids, king-move edges
// implicit, crossing edges along gluing loci stored per node.
struct Grid {
  const ChartAtlas* atlas = nullptr;
  PExponent p;
  double h = 0;
  std::vector<ChartWindow> win;
  std::vector<Key> starts;
  Key total = 0;
  std::unordered_map<Key, std::vector<std::pair<Key, double>>> cross;
  std::array<std::vector<std::pair<IK, double>>, kMaxDim + 1> offs;

  // Corridor restriction, empty = unrestricted: a node is admissible when its
  // cell on the coarse level is marked.
  const Grid* coarse_ref = nullptr;
  std::vector<std::uint8_t> marked;
  double ratio = 1.0;  // h / coarse h

  int dim_of(int c) const { return atlas->chart(c).dim; }

  bool in_window(int c, const IK& k) const {
    const ChartWindow& w = win[static_cast<size_t>(c)];
    if (!w.count) return false;
    for (int i = 0; i < dim_of(c); ++i)
      if (k[i] < w.klo[i] || k[i] > w.khi[i]) return false;
    return true;
  }

  Key node_id(int c, const IK& k) const {
    const ChartWindow& w = win[static_cast<size_t>(c)];
    Key id = 0;
    for (int i = 0; i < dim_of(c); ++i)
      id = id * (w.khi[i] - w.klo[i] + 1) + (k[i] - w.klo[i]);
    return w.offset + id;
  }

  void decode(Key id, int& c, IK& k) const {
    c = static_cast<int>(std::upper_bound(starts.begin(), starts.end(), id) - starts.begin()) - 1;
    const ChartWindow& w = win[static_cast<size_t>(c)];
    Key r = id - w.offset;
    for (int i = dim_of(c) - 1; i >= 0; --i) {
      Key radix = w.khi[i] - w.klo[i] + 1;
      k[i] = w.klo[i] + r % radix;
      r /= radix;
    }
  }

  Vec coords(int c, const IK& k) const {
    Vec u(dim_of(c));
    for (int i = 0; i < u.dim(); ++i) u[i] = static_cast<double>(k[i]) * h;
    return u;
  }

  bool admissible(int c, const IK& k) const {
    if (marked.empty()) return true;
    const ChartWindow& cw = coarse_ref->win[static_cast<size_t>(c)];
    if (!cw.count) return false;
    IK kc{};
    for (int i = 0; i < dim_of(c); ++i) {
      kc[i] = std::llround(static_cast<double>(k[i]) * ratio);
      kc[i] = std::clamp(kc[i], cw.klo[i], cw.khi[i]);
    }
    return marked[static_cast<size_t>(coarse_ref->node_id(c, kc))] != 0;
  }
};

void add_crossings(Grid& g, const Gluing& gl) {
  const ChartWindow& wa = g.win[static_cast<size_t>(gl.chart_a)];
  const ChartWindow& wb = g.win[static_cast<size_t>(gl.chart_b)];
  if (!wa.count || !wb.count) return;
  const int np = gl.locus_a.nparams();

  std::vector<double> tlo(static_cast<size_t>(np)), thi(static_cast<size_t>(np));
  for (int j = 0; j < np; ++j) {
    tlo[static_cast<size_t>(j)] = gl.locus_a.plo[static_cast<size_t>(j)];
    thi[static_cast<size_t>(j)] = gl.locus_a.phi[static_cast<size_t>(j)];
  }

  // Clip the parameter box so the locus stays inside one side's window.
  // Each axis may be driven by at most one parameter, which holds for the
  // line/face/vertex loci the builders produce.
  auto clip = [&](const Locus& L, int chart, const ChartWindow& w) -> bool {
    for (int i = 0; i < g.dim_of(chart); ++i) {
      int owner = -1;
      for (int j = 0; j < np; ++j) {
        if (std::abs(L.dirs[static_cast<size_t>(j)][i]) > kAlign) {
          if (owner >= 0)
            throw MalformedInput("grid oracle requires axis-disjoint locus parameters");
          owner = j;
        }
      }
      const double lo = static_cast<double>(w.klo[i]) * g.h;
      const double hi = static_cast<double>(w.khi[i]) * g.h;
      if (owner < 0) {
        if (L.base[i] < lo - 0.76 * g.h || L.base[i] > hi + 0.76 * g.h) return false;
        continue;
      }
      const double d = L.dirs[static_cast<size_t>(owner)][i];
      const double slop = 0.51 * g.h / std::abs(d);
      double a = (lo - L.base[i]) / d;
      double b = (hi - L.base[i]) / d;
      if (a > b) std::swap(a, b);
      auto& jlo = tlo[static_cast<size_t>(owner)];
      auto& jhi = thi[static_cast<size_t>(owner)];
      jlo = std::max(jlo, a - slop);
      jhi = std::min(jhi, b + slop);
      if (jlo > jhi) return false;
    }
    return true;
  };
  if (!clip(gl.locus_a, gl.chart_a, wa)) return;
  if (!clip(gl.locus_b, gl.chart_b, wb)) return;

  // Nearest-window-node anchor for a point on one side of the gluing; the
  // residual becomes part of the crossing weight, so off-lattice loci cost
  // their true detour instead of being snapped for free.
  auto anchor = [&](int chart, const Vec& pt, Key& id, double& cost) -> bool {
    IK k{};
    for (int i = 0; i < g.dim_of(chart); ++i) {
      k[i] = std::llround(pt[i] / g.h);
      const ChartWindow& w = g.win[static_cast<size_t>(chart)];
      k[i] = std::clamp(k[i], w.klo[i], w.khi[i]);
      if (std::abs(static_cast<double>(k[i]) * g.h - pt[i]) > 0.76 * g.h) return false;
    }
    if (!g.in_window(chart, k)) return false;
    id = g.node_id(chart, k);
    cost = lp_dist(pt, g.coords(chart, k), g.p);
    return true;
  };

  std::vector<Key> jlo(static_cast<size_t>(np)), jhi(static_cast<size_t>(np)),
      cur(static_cast<size_t>(np));
  for (int j = 0; j < np; ++j) {
    jlo[static_cast<size_t>(j)] = static_cast<Key>(std::ceil(tlo[static_cast<size_t>(j)] / g.h - kAlign));
    jhi[static_cast<size_t>(j)] = static_cast<Key>(std::floor(thi[static_cast<size_t>(j)] / g.h + kAlign));
    if (jlo[static_cast<size_t>(j)] > jhi[static_cast<size_t>(j)]) return;
  }
  cur = jlo;

  std::vector<double> t(static_cast<size_t>(np));
  while (true) {
    for (int j = 0; j < np; ++j) t[static_cast<size_t>(j)] = static_cast<double>(cur[static_cast<size_t>(j)]) * g.h;
    const Vec pa = gl.locus_a.at(t);
    const Vec pb = gl.locus_b.at(t);
    Key ida = 0, idb = 0;
    double ca = 0, cb = 0;
    if (anchor(gl.chart_a, pa, ida, ca) && anchor(gl.chart_b, pb, idb, cb) && ida != idb) {
      g.cross[ida].emplace_back(idb, ca + cb);
      g.cross[idb].emplace_back(ida, ca + cb);
    }
    int j = 0;
    for (; j < np; ++j) {
      if (++cur[static_cast<size_t>(j)] <= jhi[static_cast<size_t>(j)]) break;
      cur[static_cast<size_t>(j)] = jlo[static_cast<size_t>(j)];
    }
    if (j == np) break;
  }
}

Grid build_grid(const ChartAtlas& atlas, PExponent p, double h, const std::vector<Box>& boxes,
                Key budget) {
  Grid g;
  g.atlas = &atlas;
  g.p = p;
  g.h = h;
  g.win.resize(atlas.charts.size());
  g.starts.resize(atlas.charts.size());
  for (size_t c = 0; c < atlas.charts.size(); ++c) {
    const Chart& ch = atlas.charts[c];
    ChartWindow w;
    w.offset = g.total;
    Key count = 1;
    bool empty = false;
    for (int i = 0; i < ch.dim && !empty; ++i) {
      const double wlo = std::max(ch.lo[static_cast<size_t>(i)], boxes[c].lo[static_cast<size_t>(i)]);
      const double whi = std::min(ch.hi[static_cast<size_t>(i)], boxes[c].hi[static_cast<size_t>(i)]);
      if (!(wlo <= whi) || !std::isfinite(wlo) || !std::isfinite(whi)) {
        empty = true;
        break;
      }
      w.klo[i] = static_cast<Key>(std::ceil(wlo / h - kAlign));
      w.khi[i] = static_cast<Key>(std::floor(whi / h + kAlign));
      if (w.klo[i] > w.khi[i]) {
        empty = true;
        break;
      }
      w.cut_lo[i] = static_cast<double>(w.klo[i]) * h > ch.lo[static_cast<size_t>(i)] + kAlign;
      w.cut_hi[i] = static_cast<double>(w.khi[i]) * h < ch.hi[static_cast<size_t>(i)] - kAlign;
      count *= w.khi[i] - w.klo[i] + 1;
    }
    w.count = empty ? 0 : count;
    g.total += w.count;
    if (g.total > budget)
      throw WindowTooSmall("grid oracle lattice exceeds the node budget; raise the budget or "
                           "coarsen the resolution");
    g.starts[c] = w.offset;
    g.win[c] = w;
    if (!empty && g.offs[static_cast<size_t>(ch.dim)].empty()) {
      auto& tab = g.offs[static_cast<size_t>(ch.dim)];
      Key n3 = 1;
      for (int i = 0; i < ch.dim; ++i) n3 *= 3;
      for (Key e = 0; e < n3; ++e) {
        IK o{};
        Key r = e;
        Vec v(ch.dim);
        bool zero = true;
        for (int i = 0; i < ch.dim; ++i) {
          o[i] = r % 3 - 1;
          r /= 3;
          v[i] = static_cast<double>(o[i]);
          zero = zero && o[i] == 0;
        }
        if (!zero) tab.emplace_back(o, lp_norm(v, p));
      }
    }
  }
  for (const Gluing& gl : atlas.gluings) add_crossings(g, gl);
  return g;
}

// Weighted attachment of a space point to the surrounding lattice nodes of
// every chart it is resident in.
std::vector<std::pair<Key, double>> snap(const Grid& g, const std::vector<SpacePoint>& reps) {
  std::vector<std::pair<Key, double>> out;
  for (const SpacePoint& r : reps) {
    const ChartWindow& w = g.win[static_cast<size_t>(r.chart)];
    if (!w.count) continue;
    const int dim = g.dim_of(r.chart);
    IK base{};
    std::array<int, kMaxDim> span{};
    for (int i = 0; i < dim; ++i) {
      base[i] = static_cast<Key>(std::floor(r.coords[i] / g.h + kAlign));
      span[i] = std::abs(static_cast<double>(base[i]) * g.h - r.coords[i]) <= kAlign ? 1 : 2;
    }
    Key combos = 1;
    for (int i = 0; i < dim; ++i) combos *= span[i];
    for (Key e = 0; e < combos; ++e) {
      IK k{};
      Key r2 = e;
      for (int i = 0; i < dim; ++i) {
        k[i] = base[i] + r2 % span[i];
        r2 /= span[i];
      }
      if (!g.in_window(r.chart, k) || !g.admissible(r.chart, k)) continue;
      out.emplace_back(g.node_id(r.chart, k), lp_dist(r.coords, g.coords(r.chart, k), g.p));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](const auto& a, const auto& b) { return a.first == b.first; }),
            out.end());
  return out;
}

// Plain Dijkstra; with targets it stops once no target can improve, without
// them it settles the whole reachable window (used to field the corridor
// potentials). Returns the best source-to-target value, inf when untargeted.
double dijkstra(const Grid& g, const std::vector<std::pair<Key, double>>& sources,
                const std::vector<std::pair<Key, double>>& targets,
                std::vector<double>* dist_out) {
  std::vector<double> dist(static_cast<size_t>(g.total), kInf);
  using QE = std::pair<double, Key>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> q;
  for (const auto& [id, w0] : sources) {
    if (w0 < dist[static_cast<size_t>(id)]) {
      dist[static_cast<size_t>(id)] = w0;
      q.emplace(w0, id);
    }
  }
  std::unordered_map<Key, double> tmin;
  for (const auto& [id, w0] : targets) {
    auto [it, fresh] = tmin.emplace(id, w0);
    if (!fresh) it->second = std::min(it->second, w0);
  }
  double best = kInf;
  IK k{}, nk{};
  int c = 0;
  while (!q.empty()) {
    const auto [d, v] = q.top();
    q.pop();
    if (d != dist[static_cast<size_t>(v)]) continue;
    if (!tmin.empty() && d >= best) break;
    if (!tmin.empty()) {
      auto it = tmin.find(v);
      if (it != tmin.end()) best = std::min(best, d + it->second);
    }
    g.decode(v, c, k);
    const int dim = g.dim_of(c);
    for (const auto& [o, nrm] : g.offs[static_cast<size_t>(dim)]) {
      for (int i = 0; i < dim; ++i) nk[i] = k[i] + o[i];
      if (!g.in_window(c, nk) || !g.admissible(c, nk)) continue;
      const Key nid = g.node_id(c, nk);
      const double nd = d + g.h * nrm;
      if (nd < dist[static_cast<size_t>(nid)]) {
        dist[static_cast<size_t>(nid)] = nd;
        q.emplace(nd, nid);
      }
    }
    auto it = g.cross.find(v);
    if (it != g.cross.end()) {
      for (const auto& [u, wt] : it->second) {
        const double nd = d + wt;
        if (nd < dist[static_cast<size_t>(u)]) {
          int uc = 0;
          IK uk{};
          g.decode(u, uc, uk);
          if (!g.admissible(uc, uk)) continue;
          dist[static_cast<size_t>(u)] = nd;
          q.emplace(nd, u);
        }
      }
    }
  }
  if (dist_out) *dist_out = std::move(dist);
  return best;
}

double answer_from(const std::vector<double>& dist, const std::vector<std::pair<Key, double>>& targets) {
  double best = kInf;
  for (const auto& [id, w] : targets) best = std::min(best, dist[static_cast<size_t>(id)] + w);
  return best;
}

}  // namespace

double grid_oracle_distance(const ChartAtlas& atlas, const SpacePoint& x, const SpacePoint& y,
                            PExponent p, double resolution, const OracleOptions& opts) {
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw MalformedInput("grid oracle resolution must be positive and finite");
  for (const SpacePoint* pt : {&x, &y}) {
    if (pt->chart < 0 || pt->chart >= static_cast<int>(atlas.charts.size()) ||
        !atlas.chart(pt->chart).contains(pt->coords))
      throw MalformedInput("grid oracle endpoint lies outside its chart");
  }
  if (points_equal(atlas, x, y, 1e-12)) return 0.0;

  const std::vector<SpacePoint> rx = orbit(atlas, x);
  const std::vector<SpacePoint> ry = orbit(atlas, y);

  std::array<double, kMaxDim> blo{}, bhi{};
  blo.fill(kInf);
  bhi.fill(-kInf);
  for (const auto* reps : {&rx, &ry}) {
    for (const SpacePoint& r : *reps) {
      for (int i = 0; i < r.coords.dim(); ++i) {
        blo[static_cast<size_t>(i)] = std::min(blo[static_cast<size_t>(i)], r.coords[i]);
        bhi[static_cast<size_t>(i)] = std::max(bhi[static_cast<size_t>(i)], r.coords[i]);
      }
    }
  }
  for (int i = 0; i < kMaxDim; ++i) {
    if (blo[static_cast<size_t>(i)] > bhi[static_cast<size_t>(i)])
      blo[static_cast<size_t>(i)] = bhi[static_cast<size_t>(i)] = 0.0;
  }

  const double h = resolution;
  const double hc = std::max(resolution, opts.coarse_resolution);
  double pad = 2.0;

  for (int round = 0;; ++round) {
    std::vector<Box> boxes(atlas.charts.size());
    for (auto& b : boxes) {
      for (int i = 0; i < kMaxDim; ++i) {
        b.lo[static_cast<size_t>(i)] = blo[static_cast<size_t>(i)] - pad;
        b.hi[static_cast<size_t>(i)] = bhi[static_cast<size_t>(i)] + pad;
      }
    }
    const Grid gc = build_grid(atlas, p, hc, boxes, opts.node_budget);
    const auto sx = snap(gc, rx);
    const auto sy = snap(gc, ry);
    if (sx.empty() || sy.empty())
      throw WindowTooSmall("grid oracle window misses an endpoint");

    std::vector<double> dxv;
    dijkstra(gc, sx, {}, &dxv);
    double best = answer_from(dxv, sy);

    std::vector<double> fine_dist;
    double best_f = kInf;
    if (std::isfinite(best) && h < hc - 1e-15) {
      std::vector<double> dyv;
      dijkstra(gc, sy, {}, &dyv);
      const double slack = opts.slack_fraction * best + 8.0 * hc;
      std::vector<std::uint8_t> marked(static_cast<size_t>(gc.total), 0);
      std::vector<Box> fboxes(atlas.charts.size());
      for (auto& b : fboxes) {
        b.lo.fill(kInf);
        b.hi.fill(-kInf);
      }
      IK k{}, nk{};
      int c = 0;
      for (Key v = 0; v < gc.total; ++v) {
        const auto sv = static_cast<size_t>(v);
        if (dxv[sv] + dyv[sv] > best + slack) continue;
        gc.decode(v, c, k);
        const int dim = gc.dim_of(c);
        marked[sv] = 1;
        auto grow = [&](const IK& kk) {
          for (int i = 0; i < dim; ++i) {
            const double u = static_cast<double>(kk[i]) * hc;
            auto& b = fboxes[static_cast<size_t>(c)];
            b.lo[static_cast<size_t>(i)] = std::min(b.lo[static_cast<size_t>(i)], u - hc);
            b.hi[static_cast<size_t>(i)] = std::max(b.hi[static_cast<size_t>(i)], u + hc);
          }
        };
        grow(k);
        for (const auto& [o, nrm] : gc.offs[static_cast<size_t>(dim)]) {
          (void)nrm;
          for (int i = 0; i < dim; ++i) nk[i] = k[i] + o[i];
          if (!gc.in_window(c, nk)) continue;
          marked[static_cast<size_t>(gc.node_id(c, nk))] = 1;
          grow(nk);
        }
      }
      Grid gf = build_grid(atlas, p, h, fboxes, opts.node_budget);
      gf.coarse_ref = &gc;
      gf.marked = std::move(marked);
      gf.ratio = h / hc;
      const auto fsx = snap(gf, rx);
      const auto fsy = snap(gf, ry);
      best_f = dijkstra(gf, fsx, fsy, nullptr);
      if (!std::isfinite(best_f)) {
        gf.marked.clear();
        best_f = dijkstra(gf, snap(gf, rx), snap(gf, ry), nullptr);
      }
      if (std::isfinite(best_f)) best = std::min(best, best_f);
    } else if (std::isfinite(best) && h >= hc - 1e-15) {
      best_f = best;
    }

    double margin = kInf;
    for (const auto* reps : {&rx, &ry}) {
      for (const SpacePoint& r : *reps) {
        const ChartWindow& w = gc.win[static_cast<size_t>(r.chart)];
        if (!w.count) continue;
        for (int i = 0; i < r.coords.dim(); ++i) {
          if (w.cut_lo[i])
            margin = std::min(margin, r.coords[i] - static_cast<double>(w.klo[i]) * hc);
          if (w.cut_hi[i])
            margin = std::min(margin, static_cast<double>(w.khi[i]) * hc - r.coords[i]);
        }
      }
    }

    if (std::isfinite(best_f) && margin >= best / 2.0 - kAlign) return best_f;

    if (round >= opts.max_window_growth) {
      std::ostringstream msg;
      msg << "grid oracle window too small: endpoint margin " << margin
          << " is below half the best estimate " << best << " after " << round + 1
          << " growth rounds (pad " << pad << ")";
      throw WindowTooSmall(msg.str());
    }
    pad = std::isfinite(best) ? std::max(pad * 2.0, 0.75 * best) : pad * 2.0;
  }
}

}  // namespace bicomb
