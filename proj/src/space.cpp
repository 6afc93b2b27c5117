#include "bicomb/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace bicomb {

Vec Locus::at(const std::vector<double>& t) const { return at(t.data(), static_cast<int>(t.size())); }

Vec Locus::at(const double* t, int n) const {
  Vec r = base;
  for (int i = 0; i < n; ++i) r = r + dirs[static_cast<size_t>(i)] * t[i];
  return r;
}

std::vector<double> Locus::project(const Vec& u, bool clamp) const {
  const int k = nparams();
  std::vector<double> t(static_cast<size_t>(k), 0.0);
  if (k == 0) return t;
  // Normal equations G t = D^T (u - base), tiny dense solve.
  double G[kMaxDim][kMaxDim] = {};
  double rhs[kMaxDim] = {};
  Vec w = u - base;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int c = 0; c < base.dim(); ++c) s += dirs[i][c] * dirs[j][c];
      G[i][j] = s;
    }
    double s = 0.0;
    for (int c = 0; c < base.dim(); ++c) s += dirs[i][c] * w[c];
    rhs[i] = s;
  }
  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int r = col + 1; r < k; ++r)
      if (std::fabs(G[r][col]) > std::fabs(G[piv][col])) piv = r;
    std::swap(G[piv], G[col]);
    std::swap(rhs[piv], rhs[col]);
    if (std::fabs(G[col][col]) < 1e-14) throw MalformedInput("degenerate gluing locus directions");
    for (int r = col + 1; r < k; ++r) {
      double f = G[r][col] / G[col][col];
      for (int c = col; c < k; ++c) G[r][c] -= f * G[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int r = k - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int c = r + 1; c < k; ++c) s -= G[r][c] * t[static_cast<size_t>(c)];
    t[static_cast<size_t>(r)] = s / G[r][r];
  }
  if (clamp)
    for (int i = 0; i < k; ++i)
      t[static_cast<size_t>(i)] = std::min(std::max(t[static_cast<size_t>(i)], plo[static_cast<size_t>(i)]),
                                           phi[static_cast<size_t>(i)]);
  return t;
}

int ChartAtlas::chart_index(const std::string& id) const {
  for (size_t i = 0; i < charts.size(); ++i)
    if (charts[i].id == id) return static_cast<int>(i);
  return -1;
}

bool ChartAtlas::declares(PExponent p) const {
  for (const auto& q : declared_p)
    if (q == p) return true;
  return false;
}

namespace {

double coord_scale(const Vec& u) {
  double m = 1.0;
  for (int i = 0; i < u.dim(); ++i) m = std::max(m, std::fabs(u[i]));
  return m;
}

// Deterministic parameter samples inside the (possibly unbounded) param box.
std::vector<std::vector<double>> locus_param_samples(const Locus& L) {
  const int k = L.nparams();
  std::vector<std::vector<double>> out;
  if (k == 0) {
    out.push_back({});
    return out;
  }
  std::vector<std::pair<double, double>> win(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    double lo = L.plo[static_cast<size_t>(i)], hi = L.phi[static_cast<size_t>(i)];
    if (!std::isfinite(lo)) lo = -3.0;
    if (!std::isfinite(hi)) hi = 3.0;
    win[static_cast<size_t>(i)] = {lo, hi};
  }
  uint64_t s = 0x9e3779b97f4a7c15ull;
  auto next01 = [&s]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 11) * 0x1.0p-53;
  };
  for (int n = 0; n < 10; ++n) {
    std::vector<double> t(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
      auto [lo, hi] = win[static_cast<size_t>(i)];
      double f = (n == 0) ? 0.0 : (n == 1) ? 1.0 : (n == 2) ? 0.5 : next01();
      t[static_cast<size_t>(i)] = lo + f * (hi - lo);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

void validate_atlas(const ChartAtlas& atlas) {
  if (atlas.charts.empty()) throw MalformedInput("atlas has no charts");
  for (size_t i = 0; i < atlas.charts.size(); ++i) {
    const Chart& c = atlas.charts[i];
    if (c.id.empty() || c.id.find_first_of(": ,\t\n") != std::string::npos)
      throw MalformedInput("chart id invalid: '" + c.id + "'");
    for (size_t j = 0; j < i; ++j)
      if (atlas.charts[j].id == c.id) throw MalformedInput("duplicate chart id: " + c.id);
    if (c.dim < 1 || c.dim > kMaxDim) throw MalformedInput("chart dim out of range: " + c.id);
    for (int d = 0; d < c.dim; ++d)
      if (!(c.lo[static_cast<size_t>(d)] < c.hi[static_cast<size_t>(d)]))
        throw MalformedInput("chart bounds empty in coordinate " + std::to_string(d) + ": " + c.id);
    if (c.kind == "plane") {
      if (c.dim != 2 || c.bounded(0) || c.bounded(1))
        throw MalformedInput("plane chart must be unbounded 2-dimensional: " + c.id);
    } else if (c.kind == "interval") {
      if (c.dim != 1 || c.lo[0] != 0.0 || c.hi[0] != 1.0)
        throw MalformedInput("interval chart must be [0,1]: " + c.id);
    } else if (c.kind == "box") {
      for (int d = 0; d < c.dim; ++d)
        if (!c.bounded(d)) throw MalformedInput("box chart must have finite bounds: " + c.id);
    }
  }
  if (atlas.declared_p.empty()) throw MalformedInput("atlas declares no p exponents");

  for (const Gluing& g : atlas.gluings) {
    auto bad = [&g](const std::string& why) { throw InvalidGluing("gluing " + g.name + ": " + why); };
    if (g.chart_a < 0 || g.chart_a >= static_cast<int>(atlas.charts.size()) || g.chart_b < 0 ||
        g.chart_b >= static_cast<int>(atlas.charts.size()))
      bad("references missing chart");
    const int k = g.locus_a.nparams();
    if (g.locus_b.nparams() != k) bad("sides have different parameter counts");
    for (int i = 0; i < k; ++i) {
      if (g.locus_a.plo[static_cast<size_t>(i)] != g.locus_b.plo[static_cast<size_t>(i)] ||
          g.locus_a.phi[static_cast<size_t>(i)] != g.locus_b.phi[static_cast<size_t>(i)])
        bad("parameter boxes differ between sides");
      if (!(g.locus_a.plo[static_cast<size_t>(i)] < g.locus_a.phi[static_cast<size_t>(i)]))
        bad("empty parameter box");
      if (lp_norm(g.locus_a.dirs[static_cast<size_t>(i)], PExponent::finite(2)) < 1e-14 ||
          lp_norm(g.locus_b.dirs[static_cast<size_t>(i)], PExponent::finite(2)) < 1e-14)
        bad("zero direction vector");
    }
    if (g.locus_a.base.dim() != atlas.chart(g.chart_a).dim ||
        g.locus_b.base.dim() != atlas.chart(g.chart_b).dim)
      bad("locus dimension does not match chart");

    const auto samples = locus_param_samples(g.locus_a);
    for (const auto& t : samples) {
      Vec pa = g.locus_a.at(t), pb = g.locus_b.at(t);
      if (!atlas.chart(g.chart_a).contains(pa, 1e-9)) bad("locus leaves chart " + atlas.chart(g.chart_a).id);
      if (!atlas.chart(g.chart_b).contains(pb, 1e-9)) bad("locus leaves chart " + atlas.chart(g.chart_b).id);
    }
    for (const PExponent& p : atlas.declared_p) {
      for (size_t i = 0; i < samples.size(); ++i) {
        for (size_t j = i + 1; j < samples.size(); ++j) {
          double da = lp_dist(g.locus_a.at(samples[i]), g.locus_a.at(samples[j]), p);
          double db = lp_dist(g.locus_b.at(samples[i]), g.locus_b.at(samples[j]), p);
          if (std::fabs(da - db) > 1e-12 * (1.0 + da))
            bad("not isometric for p=" + p.str());
        }
      }
    }
  }
}

void finalize_atlas(ChartAtlas& atlas) {
  atlas.chart_gluings.assign(atlas.charts.size(), {});
  for (size_t gi = 0; gi < atlas.gluings.size(); ++gi) {
    const Gluing& g = atlas.gluings[gi];
    if (g.chart_a >= 0 && g.chart_a < static_cast<int>(atlas.charts.size()))
      atlas.chart_gluings[static_cast<size_t>(g.chart_a)].push_back(static_cast<int>(gi));
    if (g.chart_b >= 0 && g.chart_b < static_cast<int>(atlas.charts.size()) && g.chart_b != g.chart_a)
      atlas.chart_gluings[static_cast<size_t>(g.chart_b)].push_back(static_cast<int>(gi));
  }
  validate_atlas(atlas);
}

namespace {

// If u lies on the given side's locus (residual ≤ tol·scale), return the mapped
// point on the other side.
std::optional<SpacePoint> cross(const Gluing& g, bool from_a, const Vec& u, double tol) {
  const Locus& src = from_a ? g.locus_a : g.locus_b;
  const Locus& dst = from_a ? g.locus_b : g.locus_a;
  std::vector<double> t = src.project(u);
  Vec foot = src.at(t);
  if (lp_dist(u, foot, PExponent::finite(2)) > tol * coord_scale(u)) return std::nullopt;
  SpacePoint out;
  out.chart = from_a ? g.chart_b : g.chart_a;
  out.coords = dst.at(t);
  return out;
}

bool same_rep(const SpacePoint& a, const SpacePoint& b, double tol) {
  if (a.chart != b.chart) return false;
  for (int i = 0; i < a.coords.dim(); ++i)
    if (std::fabs(a.coords[i] - b.coords[i]) > tol) return false;
  return true;
}

bool rep_less(const SpacePoint& a, const SpacePoint& b) {
  if (a.chart != b.chart) return a.chart < b.chart;
  for (int i = 0; i < a.coords.dim(); ++i) {
    if (a.coords[i] < b.coords[i]) return true;
    if (a.coords[i] > b.coords[i]) return false;
  }
  return false;
}

}  // namespace

std::vector<SpacePoint> orbit(const ChartAtlas& atlas, const SpacePoint& x, double tol) {
  if (x.chart < 0 || x.chart >= static_cast<int>(atlas.charts.size()))
    throw MalformedInput("point references missing chart");
  if (!atlas.chart(x.chart).contains(x.coords, 1e-7))
    throw MalformedInput("point outside chart " + atlas.chart(x.chart).id + ": " +
                         point_str(atlas, x));
  std::vector<SpacePoint> reps{x};
  const double dedup = std::max(tol, 1e-11);
  for (size_t head = 0; head < reps.size() && reps.size() < 64; ++head) {
    SpacePoint cur = reps[head];
    for (int gi : atlas.chart_gluings[static_cast<size_t>(cur.chart)]) {
      const Gluing& g = atlas.gluings[static_cast<size_t>(gi)];
      for (bool from_a : {true, false}) {
        if ((from_a ? g.chart_a : g.chart_b) != cur.chart) continue;
        auto mapped = cross(g, from_a, cur.coords, tol);
        if (!mapped) continue;
        bool known = false;
        for (const auto& r : reps)
          if (same_rep(r, *mapped, dedup * coord_scale(mapped->coords))) {
            known = true;
            break;
          }
        if (!known) reps.push_back(*mapped);
      }
    }
  }
  std::sort(reps.begin(), reps.end(), rep_less);
  return reps;
}

SpacePoint canonicalize(const ChartAtlas& atlas, const SpacePoint& x) {
  const double scale = coord_scale(x.coords);
  auto reps = orbit(atlas, x, 1e-12 * std::max(1.0, scale));
  return reps.front();
}

std::optional<Vec> chart_rep(const ChartAtlas& atlas, const SpacePoint& x, int chart, double tol) {
  for (const auto& r : orbit(atlas, x, tol))
    if (r.chart == chart) return r.coords;
  return std::nullopt;
}

bool points_equal(const ChartAtlas& atlas, const SpacePoint& a, const SpacePoint& b, double tol) {
  SpacePoint ca = canonicalize(atlas, a), cb = canonicalize(atlas, b);
  if (ca.chart != cb.chart) return false;
  double scale = std::max(coord_scale(ca.coords), coord_scale(cb.coords));
  return same_rep(ca, cb, tol * scale);
}

double gluing_path_length(const ChartAtlas& atlas, const std::vector<SpacePoint>& pts,
                          const std::vector<std::string>& chart_seq, PExponent p) {
  if (pts.empty()) throw MalformedInput("gluing path needs at least one point");
  if (chart_seq.size() + 1 != pts.size())
    throw MalformedInput("gluing path needs one chart per consecutive point pair");
  double total = 0.0;
  for (size_t j = 0; j + 1 < pts.size(); ++j) {
    int c = atlas.chart_index(chart_seq[j]);
    if (c < 0) throw MalformedInput("unknown chart in gluing path: " + chart_seq[j]);
    auto ua = chart_rep(atlas, pts[j], c);
    auto ub = chart_rep(atlas, pts[j + 1], c);
    if (!ua || !ub)
      throw MalformedInput("gluing path points " + std::to_string(j) + "," + std::to_string(j + 1) +
                           " are not co-resident in chart " + chart_seq[j]);
    total += lp_dist(*ua, *ub, p);
  }
  return total;
}

std::string point_str(const ChartAtlas& atlas, const SpacePoint& x) {
  std::string s = (x.chart >= 0 && x.chart < static_cast<int>(atlas.charts.size()))
                      ? atlas.chart(x.chart).id
                      : "?";
  s += ":";
  char buf[40];
  for (int i = 0; i < x.coords.dim(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g", x.coords[i]);
    if (i) s += ",";
    s += buf;
  }
  return s;
}

}  // namespace bicomb
