#include "bicomb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <json.hpp>

#include "bicomb/errors.hpp"

namespace bicomb {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double dist(const BicombingHandle& h, const SpacePoint& a, const SpacePoint& b) {
  return distance(*h.space, a, b, h.p, h.opts);
}

// One sigma trajectory evaluated at many parameters; handles with a geodesic
// selection pay one path construction, pointwise-only handles one eval each.
std::vector<SpacePoint> eval_many(const BicombingHandle& h, const SpacePoint& x,
                                  const SpacePoint& y, const std::vector<double>& ts) {
  std::vector<SpacePoint> out;
  out.reserve(ts.size());
  if (h.path_fn) {
    const PolyPath path = h.path_fn(x, y);
    for (double t : ts) out.push_back(path_eval(*h.space, path, h.p, t));
  } else {
    for (double t : ts) out.push_back(h.eval_fn(x, y, t));
  }
  return out;
}

AxiomWitness draw_witness(Axiom a, Sampler& smp) {
  AxiomWitness w;
  w.x = smp.point();
  w.y = smp.point();
  if (a == Axiom::conical || a == Axiom::convex) {
    w.x2 = smp.point();
    w.y2 = smp.point();
  }
  if (a == Axiom::consistent || a == Axiom::convex) {
    double s = smp.unit(), t = smp.unit();
    if (s > t) std::swap(s, t);
    w.s = s;
    w.t = t;
  } else {
    w.t = smp.unit();
  }
  return w;
}

nlohmann::json point_json(const ChartAtlas& atlas, const SpacePoint& pt) {
  if (pt.chart < 0) return nullptr;
  nlohmann::json coords = nlohmann::json::array();
  for (int i = 0; i < pt.coords.dim(); ++i) coords.push_back(pt.coords[i]);
  return {{"chart", atlas.chart(pt.chart).id}, {"coords", coords}};
}

}  // namespace

std::string axiom_name(Axiom a) {
  switch (a) {
    case Axiom::conical: return "conical";
    case Axiom::consistent: return "consistent";
    case Axiom::convex: return "convex";
    case Axiom::reversible: return "reversible";
    case Axiom::equivariant: return "equivariant";
    case Axiom::projection: return "projection";
  }
  return "unknown";
}

SpacePoint Isometry::apply(const ChartAtlas& atlas, const SpacePoint& x) const {
  if (x.chart < 0 || x.chart >= static_cast<int>(maps.size()))
    throw MalformedInput("isometry has no map for the point's chart");
  const ChartMap& m = maps[static_cast<size_t>(x.chart)];
  const Chart& src = atlas.chart(x.chart);
  const Chart& dst = atlas.chart(m.target);
  Vec out(dst.dim);
  for (int i = 0; i < dst.dim; ++i) {
    double v = m.offset[i];
    for (int j = 0; j < src.dim; ++j)
      v += m.linear[static_cast<size_t>(i)][static_cast<size_t>(j)] * x.coords[j];
    out[i] = v;
  }
  if (!dst.contains(out))
    throw MalformedInput("isometry maps a point outside its target chart");
  return {m.target, out};
}

Isometry Isometry::identity(const ChartAtlas& atlas) {
  Isometry iso;
  iso.name = "identity";
  for (size_t c = 0; c < atlas.charts.size(); ++c) {
    ChartMap m;
    m.target = static_cast<int>(c);
    m.offset = Vec(atlas.charts[c].dim);
    for (int i = 0; i < atlas.charts[c].dim; ++i)
      m.linear[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1.0;
    iso.maps.push_back(m);
  }
  return iso;
}

Isometry Isometry::translation(const ChartAtlas& atlas, const Vec& shift) {
  Isometry iso = identity(atlas);
  iso.name = "translation";
  for (size_t c = 0; c < atlas.charts.size(); ++c) {
    if (atlas.charts[c].dim != shift.dim())
      throw MalformedInput("translation dimension does not match the charts");
    iso.maps[c].offset = shift;
  }
  return iso;
}

double evaluate_axiom(const BicombingHandle& handle, Axiom axiom, const AxiomWitness& w,
                      const Isometry* iso) {
  switch (axiom) {
    case Axiom::conical: {
      const SpacePoint a = eval_many(handle, w.x, w.y, {w.t})[0];
      const SpacePoint b = eval_many(handle, w.x2, w.y2, {w.t})[0];
      const double bound =
          (1.0 - w.t) * dist(handle, w.x, w.x2) + w.t * dist(handle, w.y, w.y2);
      return std::max(0.0, dist(handle, a, b) - bound);
    }
    case Axiom::consistent: {
      const int n = 32;
      std::vector<double> outer(n), inner(n);
      for (int i = 0; i < n; ++i) {
        const double u = static_cast<double>(i) / (n - 1);
        outer[static_cast<size_t>(i)] = w.s + u * (w.t - w.s);
        inner[static_cast<size_t>(i)] = u;
      }
      const auto sub = eval_many(handle, w.x, w.y, outer);
      const auto redo = eval_many(handle, sub.front(), sub.back(), inner);
      double gap = 0.0;
      for (int i = 0; i < n; ++i)
        gap = std::max(gap, dist(handle, sub[static_cast<size_t>(i)], redo[static_cast<size_t>(i)]));
      return gap;
    }
    case Axiom::convex: {
      const double mid = 0.5 * (w.s + w.t);
      const auto a = eval_many(handle, w.x, w.y, {w.s, mid, w.t});
      const auto b = eval_many(handle, w.x2, w.y2, {w.s, mid, w.t});
      const double fs = dist(handle, a[0], b[0]);
      const double fm = dist(handle, a[1], b[1]);
      const double ft = dist(handle, a[2], b[2]);
      return std::max(0.0, fm - 0.5 * (fs + ft));
    }
    case Axiom::reversible: {
      const SpacePoint a = eval_many(handle, w.x, w.y, {w.t})[0];
      const SpacePoint b = eval_many(handle, w.y, w.x, {1.0 - w.t})[0];
      return dist(handle, a, b);
    }
    case Axiom::equivariant: {
      if (!iso) throw MalformedInput("equivariance check needs an isometry");
      const ChartAtlas& atlas = *handle.space;
      const SpacePoint a = iso->apply(atlas, eval_many(handle, w.x, w.y, {w.t})[0]);
      const SpacePoint b =
          eval_many(handle, iso->apply(atlas, w.x), iso->apply(atlas, w.y), {w.t})[0];
      return dist(handle, a, b);
    }
    case Axiom::projection:
      break;
  }
  throw MalformedInput("projection bound is checked by check_projection_inequality");
}

std::vector<AxiomReport> check_axioms(const BicombingHandle& handle,
                                      const std::vector<Axiom>& axioms, std::uint64_t seed,
                                      int samples, const Isometry* iso, double halfwidth) {
  std::vector<AxiomReport> reports;
  for (Axiom a : axioms) {
    AxiomReport r;
    r.axiom = a;
    r.samples = samples;
    r.seed = seed;
    if (a == Axiom::equivariant && !iso) {
      r.samples = 0;
      r.note = "skipped: no isometry supplied";
      reports.push_back(r);
      continue;
    }
    Sampler smp(handle.space, seed + 1315423911ull * static_cast<std::uint64_t>(a), halfwidth);
    for (int i = 0; i < samples; ++i) {
      const AxiomWitness w = draw_witness(a, smp);
      const double v = evaluate_axiom(handle, a, w, iso);
      if (v >= r.max_violation) {
        r.max_violation = v;
        r.witness = w;
      }
    }
    reports.push_back(r);
  }
  return reports;
}

AxiomReport check_ccc_implication(const BicombingHandle& handle, std::uint64_t seed, int samples,
                                  double pre_tol, double halfwidth) {
  const auto pre = check_axioms(handle, {Axiom::conical, Axiom::consistent}, seed, samples,
                                nullptr, halfwidth);
  AxiomReport out;
  out.axiom = Axiom::convex;
  out.seed = seed;
  if (pre[0].max_violation > pre_tol || pre[1].max_violation > pre_tol) {
    out.samples = 0;
    out.note = "skipped: precondition failure, conical=" + std::to_string(pre[0].max_violation) +
               " consistent=" + std::to_string(pre[1].max_violation);
    return out;
  }
  out = check_axioms(handle, {Axiom::convex}, seed, samples, nullptr, halfwidth)[0];
  out.note = "conical=" + std::to_string(pre[0].max_violation) +
             ";consistent=" + std::to_string(pre[1].max_violation);
  return out;
}

AxiomReport check_projection_inequality(const BicombingHandle& handle, std::uint64_t seed,
                                        int samples, double halfwidth) {
  AxiomReport r;
  r.axiom = Axiom::projection;
  r.samples = samples;
  r.seed = seed;
  Sampler smp(handle.space, seed, halfwidth);
  for (int i = 0; i < samples; ++i) {
    const SpacePoint o = smp.point();
    const SpacePoint x = smp.point();
    const SpacePoint y = smp.point();
    const double dox = dist(handle, o, x);
    const double doy = dist(handle, o, y);
    const double r_max = std::max(dox, doy);
    if (r_max < 1e-9) continue;
    const double radius = smp.unit() * r_max;
    if (dox < 1e-9) continue;
    const SpacePoint px = eval_many(handle, o, x, {std::min(radius / dox, 1.0)})[0];
    const SpacePoint py =
        eval_many(handle, o, y, {doy < 1e-9 ? 0.0 : std::min(radius / doy, 1.0)})[0];
    const double bound = 2.0 * dist(handle, x, y) * radius / dox;
    const double v = std::max(0.0, dist(handle, px, py) - bound);
    if (v >= r.max_violation) {
      r.max_violation = v;
      r.witness = AxiomWitness{o, x, y, y, radius, 0.0};
    }
  }
  return r;
}

DisplacementResult displacement(const AtlasPtr& space, const Isometry& iso, PExponent p,
                                std::uint64_t seed, int samples, int refine_iters, double tol) {
  const ChartAtlas& atlas = *space;
  Sampler smp(space, seed);
  EngineOptions opts;

  for (int i = 0; i < std::min(samples, 50); ++i) {
    const SpacePoint a = smp.point();
    const SpacePoint b = smp.point();
    const double d = distance(atlas, a, b, p, opts);
    const double di = distance(atlas, iso.apply(atlas, a), iso.apply(atlas, b), p, opts);
    if (std::abs(d - di) > 1e-9 * (1.0 + d))
      throw MalformedInput("supplied chart maps are not isometric on samples");
  }

  auto disp = [&](const SpacePoint& x) { return distance(atlas, x, iso.apply(atlas, x), p, opts); };

  std::vector<std::pair<double, SpacePoint>> pool;
  for (int i = 0; i < samples; ++i) {
    const SpacePoint x = smp.point();
    pool.emplace_back(disp(x), x);
  }
  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const size_t keep = std::min<size_t>(8, pool.size());

  DisplacementResult res;
  res.inf_estimate = pool.empty() ? 0.0 : pool.front().first;
  for (size_t k = 0; k < keep; ++k) {
    SpacePoint x = pool[k].second;
    double fx = pool[k].first;
    const Chart& ch = atlas.chart(x.chart);
    double step = 0.5;
    for (int it = 0; it < refine_iters && step > 1e-12; ++it) {
      bool moved = false;
      for (int i = 0; i < ch.dim; ++i) {
        for (double sgn : {1.0, -1.0}) {
          Vec v = x.coords;
          v[i] = std::clamp(v[i] + sgn * step, ch.lo[static_cast<size_t>(i)],
                            ch.hi[static_cast<size_t>(i)]);
          const SpacePoint cand{x.chart, v};
          const double fc = disp(cand);
          if (fc < fx - 1e-15) {
            fx = fc;
            x = cand;
            moved = true;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    pool[k] = {fx, x};
    res.inf_estimate = std::min(res.inf_estimate, fx);
  }
  for (size_t k = 0; k < keep; ++k)
    if (pool[k].first <= res.inf_estimate + tol) res.near_min.push_back(pool[k].second);
  return res;
}

bool axis_check(const BicombingHandle& handle, const Isometry& iso, const AxisSpec& line,
                double tol) {
  if (std::abs(lp_norm(line.direction, handle.p) - 1.0) > 1e-9)
    throw MalformedInput("axis line must be parametrized at unit speed");
  if (!(line.period > 0.0)) throw MalformedInput("axis period must be positive");
  if (!handle.path_fn) throw MalformedInput("axis check needs a geodesic-backed handle");
  const ChartAtlas& atlas = *handle.space;
  const Chart& ch = atlas.chart(line.base.chart);
  const double T = line.period;

  auto gamma = [&](double t) -> SpacePoint {
    Vec v = line.base.coords + line.direction * t;
    if (!ch.contains(v)) throw MalformedInput("axis line leaves its chart over the test window");
    return {line.base.chart, v};
  };

  for (int i = -4; i <= 4; ++i) {
    const double t = 0.5 * T * i;
    const SpacePoint mapped = iso.apply(atlas, gamma(t));
    if (distance(atlas, mapped, gamma(t + T), handle.p, handle.opts) > tol) return false;
  }

  for (int i = -4; i <= 4; ++i) {
    for (int j = i + 1; j <= 4; ++j) {
      const double s = 0.5 * T * i, t = 0.5 * T * j;
      const double d = distance(atlas, gamma(s), gamma(t), handle.p, handle.opts);
      if (std::abs(d - (t - s)) > tol * (1.0 + t - s)) return false;
    }
  }

  for (const auto& [s, t] : {std::pair{-T, T}, {0.0, 2.0 * T}, {-1.5 * T, 0.5 * T}}) {
    PolyPath seg;
    seg.breakpoints = {gamma(s), gamma(t)};
    seg.chart_seq = {ch.id};
    const PolyPath geo = handle.path_fn(gamma(s), gamma(t));
    if (trajectory_hausdorff(atlas, seg, geo) > tol) return false;
  }
  return true;
}

BicombingHandle corrupt_midpoint(const BicombingHandle& handle, double nudge) {
  BicombingHandle out = handle;
  out.method = BicombingMethod::custom;
  out.path_fn = nullptr;
  const BicombingHandle inner = handle;
  out.eval_fn = [inner, nudge](const SpacePoint& x, const SpacePoint& y, double t) {
    const double warped = std::clamp(t + nudge * std::sin(kPi * t), 0.0, 1.0);
    return inner.eval_fn(x, y, warped);
  };
  return out;
}

std::string AxiomReport::json(const ChartAtlas& atlas) const {
  nlohmann::json j;
  j["axiom"] = axiom_name(axiom);
  j["samples"] = samples;
  j["seed"] = seed;
  j["maxViolation"] = max_violation;
  j["witness"] = {{"x", point_json(atlas, witness.x)},
                  {"y", point_json(atlas, witness.y)},
                  {"x2", point_json(atlas, witness.x2)},
                  {"y2", point_json(atlas, witness.y2)},
                  {"s", witness.s},
                  {"t", witness.t}};
  if (!note.empty()) j["note"] = note;
  return j.dump();
}

}  // namespace bicomb
