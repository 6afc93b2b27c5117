#include "bicomb/cubes.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bicomb {

namespace {

int corner_count_dim(size_t corners) {
  int d = 0;
  size_t c = corners;
  while (c > 1) {
    if (c % 2 != 0) return -1;
    c /= 2;
    ++d;
  }
  return d;
}

std::vector<int> as_set(const std::vector<int>& labeled) {
  std::vector<int> s = labeled;
  std::sort(s.begin(), s.end());
  return s;
}

bool set_includes(const std::vector<int>& big, const std::vector<int>& small) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

std::vector<int> set_intersection(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// All faces of a labeled cube, each again in binary corner order. mask bit i
// set means coordinate i is frozen (at the matching bit of the base corner).
std::vector<std::vector<int>> faces_of(const std::vector<int>& labeled) {
  const int k = corner_count_dim(labeled.size());
  std::vector<std::vector<int>> faces;
  for (int mask = 0; mask < (1 << k); ++mask) {
    std::vector<int> free_coords;
    for (int i = 0; i < k; ++i)
      if (!(mask & (1 << i))) free_coords.push_back(i);
    for (int bits = 0;; ++bits) {
      int frozen = 0, rest = bits;
      for (int i = 0; i < k; ++i)
        if (mask & (1 << i)) {
          if (rest & 1) frozen |= 1 << i;
          rest >>= 1;
        }
      if (rest) break;
      std::vector<int> face;
      for (int fc = 0; fc < (1 << free_coords.size()); ++fc) {
        int corner = frozen;
        for (size_t j = 0; j < free_coords.size(); ++j)
          if (fc & (1 << j)) corner |= 1 << free_coords[j];
        face.push_back(labeled[static_cast<size_t>(corner)]);
      }
      faces.push_back(std::move(face));
      if (mask == 0) break;
    }
  }
  return faces;
}

std::vector<std::vector<int>> close_faces(const std::vector<std::vector<int>>& cubes) {
  std::vector<std::vector<int>> out;
  std::set<std::vector<int>> seen;
  for (const auto& c : cubes)
    for (const auto& f : faces_of(c))
      if (seen.insert(as_set(f)).second) out.push_back(f);
  return out;
}

Vec corner_pos(int corner, int dim) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = (corner >> i) & 1 ? 1.0 : 0.0;
  return v;
}

std::string chart_id_for_dim(int dim, int counter) {
  const char* prefix = dim == 1 ? "I" : dim == 2 ? "Q" : dim == 3 ? "B" : "C";
  return prefix + std::to_string(counter);
}

// Gluing of two maximal-cube charts along their shared face, with parameters
// matched so that identified corners carry the same vertex.
Gluing face_gluing(const ChartAtlas& atlas, const CubeData& cd, int ca, int cb,
                   const std::vector<int>& shared) {
  const auto& la = cd.chart_corners[static_cast<size_t>(ca)];
  const auto& lb = cd.chart_corners[static_cast<size_t>(cb)];
  const int ka = atlas.chart(ca).dim, kb = atlas.chart(cb).dim;
  auto corner_in = [](const std::vector<int>& labeled, int v) {
    for (size_t c = 0; c < labeled.size(); ++c)
      if (labeled[c] == v) return static_cast<int>(c);
    return -1;
  };
  int all_and = (1 << ka) - 1, all_or = 0;
  for (int v : shared) {
    int c = corner_in(la, v);
    all_and &= c;
    all_or |= c;
  }
  const int free_mask = all_or & ~all_and;
  std::vector<int> free_coords;
  for (int i = 0; i < ka; ++i)
    if (free_mask & (1 << i)) free_coords.push_back(i);
  if ((1u << free_coords.size()) != shared.size())
    throw InvalidGluing("cubes " + atlas.chart(ca).id + "," + atlas.chart(cb).id +
                        " meet in a non-face vertex set");

  const int base_corner = all_and;
  const int v0 = la[static_cast<size_t>(base_corner)];
  Gluing g;
  g.name = atlas.chart(ca).id + "|" + atlas.chart(cb).id;
  g.chart_a = ca;
  g.chart_b = cb;
  g.locus_a.base = corner_pos(base_corner, ka);
  g.locus_b.base = corner_pos(corner_in(lb, v0), kb);
  for (int q : free_coords) {
    g.locus_a.dirs.push_back(corner_pos(1 << q, ka));
    int w = la[static_cast<size_t>(base_corner | (1 << q))];
    Vec d = corner_pos(corner_in(lb, w), kb) - g.locus_b.base;
    int nonzero = 0;
    for (int i = 0; i < kb; ++i)
      if (d[i] != 0.0) ++nonzero;
    if (nonzero != 1)
      throw InvalidGluing("cubes " + atlas.chart(ca).id + "," + atlas.chart(cb).id +
                          " have incompatible corner structure");
    g.locus_b.dirs.push_back(d);
    g.locus_a.plo.push_back(0.0);
    g.locus_a.phi.push_back(1.0);
    g.locus_b.plo.push_back(0.0);
    g.locus_b.phi.push_back(1.0);
  }
  for (int v : shared) {
    int bits = corner_in(la, v), check = corner_in(lb, v);
    Vec expect = g.locus_b.base;
    for (size_t j = 0; j < free_coords.size(); ++j)
      if (bits & (1 << free_coords[j])) expect = expect + g.locus_b.dirs[j];
    for (int i = 0; i < kb; ++i)
      if (expect[i] != corner_pos(check, kb)[i])
        throw InvalidGluing("cubes " + atlas.chart(ca).id + "," + atlas.chart(cb).id +
                            " have incompatible corner structure");
  }
  return g;
}

}  // namespace

int CubeComplex::vertex_index(const std::string& name) const {
  for (size_t i = 0; i < vertex_names.size(); ++i)
    if (vertex_names[i] == name) return static_cast<int>(i);
  throw MalformedInput("unknown vertex: " + name);
}

SpacePoint CubeComplex::vertex_point(const std::string& name) const {
  const int v = vertex_index(name);
  const CubeData& cd = *atlas->cubes;
  for (size_t chart = 0; chart < cd.chart_corners.size(); ++chart)
    for (size_t c = 0; c < cd.chart_corners[chart].size(); ++c)
      if (cd.chart_corners[chart][c] == v)
        return canonicalize(*atlas, {static_cast<int>(chart),
                                     corner_pos(static_cast<int>(c), atlas->chart(static_cast<int>(chart)).dim)});
  throw MalformedInput("vertex not on any maximal cube: " + name);
}

CubeComplex build_cube_complex(const std::vector<std::string>& vertex_names,
                               const std::vector<std::vector<int>>& labeled_cubes) {
  for (size_t i = 0; i < vertex_names.size(); ++i) {
    if (vertex_names[i].empty()) throw MalformedInput("empty vertex name");
    for (size_t j = 0; j < i; ++j)
      if (vertex_names[j] == vertex_names[i])
        throw MalformedInput("duplicate vertex name: " + vertex_names[i]);
  }
  if (labeled_cubes.empty()) throw MalformedInput("cube complex has no cubes");

  std::set<std::vector<int>> sets;
  for (const auto& c : labeled_cubes) {
    int k = corner_count_dim(c.size());
    if (k < 0 || k > kMaxDim) throw MalformedInput("cube corner count must be a power of two");
    for (int v : c)
      if (v < 0 || v >= static_cast<int>(vertex_names.size()))
        throw MalformedInput("cube references missing vertex");
    auto s = as_set(c);
    if (s.size() != c.size()) throw MalformedInput("cube repeats a vertex");
    if (!sets.insert(s).second) throw MalformedInput("cube listed twice");
  }
  for (const auto& c : labeled_cubes)
    for (const auto& f : faces_of(c))
      if (!sets.count(as_set(f)))
        throw MalformedInput("cube list is not face-closed (missing a face of a " +
                             std::to_string(corner_count_dim(c.size())) + "-cube)");

  CubeComplex cx;
  cx.vertex_names = vertex_names;
  for (const auto& c : labeled_cubes) cx.cube_sets.push_back(as_set(c));
  for (size_t i = 0; i < cx.cube_sets.size(); ++i)
    for (size_t j = i + 1; j < cx.cube_sets.size(); ++j) {
      auto inter = set_intersection(cx.cube_sets[i], cx.cube_sets[j]);
      if (!inter.empty() && !sets.count(inter))
        throw MalformedInput("cubes overlap in a vertex set that is not a common face");
    }

  auto atlas = std::make_shared<ChartAtlas>();
  atlas->family = "cubes";
  atlas->declared_p = {PExponent::finite(1), PExponent::finite(2), PExponent::infinity()};
  atlas->convex_charts = true;
  auto cubedata = std::make_shared<CubeData>();
  cubedata->vertex_names = vertex_names;
  int counters[kMaxDim + 1] = {};
  for (size_t i = 0; i < labeled_cubes.size(); ++i) {
    bool maximal = true;
    for (size_t j = 0; j < cx.cube_sets.size() && maximal; ++j)
      if (j != i && cx.cube_sets[j].size() > cx.cube_sets[i].size() &&
          set_includes(cx.cube_sets[j], cx.cube_sets[i]))
        maximal = false;
    if (!maximal) continue;
    int k = corner_count_dim(labeled_cubes[i].size());
    if (k == 0) throw MalformedInput("isolated vertices are not supported");
    Chart c;
    c.id = chart_id_for_dim(k, counters[k]++);
    c.dim = k;
    c.kind = k == 1 ? "interval" : "box";
    for (int d = 0; d < k; ++d) {
      c.lo[static_cast<size_t>(d)] = 0.0;
      c.hi[static_cast<size_t>(d)] = 1.0;
    }
    atlas->charts.push_back(c);
    cubedata->chart_corners.push_back(labeled_cubes[i]);
  }
  for (size_t a = 0; a < atlas->charts.size(); ++a)
    for (size_t b = a + 1; b < atlas->charts.size(); ++b) {
      auto inter = set_intersection(as_set(cubedata->chart_corners[a]), as_set(cubedata->chart_corners[b]));
      if (inter.empty()) continue;
      atlas->gluings.push_back(
          face_gluing(*atlas, *cubedata, static_cast<int>(a), static_cast<int>(b), inter));
    }
  atlas->cubes = cubedata;
  finalize_atlas(*atlas);
  cx.atlas = atlas;
  return cx;
}

CubeComplex cube_complex_interval() { return build_cube_complex({"v0", "v1"}, close_faces({{0, 1}})); }

CubeComplex cube_complex_square() {
  return build_cube_complex({"v00", "v10", "v01", "v11"}, close_faces({{0, 1, 2, 3}}));
}

CubeComplex cube_complex_F() {
  // Interval e--o, square with corners o,(x),(y),(xy); free end of the
  // interval is coordinate 0.
  return build_cube_complex({"e", "o", "x", "y", "xy"}, close_faces({{0, 1}, {1, 2, 3, 4}}));
}

CubeComplex cube_complex_F5() {
  std::vector<std::string> names{"z"};
  for (int i = 0; i < 5; ++i) names.push_back("e" + std::to_string(i));
  for (int i = 0; i < 5; ++i) names.push_back("f" + std::to_string(i));
  std::vector<std::vector<int>> squares;
  for (int i = 0; i < 5; ++i) squares.push_back({0, 1 + i, 1 + (i + 4) % 5, 6 + i});
  return build_cube_complex(names, close_faces(squares));
}

CubeComplex cube_complex_chain(const std::vector<double>& xs) {
  if (xs.empty() || xs.size() > 64) throw MalformedInput("chain length must be 1..64");
  std::vector<std::string> names{"a0"};
  std::vector<std::vector<int>> cubes;
  auto add_name = [&names](const std::string& n) {
    names.push_back(n);
    return static_cast<int>(names.size()) - 1;
  };
  int prev = 0;
  for (size_t n = 0; n < xs.size(); ++n) {
    const std::string tag = std::to_string(n + 1);
    if (std::fabs(xs[n] - 1.0) <= 1e-9) {
      int next = add_name("a" + tag);
      cubes.push_back({prev, next});
      prev = next;
    } else if (std::fabs(xs[n] - std::sqrt(2.0)) <= 1e-9) {
      int b = add_name("b" + tag);
      int c = add_name("c" + tag);
      int next = add_name("a" + tag);
      cubes.push_back({prev, b, c, next});
      prev = next;
    } else {
      throw MalformedInput("chain entries must be 1 (interval) or sqrt(2) (square diagonal)");
    }
  }
  return build_cube_complex(names, close_faces(cubes));
}

PointType point_type(const CubeComplex& cx, const SpacePoint& x) {
  const double tol = 1e-9;
  const CubeData& cd = *cx.atlas->cubes;
  std::vector<int> carrier;
  int m = kMaxDim + 1;
  for (const SpacePoint& rep : orbit(*cx.atlas, x)) {
    const int k = cx.atlas->chart(rep.chart).dim;
    int frozen_mask = 0, frozen_bits = 0, free_count = 0;
    for (int i = 0; i < k; ++i) {
      if (rep.coords[i] <= tol) {
        frozen_mask |= 1 << i;
      } else if (rep.coords[i] >= 1.0 - tol) {
        frozen_mask |= 1 << i;
        frozen_bits |= 1 << i;
      } else {
        ++free_count;
      }
    }
    if (free_count >= m) continue;
    std::vector<int> verts;
    const auto& labeled = cd.chart_corners[static_cast<size_t>(rep.chart)];
    for (int c = 0; c < (1 << k); ++c)
      if ((c & frozen_mask) == frozen_bits) verts.push_back(labeled[static_cast<size_t>(c)]);
    std::sort(verts.begin(), verts.end());
    carrier = std::move(verts);
    m = free_count;
  }
  int dimX = m;
  for (const auto& s : cx.cube_sets)
    if (set_includes(s, carrier)) dimX = std::max(dimX, corner_count_dim(s.size()));
  return {dimX - m, m};
}

AtlasPtr lp_product(const AtlasPtr& A, const AtlasPtr& B, PExponent p) {
  if (!A || !B) throw MalformedInput("product factors must be built spaces");
  if (!A->declares(p) || !B->declares(p))
    throw MalformedInput("product factor does not carry p=" + p.str());

  auto atlas = std::make_shared<ChartAtlas>();
  atlas->family = A->family + "x" + B->family;
  atlas->convex_charts = A->convex_charts && B->convex_charts;
  for (const PExponent& q : A->declared_p)
    if (B->declares(q)) atlas->declared_p.push_back(q);

  for (const Chart& a : A->charts)
    for (const Chart& b : B->charts) {
      if (a.dim + b.dim > kMaxDim) throw MalformedInput("product chart dimension exceeds capacity");
      Chart c;
      c.id = a.id + "." + b.id;
      c.dim = a.dim + b.dim;
      c.kind = "product";
      for (int i = 0; i < a.dim; ++i) {
        c.lo[static_cast<size_t>(i)] = a.lo[static_cast<size_t>(i)];
        c.hi[static_cast<size_t>(i)] = a.hi[static_cast<size_t>(i)];
      }
      for (int i = 0; i < b.dim; ++i) {
        c.lo[static_cast<size_t>(a.dim + i)] = b.lo[static_cast<size_t>(i)];
        c.hi[static_cast<size_t>(a.dim + i)] = b.hi[static_cast<size_t>(i)];
      }
      atlas->charts.push_back(c);
    }

  const int nb = static_cast<int>(B->charts.size());
  auto pidx = [nb](int i, int j) { return i * nb + j; };
  // A-side locus extended to span the whole B chart (and vice versa): the
  // extra parameters run over the B coordinate box with zero base offset.
  auto lift = [](const Locus& L, int own_dim, const Chart& other, bool left) {
    Locus out;
    const int total = own_dim + other.dim;
    out.base = Vec(total);
    const int shift = left ? 0 : other.dim;
    for (int i = 0; i < own_dim; ++i) out.base[shift + i] = L.base[i];
    for (const Vec& d : L.dirs) {
      Vec e(total);
      for (int i = 0; i < own_dim; ++i) e[shift + i] = d[i];
      out.dirs.push_back(e);
    }
    out.plo = L.plo;
    out.phi = L.phi;
    const int other_shift = left ? own_dim : 0;
    for (int i = 0; i < other.dim; ++i) {
      Vec e(total);
      e[other_shift + i] = 1.0;
      out.dirs.push_back(e);
      out.plo.push_back(other.lo[static_cast<size_t>(i)]);
      out.phi.push_back(other.hi[static_cast<size_t>(i)]);
    }
    return out;
  };
  for (const Gluing& g : A->gluings)
    for (int j = 0; j < nb; ++j) {
      const Chart& b = B->charts[static_cast<size_t>(j)];
      Gluing h;
      h.name = g.name + "." + b.id;
      h.chart_a = pidx(g.chart_a, j);
      h.chart_b = pidx(g.chart_b, j);
      h.locus_a = lift(g.locus_a, A->chart(g.chart_a).dim, b, true);
      h.locus_b = lift(g.locus_b, A->chart(g.chart_b).dim, b, true);
      atlas->gluings.push_back(h);
    }
  for (int i = 0; i < static_cast<int>(A->charts.size()); ++i) {
    const Chart& a = A->charts[static_cast<size_t>(i)];
    for (const Gluing& g : B->gluings) {
      Gluing h;
      h.name = a.id + "." + g.name;
      h.chart_a = pidx(i, g.chart_a);
      h.chart_b = pidx(i, g.chart_b);
      h.locus_a = lift(g.locus_a, B->chart(g.chart_a).dim, a, false);
      h.locus_b = lift(g.locus_b, B->chart(g.chart_b).dim, a, false);
      atlas->gluings.push_back(h);
    }
  }

  auto info = std::make_shared<ProductInfo>();
  info->left = A;
  info->right = B;
  info->built_for = p;
  info->right_chart_count = nb;
  atlas->product = info;
  finalize_atlas(*atlas);
  return atlas;
}

}  // namespace bicomb
