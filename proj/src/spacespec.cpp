#include "bicomb/spacespec.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bicomb/catalog.hpp"
#include "bicomb/cubes.hpp"

namespace bicomb {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& what) { throw MalformedInput("space spec: " + what); }

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field '") + key + "'");
  return *it;
}

int int_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer()) bad(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

std::string str_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) bad(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

Vec vec_field(const json& v, const char* what) {
  if (!v.is_array() || v.empty() || v.size() > static_cast<size_t>(kMaxDim)) bad(std::string(what) + " must be a short number array");
  Vec out(static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad(std::string(what) + " must contain numbers");
    out[static_cast<int>(i)] = v[i].get<double>();
  }
  return out;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.dim(); ++i) a.push_back(v[i]);
  return a;
}

std::vector<PExponent> p_list(const json& j, const char* key) {
  std::vector<PExponent> out;
  auto it = j.find(key);
  if (it == j.end()) return {PExponent::finite(1), PExponent::finite(2), PExponent::infinity()};
  if (!it->is_array() || it->empty()) bad("'p' must be a non-empty array");
  for (const json& e : *it) {
    if (e.is_string())
      out.push_back(PExponent::parse(e.get<std::string>()));
    else if (e.is_number())
      out.push_back(PExponent::finite(e.get<double>()));
    else
      bad("'p' entries must be numbers or strings");
  }
  return out;
}

json p_json(const std::vector<PExponent>& ps) {
  json a = json::array();
  for (const PExponent& p : ps) a.push_back(p.str());
  return a;
}

struct ParsedSpec {
  json canonical;
  AtlasPtr atlas;
};

ParsedSpec parse_spec(const json& doc);

ParsedSpec parse_family(const json& doc) {
  const std::string fam = str_field(doc, "family");
  json params = doc.contains("params") ? field(doc, "params") : json::object();
  if (!params.is_object()) bad("'params' must be an object");
  json out{{"family", fam}};
  ParsedSpec res;

  if (fam.size() == 4 && fam.rfind("lsp", 0) == 0 && fam[3] >= '1' && fam[3] <= '5') {
    res.atlas = build_lsp(fam[3] - '0');
  } else if (fam == "ck_patch") {
    const int angle = int_field(params, "angle");
    const int depth = int_field(params, "depth");
    res.atlas = build_ck_patch(angle, depth);
    out["params"] = {{"angle", angle}, {"depth", depth}};
  } else if (fam == "halfplane") {
    BlockSequence seq = BlockSequence::standard();
    if (params.contains("runs")) {
      seq.runs.clear();
      for (const json& r : field(params, "runs")) {
        if (!r.is_number_integer()) bad("'runs' must be integers");
        seq.runs.push_back(r.get<long long>());
      }
    }
    int cubes = params.contains("cubes") ? int_field(params, "cubes") : 12;
    PExponent p = params.contains("p") ? PExponent::parse(str_field(params, "p"))
                                       : PExponent::infinity();
    res.atlas = build_halfplane(seq, cubes, p);
    json runs = json::array();
    for (long long r : seq.runs) runs.push_back(r);
    out["params"] = {{"runs", runs}, {"cubes", cubes}, {"p", p.str()}};
  } else if (fam == "F") {
    res.atlas = cube_complex_F().atlas;
  } else if (fam == "F5") {
    res.atlas = cube_complex_F5().atlas;
  } else if (fam == "square") {
    res.atlas = cube_complex_square().atlas;
  } else if (fam == "interval") {
    res.atlas = cube_complex_interval().atlas;
  } else if (fam == "n_chain") {
    std::vector<double> xs;
    for (const json& e : field(params, "xs")) {
      if (!e.is_number()) bad("'xs' must be numbers");
      xs.push_back(e.get<double>());
    }
    if (params.contains("length") && int_field(params, "length") != static_cast<int>(xs.size()))
      bad("'length' disagrees with 'xs'");
    res.atlas = cube_complex_chain(xs).atlas;
    json jx = json::array();
    for (double x : xs) jx.push_back(x);
    out["params"] = {{"xs", jx}, {"length", static_cast<int>(xs.size())}};
  } else if (fam == "lp_product") {
    ParsedSpec left = parse_spec(field(params, "left"));
    ParsedSpec right = parse_spec(field(params, "right"));
    PExponent p = PExponent::parse(str_field(params, "p"));
    res.atlas = lp_product(left.atlas, right.atlas, p);
    out["params"] = {{"left", left.canonical}, {"right", right.canonical}, {"p", p.str()}};
  } else {
    bad("unknown family '" + fam + "'");
  }
  res.canonical = std::move(out);
  return res;
}

// Bound entry: null (unbounded coordinate) or [lo, hi] with null for an
// infinite end.
void apply_bounds(Chart& c, const json& bounds) {
  if (!bounds.is_array() || static_cast<int>(bounds.size()) != c.dim)
    bad("'bounds' must list one entry per coordinate of chart " + c.id);
  for (int i = 0; i < c.dim; ++i) {
    const json& b = bounds[static_cast<size_t>(i)];
    if (b.is_null()) continue;
    if (!b.is_array() || b.size() != 2) bad("bound entries must be null or [lo, hi]");
    if (!b[0].is_null()) c.lo[static_cast<size_t>(i)] = b[0].get<double>();
    if (!b[1].is_null()) c.hi[static_cast<size_t>(i)] = b[1].get<double>();
  }
}

json bounds_json(const Chart& c) {
  json a = json::array();
  for (int i = 0; i < c.dim; ++i) {
    const double lo = c.lo[static_cast<size_t>(i)], hi = c.hi[static_cast<size_t>(i)];
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      a.push_back(nullptr);
    } else {
      json b = json::array();
      b.push_back(std::isfinite(lo) ? json(lo) : json(nullptr));
      b.push_back(std::isfinite(hi) ? json(hi) : json(nullptr));
      a.push_back(b);
    }
  }
  return a;
}

ParsedSpec parse_explicit_charts(const json& doc) {
  auto atlas = std::make_shared<ChartAtlas>();
  atlas->family = "explicit";
  atlas->declared_p = p_list(doc, "p");
  json charts = json::array();
  for (const json& jc : field(doc, "charts")) {
    Chart c;
    c.id = str_field(jc, "id");
    c.kind = jc.contains("kind") ? str_field(jc, "kind") : "plane";
    c.dim = jc.contains("dim") ? int_field(jc, "dim") : 2;
    if (jc.contains("bounds"))
      apply_bounds(c, field(jc, "bounds"));
    else if (c.kind == "interval")
      apply_bounds(c, json::array({json::array({0.0, 1.0})}));
    json out{{"id", c.id}, {"kind", c.kind}, {"dim", c.dim}};
    if (c.kind != "plane") out["bounds"] = bounds_json(c);
    charts.push_back(out);
    atlas->charts.push_back(c);
  }
  json gluings = json::array();
  int counter = 0;
  if (doc.contains("gluings")) {
    for (const json& jg : field(doc, "gluings")) {
      Gluing g;
      g.name = jg.contains("name") ? str_field(jg, "name") : ("g" + std::to_string(counter));
      ++counter;
      g.chart_a = atlas->chart_index(str_field(jg, "chartA"));
      g.chart_b = atlas->chart_index(str_field(jg, "chartB"));
      if (g.chart_a < 0 || g.chart_b < 0) bad("gluing " + g.name + " references unknown chart");
      double orientation = 1.0;
      if (jg.contains("orientation")) {
        orientation = field(jg, "orientation").get<double>();
        if (orientation != 1.0 && orientation != -1.0) bad("orientation must be 1 or -1");
      }
      double span_lo = -std::numeric_limits<double>::infinity();
      double span_hi = std::numeric_limits<double>::infinity();
      if (jg.contains("span")) {
        const json& s = field(jg, "span");
        if (!s.is_array() || s.size() != 2) bad("'span' must be [lo, hi]");
        if (!s[0].is_null()) span_lo = s[0].get<double>();
        if (!s[1].is_null()) span_hi = s[1].get<double>();
      }
      const json& la = field(jg, "lineA");
      const json& lb = field(jg, "lineB");
      g.locus_a.base = vec_field(field(la, "base"), "line base");
      g.locus_a.dirs = {vec_field(field(la, "dir"), "line dir")};
      g.locus_b.base = vec_field(field(lb, "base"), "line base");
      g.locus_b.dirs = {vec_field(field(lb, "dir"), "line dir") * orientation};
      g.locus_a.plo = g.locus_b.plo = {span_lo};
      g.locus_a.phi = g.locus_b.phi = {span_hi};
      atlas->gluings.push_back(g);

      json jout{{"name", g.name},
                {"chartA", atlas->chart(g.chart_a).id},
                {"chartB", atlas->chart(g.chart_b).id},
                {"lineA", {{"base", vec_json(g.locus_a.base)}, {"dir", vec_json(g.locus_a.dirs[0])}}},
                {"lineB", {{"base", vec_json(g.locus_b.base)},
                           {"dir", vec_json(g.locus_b.dirs[0] * orientation)}}},
                {"orientation", static_cast<int>(orientation)}};
      if (std::isfinite(span_lo) || std::isfinite(span_hi)) {
        json s = json::array();
        s.push_back(std::isfinite(span_lo) ? json(span_lo) : json(nullptr));
        s.push_back(std::isfinite(span_hi) ? json(span_hi) : json(nullptr));
        jout["span"] = s;
      }
      gluings.push_back(jout);
    }
  }
  finalize_atlas(*atlas);
  ParsedSpec res;
  res.atlas = atlas;
  res.canonical = json{{"charts", charts}, {"gluings", gluings}, {"p", p_json(atlas->declared_p)}};
  return res;
}

ParsedSpec parse_cubes(const json& doc) {
  std::vector<std::string> names;
  for (const json& v : field(doc, "vertices")) {
    if (!v.is_string()) bad("'vertices' must be strings");
    names.push_back(v.get<std::string>());
  }
  auto index_of = [&names](const std::string& n) {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return static_cast<int>(i);
    bad("cube references unknown vertex '" + n + "'");
    return -1;
  };
  std::vector<std::vector<int>> cubes;
  for (const json& jc : field(doc, "cubes")) {
    if (!jc.is_array()) bad("'cubes' entries must be corner arrays");
    std::vector<int> cube;
    for (const json& v : jc) {
      if (!v.is_string()) bad("cube corners must be vertex names");
      cube.push_back(index_of(v.get<std::string>()));
    }
    cubes.push_back(std::move(cube));
  }
  CubeComplex cx = build_cube_complex(names, cubes);
  ParsedSpec res;
  res.atlas = cx.atlas;
  json jv = json::array(), jc = json::array();
  for (const auto& n : names) jv.push_back(n);
  for (const auto& cube : cubes) {
    json row = json::array();
    for (int v : cube) row.push_back(names[static_cast<size_t>(v)]);
    jc.push_back(row);
  }
  res.canonical = json{{"vertices", jv}, {"cubes", jc}};
  return res;
}

ParsedSpec parse_spec(const json& doc) {
  if (!doc.is_object()) bad("document must be a JSON object");
  if (doc.contains("family")) return parse_family(doc);
  if (doc.contains("charts")) return parse_explicit_charts(doc);
  if (doc.contains("cubes")) return parse_cubes(doc);
  bad("document needs 'family', 'charts', or 'cubes'");
}

ParsedSpec parse_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  return parse_spec(doc);
}

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

AtlasPtr space_from_json(const std::string& text) { return parse_text(text).atlas; }

std::string canonical_space_json(const std::string& text) {
  return parse_text(text).canonical.dump(2) + "\n";
}

std::string token_space_json(const std::string& token) {
  const std::string t = to_lower(token);
  if (t.rfind("lsp", 0) == 0 && t.size() == 4) return json{{"family", "lsp" + t.substr(3)}}.dump(2) + "\n";
  if (t.rfind("ck", 0) == 0) {
    int angle = 0, depth = 0;
    if (std::sscanf(t.c_str(), "ck%d_%d", &angle, &depth) != 2)
      throw MalformedInput("patch token must look like ck90_2");
    return json{{"family", "ck_patch"}, {"params", {{"angle", angle}, {"depth", depth}}}}.dump(2) +
           "\n";
  }
  if (t == "f") return json{{"family", "F"}}.dump(2) + "\n";
  if (t == "f5") return json{{"family", "F5"}}.dump(2) + "\n";
  if (t == "square" || t == "interval") return json{{"family", t}}.dump(2) + "\n";
  if (t == "fxi" || t == "f5xi") {
    json factor{{"family", t == "fxi" ? "F" : "F5"}};
    return json{{"family", "lp_product"},
                {"params",
                 {{"left", factor}, {"right", json{{"family", "interval"}}}, {"p", "2"}}}}
               .dump(2) +
           "\n";
  }
  if (t == "halfplane") return json{{"family", "halfplane"}}.dump(2) + "\n";
  throw MalformedInput("unknown space family: " + token);
}

AtlasPtr space_from_token(const std::string& token) {
  std::string path;
  if (!token.empty() && token[0] == '@')
    path = token.substr(1);
  else if (token.find('/') != std::string::npos ||
           (token.size() > 5 && token.compare(token.size() - 5, 5, ".json") == 0))
    path = token;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw MalformedInput("cannot read space file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return space_from_json(ss.str());
  }
  return space_from_json(token_space_json(token));
}

std::string describe_space(const ChartAtlas& atlas) {
  json charts = json::array();
  for (const Chart& c : atlas.charts)
    charts.push_back(json{{"id", c.id}, {"kind", c.kind}, {"dim", c.dim}});
  json doc{{"family", atlas.family},
           {"charts", charts},
           {"gluings", static_cast<int>(atlas.gluings.size())},
           {"p", p_json(atlas.declared_p)}};
  return doc.dump(2) + "\n";
}

}  // namespace bicomb
