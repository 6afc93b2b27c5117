#include "bicomb/catalog.hpp"

#include <cmath>
#include <deque>

namespace bicomb {

namespace {

std::vector<PExponent> all_p() {
  return {PExponent::finite(1), PExponent::finite(2), PExponent::infinity()};
}

Chart plane_chart(std::string id) {
  Chart c;
  c.id = std::move(id);
  c.dim = 2;
  c.kind = "plane";
  return c;
}

// Full line in a plane chart: horizontal y=off, vertical x=off, or diagonal
// y=x+off.
Locus plane_line(char fam, double off) {
  Locus L;
  L.plo = {-std::numeric_limits<double>::infinity()};
  L.phi = {std::numeric_limits<double>::infinity()};
  switch (fam) {
    case 'h':
      L.base = {0.0, off};
      L.dirs = {Vec{1.0, 0.0}};
      break;
    case 'v':
      L.base = {off, 0.0};
      L.dirs = {Vec{0.0, 1.0}};
      break;
    case 'd':
      L.base = {0.0, off};
      L.dirs = {Vec{1.0, 1.0}};
      break;
    default:
      throw MalformedInput("unknown line family");
  }
  return L;
}

Gluing line_gluing(const ChartAtlas& atlas, int a, int b, char fam, double off) {
  Gluing g;
  g.name = atlas.chart(a).id + "|" + atlas.chart(b).id + "|" + fam + std::to_string(static_cast<int>(off));
  g.chart_a = a;
  g.chart_b = b;
  g.locus_a = plane_line(fam, off);
  g.locus_b = plane_line(fam, off);
  return g;
}

}  // namespace

AtlasPtr build_lsp(int which) {
  if (which < 1 || which > 5) throw MalformedInput("model space index must be 1..5");
  auto atlas = std::make_shared<ChartAtlas>();
  atlas->family = "lsp" + std::to_string(which);
  atlas->declared_p = all_p();
  atlas->convex_charts = true;
  int nplanes = which <= 3 ? (which == 1 ? 1 : 2) : 3;
  for (int i = 1; i <= nplanes; ++i) atlas->charts.push_back(plane_chart("P" + std::to_string(i)));
  switch (which) {
    case 2:
      atlas->gluings.push_back(line_gluing(*atlas, 0, 1, 'h', 0));
      break;
    case 3:
      atlas->gluings.push_back(line_gluing(*atlas, 0, 1, 'd', 0));
      break;
    case 4:
      atlas->gluings.push_back(line_gluing(*atlas, 0, 1, 'h', 0));
      atlas->gluings.push_back(line_gluing(*atlas, 1, 2, 'v', 0));
      break;
    case 5:
      atlas->gluings.push_back(line_gluing(*atlas, 0, 1, 'h', 0));
      atlas->gluings.push_back(line_gluing(*atlas, 1, 2, 'd', 0));
      break;
    default:
      break;
  }
  finalize_atlas(*atlas);
  return atlas;
}

AtlasPtr build_ck_patch(int angle, int depth) {
  if (angle != 45 && angle != 90) throw MalformedInput("patch angle must be 45 or 90");
  if (depth < 0) throw MalformedInput("patch depth must be nonnegative");
  const char cross_fam = angle == 90 ? 'v' : 'd';

  auto atlas = std::make_shared<ChartAtlas>();
  atlas->family = "ck" + std::to_string(angle) + "_" + std::to_string(depth);
  atlas->declared_p = all_p();
  atlas->convex_charts = true;

  struct Node {
    int chart;
    int level;
    bool middle;
    char link_fam = 0;  // line shared with the parent (0 for the root)
    int link_off = 0;
  };
  atlas->charts.push_back(plane_chart("P1"));
  std::deque<Node> frontier{{0, 0, true}};
  while (!frontier.empty()) {
    Node node = frontier.front();
    frontier.pop_front();
    if (node.level == depth) continue;
    std::vector<std::pair<char, int>> lines;
    for (char fam : node.middle ? std::vector<char>{'h', cross_fam} : std::vector<char>{node.link_fam})
      for (int off : {-1, 0, 1})
        if (!(fam == node.link_fam && off == node.link_off)) lines.emplace_back(fam, off);
    for (auto [fam, off] : lines) {
      int child = static_cast<int>(atlas->charts.size());
      atlas->charts.push_back(plane_chart("P" + std::to_string(child + 1)));
      atlas->gluings.push_back(line_gluing(*atlas, node.chart, child, fam, off));
      frontier.push_back({child, node.level + 1, !node.middle, fam, off});
    }
  }
  finalize_atlas(*atlas);
  return atlas;
}

BlockSequence BlockSequence::standard() { return BlockSequence{{1, 8, 64, 512, 4096}}; }

long long BlockSequence::total() const {
  long long t = 0;
  for (long long r : runs) t += r;
  return t;
}

double BlockSequence::x(long long i) const {
  if (i < 1) throw MalformedInput("block index is 1-based");
  long long seen = 0;
  for (size_t r = 0; r < runs.size(); ++r) {
    seen += runs[r];
    if (i <= seen) return r % 2 == 0 ? 1.0 : std::sqrt(2.0);
  }
  throw MalformedInput("block index beyond sequence");
}

double BlockSequence::partial_sum(long long n) const {
  if (n < 0 || n > total()) throw MalformedInput("partial sum index out of range");
  double s = 0.0;
  long long seen = 0;
  for (size_t r = 0; r < runs.size() && seen < n; ++r) {
    long long take = std::min(runs[r], n - seen);
    s += static_cast<double>(take) * (r % 2 == 0 ? 1.0 : std::sqrt(2.0));
    seen += take;
  }
  return s;
}

AtlasPtr build_halfplane(const BlockSequence& seq, int cubes, PExponent p) {
  if (seq.runs.empty() || seq.runs[0] < 1) throw MalformedInput("block sequence must start with a run of ones");
  for (long long r : seq.runs)
    if (r < 1) throw MalformedInput("block run lengths must be positive");
  if (cubes < 1 || cubes > 4096) throw MalformedInput("strip count out of range");
  if (seq.total() < cubes) throw MalformedInput("block sequence shorter than requested strip count");

  const double diag = p.is_infinite() ? 1.0 : std::pow(2.0, 1.0 / p.value());
  auto atlas = std::make_shared<ChartAtlas>();
  atlas->family = "halfplane";
  atlas->declared_p = {p};
  atlas->convex_charts = true;
  double u = 0.0;
  for (int n = 1; n <= cubes; ++n) {
    double w = seq.x(n) == 1.0 ? 1.0 : diag;
    Chart c;
    c.id = "S" + std::to_string(n);
    c.dim = 2;
    c.kind = "strip";
    c.lo[0] = u;
    c.hi[0] = u + w;
    atlas->charts.push_back(c);
    if (n > 1) {
      Gluing g;
      g.name = "S" + std::to_string(n - 1) + "|S" + std::to_string(n);
      g.chart_a = n - 2;
      g.chart_b = n - 1;
      g.locus_a = g.locus_b = plane_line('v', u);
      atlas->gluings.push_back(g);
    }
    u += w;
  }
  finalize_atlas(*atlas);
  return atlas;
}

}  // namespace bicomb
