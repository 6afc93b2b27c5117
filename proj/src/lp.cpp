#include "bicomb/lp.hpp"

#include <algorithm>
#include <cstdio>

namespace bicomb {

std::string PExponent::str() const {
  if (infinite_) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value_);
  return buf;
}

PExponent PExponent::parse(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF" || s == "infinity") return PExponent::infinity();
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw MalformedInput("trailing characters in p exponent: " + s);
    return PExponent::finite(v);
  } catch (const std::invalid_argument&) {
    throw MalformedInput("unparsable p exponent: " + s);
  } catch (const std::out_of_range&) {
    throw MalformedInput("p exponent out of range: " + s);
  }
}

double lp_norm(const Vec& v, PExponent p) {
  const int n = v.dim();
  if (p.is_infinite()) {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m = std::max(m, std::fabs(v[i]));
    return m;
  }
  const double pv = p.value();
  if (pv == 1.0) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::fabs(v[i]);
    return s;
  }
  if (pv == 2.0) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += v[i] * v[i];
    return std::sqrt(s);
  }
  // General case, scaled to dodge overflow/underflow.
  double m = 0.0;
  for (int i = 0; i < n; ++i) m = std::max(m, std::fabs(v[i]));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::pow(std::fabs(v[i]) / m, pv);
  return m * std::pow(s, 1.0 / pv);
}

Vec lerp(const Vec& a, const Vec& b, double t) {
  if (a.dim() != b.dim()) throw MalformedInput("lerp endpoints have mismatched dimensions");
  Vec r(a.dim());
  for (int i = 0; i < a.dim(); ++i) r[i] = (1.0 - t) * a[i] + t * b[i];
  return r;
}

}  // namespace bicomb
