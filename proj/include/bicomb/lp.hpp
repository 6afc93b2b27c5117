#pragma once

// ℓ^p norms and straight-line interpolation inside one flat chart.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "bicomb/errors.hpp"

namespace bicomb {

inline constexpr int kMaxDim = 6;

// Exponent p ∈ [1, ∞]; infinity is a distinguished state, never a float sentinel.
class PExponent {
 public:
  PExponent() : value_(2.0), infinite_(false) {}

  static PExponent infinity() {
    PExponent p;
    p.infinite_ = true;
    p.value_ = 0.0;
    return p;
  }

  static PExponent finite(double v) {
    if (!(v >= 1.0) || !std::isfinite(v)) {
      throw MalformedInput("p exponent must satisfy 1 <= p < inf (or use infinity())");
    }
    PExponent p;
    p.infinite_ = false;
    p.value_ = v;
    return p;
  }

  bool is_infinite() const { return infinite_; }

  double value() const {
    if (infinite_) throw MalformedInput("finite value requested from p = inf");
    return value_;
  }

  bool operator==(const PExponent& o) const {
    if (infinite_ != o.infinite_) return false;
    return infinite_ || value_ == o.value_;
  }
  bool operator!=(const PExponent& o) const { return !(*this == o); }

  std::string str() const;
  static PExponent parse(const std::string& s);

 private:
  double value_;
  bool infinite_;
};

// Fixed-capacity coordinate vector; charts never exceed kMaxDim dimensions.
class Vec {
 public:
  Vec() : n_(0) { v_.fill(0.0); }
  explicit Vec(int n) : n_(check_dim(n)) { v_.fill(0.0); }
  Vec(std::initializer_list<double> xs) : n_(check_dim(static_cast<int>(xs.size()))) {
    v_.fill(0.0);
    int i = 0;
    for (double x : xs) v_[i++] = x;
  }

  static Vec of(const double* xs, int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v.v_[i] = xs[i];
    return v;
  }

  int dim() const { return n_; }
  double operator[](int i) const { return v_[i]; }
  double& operator[](int i) { return v_[i]; }

  Vec operator+(const Vec& o) const {
    Vec r(n_);
    for (int i = 0; i < n_; ++i) r.v_[i] = v_[i] + o.v_[i];
    return r;
  }
  Vec operator-(const Vec& o) const {
    Vec r(n_);
    for (int i = 0; i < n_; ++i) r.v_[i] = v_[i] - o.v_[i];
    return r;
  }
  Vec operator*(double c) const {
    Vec r(n_);
    for (int i = 0; i < n_; ++i) r.v_[i] = v_[i] * c;
    return r;
  }

  bool finite() const {
    for (int i = 0; i < n_; ++i)
      if (!std::isfinite(v_[i])) return false;
    return true;
  }

 private:
  static int check_dim(int n) {
    if (n < 0 || n > kMaxDim) throw MalformedInput("coordinate dimension out of range");
    return n;
  }
  std::array<double, kMaxDim> v_;
  int n_;
};

double lp_norm(const Vec& v, PExponent p);

inline double lp_dist(const Vec& a, const Vec& b, PExponent p) { return lp_norm(a - b, p); }

// (1−t)a + tb; constant d_p speed for every p.
Vec lerp(const Vec& a, const Vec& b, double t);

}  // namespace bicomb
