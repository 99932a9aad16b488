#ifndef PVLAB_GEOMETRY_HPP
#define PVLAB_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace pvlab {

inline constexpr int kMaxDim = 3;

/// Point in R^d, d <= 3. Fixed capacity keeps the hot loops allocation-free.
class Point {
 public:
  Point() = default;

  Point(std::initializer_list<double> cs) {
    if (cs.size() == 0 || cs.size() > kMaxDim) {
      throw std::invalid_argument("Point: dimension must be 1..3");
    }
    dim_ = static_cast<int>(cs.size());
    int i = 0;
    for (double c : cs) coords_[i++] = c;
  }

  static Point from(std::span<const double> cs) {
    if (cs.size() == 0 || cs.size() > kMaxDim) {
      throw std::invalid_argument("Point: dimension must be 1..3");
    }
    Point p;
    p.dim_ = static_cast<int>(cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) p.coords_[i] = cs[i];
    return p;
  }

  int dim() const { return dim_; }
  double operator[](int i) const { return coords_[i]; }
  double& operator[](int i) { return coords_[i]; }
  const double* data() const { return coords_.data(); }

  bool operator==(const Point& o) const {
    if (dim_ != o.dim_) return false;
    for (int i = 0; i < dim_; ++i)
      if (coords_[i] != o.coords_[i]) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> coords_{};
  int dim_ = 0;
};

inline double dist2(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double dist(const double* a, const double* b, int dim) {
  return std::sqrt(dist2(a, b, dim));
}

inline double dist(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dist: dimension mismatch");
  return dist(a.data(), b.data(), a.dim());
}

/// Open ball: membership is d(x, center) < radius, strictly.
struct Ball {
  Point center;
  double radius = 0.0;

  Ball() = default;
  Ball(Point c, double r) : center(c), radius(r) {
    if (!(r > 0.0)) throw std::invalid_argument("Ball: radius must be > 0");
  }

  bool contains(const double* x, int dim) const {
    return dist(center.data(), x, dim) < radius;
  }
  bool contains(const Point& p) const { return contains(p.data(), p.dim()); }
};

inline std::string to_string(const Point& p) {
  std::string s = "(";
  for (int i = 0; i < p.dim(); ++i) {
    if (i) s += ", ";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

}  // namespace pvlab

#endif
