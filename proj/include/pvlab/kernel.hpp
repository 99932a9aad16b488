#ifndef PVLAB_KERNEL_HPP
#define PVLAB_KERNEL_HPP

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pvlab/geometry.hpp"
#include "pvlab/util.hpp"

namespace pvlab {

enum class KernelFamily : std::uint8_t { Riesz, Hilbert, HuovinenPower, HuovinenCombo };
enum class ComplexPart : std::uint8_t { Real, Imag };

/// Antisymmetric kernel K(x, y) = -K(y, x), evaluated off the diagonal.
///
/// Built-in variants:
///   Riesz(m, i)        (x_i - y_i) / |x - y|^(m+1), one scalar kernel per
///                      component i (1-based), any dim with i <= dim.
///   Hilbert            1 / (y - x) on the line (equals -Riesz(1,1) in 1-d).
///   HuovinenPower(k)   Re or Im of zeta^(2k-1) / |zeta|^(2k), zeta = x - y
///                      read as a complex number; dim 2 only.
///   HuovinenCombo      Re(zeta/|zeta|^2 - zeta^3/|zeta|^4); dim 2 only.
class KernelSpec {
 public:
  static KernelSpec riesz(int m, int component_1based);
  static KernelSpec hilbert();
  static KernelSpec huovinen_power(int k, ComplexPart part = ComplexPart::Real);
  static KernelSpec huovinen_combo();

  KernelFamily family() const { return family_; }
  int riesz_m() const { return m_; }
  int riesz_component() const { return component_; }  // 1-based
  int huovinen_k() const { return k_; }
  ComplexPart part() const { return part_; }

  /// 0 = any dimension (subject to component <= dim); otherwise exact.
  int required_dim() const;
  void check_dim(int dim) const;

  /// Checked evaluation: rejects x == y and dimension mismatches.
  double eval(const Point& x, const Point& y) const;

  /// Unchecked hot path; caller guarantees x != y and a valid dimension.
  double operator()(const double* x, const double* y, int dim) const;

  std::string describe() const;

 private:
  KernelFamily family_ = KernelFamily::Riesz;
  int m_ = 1;
  int component_ = 1;
  int k_ = 1;
  ComplexPart part_ = ComplexPart::Real;
};

/// Majorant h(r) = c r^s, or a table of (r, h) knots interpolated linearly in
/// log-log coordinates (end segments extend by their power law). Increasing,
/// h(r) -> 0 as r -> 0.
class HFunction {
 public:
  static HFunction power(double c, double s);
  static HFunction table(std::vector<std::pair<double, double>> knots);

  double operator()(double r) const;
  bool is_power() const { return knots_.empty(); }
  double power_c() const { return c_; }
  double power_s() const { return s_; }

  /// Doubling constant: 2^s exactly for the power form; for tables the
  /// measured sup of h(2r)/h(r) over a knot-anchored sample.
  double doubling_constant() const;

  std::string describe() const;

 private:
  double c_ = 1.0;
  double s_ = 1.0;
  std::vector<std::pair<double, double>> knots_;  // ascending r, positive h
};

/// Seeded source of well-separated point pairs in a box, plus a fixed batch
/// of adversarial configurations (collinear, near-diagonal) that the
/// condition checkers always fold in.
class PairSampler {
 public:
  PairSampler(int dim, std::uint64_t seed, double box_lo = 0.0, double box_hi = 1.0,
              double min_separation = 1e-9);
  std::pair<Point, Point> next();
  int dim() const { return dim_; }

 private:
  int dim_;
  double lo_, hi_, min_sep_;
  std::mt19937_64 rng_;
};

struct ConditionReport {
  double supremum = 0.0;  // max observed value of the tested functional
  Point arg_x, arg_y;     // where it was attained
};

/// max |K(x,y) + K(y,x)| over n sampled pairs; 0 up to rounding for every
/// built-in variant.
ConditionReport check_antisymmetry(const KernelSpec& k, PairSampler& sampler, int n);

/// Size condition (growth of K against h): max |K(x,y)| * h(d(x,y)).
/// The condition |K| <= 1/h holds iff the supremum is <= 1.
ConditionReport check_size_condition(const KernelSpec& k, const HFunction& h,
                                     PairSampler& sampler, int n);

/// Smoothness condition: max over triples with d(x,y) > 2 d(y,z) of
/// |K(x,y) - K(x,z)| * d(x,y) * h(d(x,y)) / d(y,z). Reported as a constant,
/// not pass/fail; real kernels carry an absolute constant.
ConditionReport check_smoothness_condition(const KernelSpec& k, const HFunction& h,
                                           PairSampler& sampler, int n);

}  // namespace pvlab

#endif
