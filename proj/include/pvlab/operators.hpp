#ifndef PVLAB_OPERATORS_HPP
#define PVLAB_OPERATORS_HPP

#include <span>
#include <utility>
#include <vector>

#include "pvlab/kernel.hpp"
#include "pvlab/measure.hpp"

namespace pvlab {

/// Geometric ladder of truncation radii eps_j = eps_max * ratio^j. All rungs
/// must sit on or above the measure trust floor (2 x resolution) unless the
/// override flag is set at construction.
struct TruncationGrid {
  std::vector<double> epsilons;  // strictly decreasing
  double trust_floor = 0.0;
  bool override_floor = false;

  double eps_max() const { return epsilons.front(); }
  double eps_min() const { return epsilons.back(); }

  static TruncationGrid geometric(double eps_max, double ratio, int count,
                                  double trust_floor, bool override_floor = false);
};

/// Values of f at the atoms of a measure, or the tagged constant function 1.
class DensityFunction {
 public:
  static DensityFunction one() { return DensityFunction(); }
  static DensityFunction of(std::vector<double> values) {
    DensityFunction f;
    f.values_ = std::move(values);
    f.is_one_ = false;
    return f;
  }

  bool is_one() const { return is_one_; }
  double operator[](std::size_t i) const { return is_one_ ? 1.0 : values_[i]; }
  const std::vector<double>& values() const { return values_; }

  void check_matches(const AtomicMeasure& mu) const {
    if (!is_one_ && values_.size() != mu.size()) {
      throw std::invalid_argument("density: length does not match atom count");
    }
  }

 private:
  std::vector<double> values_;
  bool is_one_ = true;
};

// ---- truncated operators ------------------------------------------------------

/// T_eps(f)(x): sum over atoms y with d(x, y) >= eps of K(x,y) f(y) w(y), in
/// atom index order. The truncation domain is the complement of the OPEN ball,
/// so ties d = eps are included; an atom at x itself is excluded (d = 0 < eps).
/// Refuses eps below the trust floor unless opts.override_trust_floor.
double truncated(const AtomicMeasure& mu, const KernelSpec& K, const DensityFunction& f,
                 const Point& x, double eps, const EvalOptions& opts = {});

struct MaximalResult {
  double value = 0.0;
  double argmax_eps = 0.0;
};

/// T*(f)(x) = sup_eps |T_eps(f)(x)| over [eps_min, eps_max]. For an atomic
/// measure T_eps is piecewise constant in eps with breakpoints at the atom
/// distances, so the grid is augmented with the exact distances d(x, y_j)
/// inside [eps_min, eps_max] and the sup over the candidates is the exact sup
/// over the whole interval. Each candidate is evaluated with the same
/// index-order summation as truncated(), so maximal >= |truncated| holds
/// exactly for every rung.
MaximalResult maximal(const AtomicMeasure& mu, const KernelSpec& K,
                      const DensityFunction& f, const Point& x,
                      const TruncationGrid& grid, const EvalOptions& opts = {});

/// T*(f) at every atom: O(n log n) per atom via distance-sorted prefix sums.
/// Accelerated twin of per-atom maximal(); agrees with it to ~1e-15 relative
/// (different summation order) and is tested against it.
std::vector<double> maximal_at_atoms(const AtomicMeasure& mu, const KernelSpec& K,
                                     const DensityFunction& f, const TruncationGrid& grid,
                                     const EvalOptions& opts = {});

/// (eps_j, T_eps_j(f)(x)) along the ladder; feeds classify_convergence.
std::vector<std::pair<double, double>> pv_sequence(const AtomicMeasure& mu,
                                                   const KernelSpec& K,
                                                   const DensityFunction& f,
                                                   const Point& x,
                                                   const TruncationGrid& grid,
                                                   const EvalOptions& opts = {});

// ---- bilinear and averaged forms -----------------------------------------------

/// (T(f), g) = 1/2 sum_{i != j} K(x_i, x_j) (f_i g_j - f_j g_i) w_i w_j.
/// The diagonal is skipped: atoms are distinct and K is undefined there.
double bilinear_pairing(const AtomicMeasure& mu, const KernelSpec& K,
                        const DensityFunction& f, const DensityFunction& g,
                        const EvalOptions& opts = {});

/// Ball average of the exterior field:
///   (1/mu(B(z,r))) sum_{x in B} sum_{y notin B} K(x, y) f(y) w_x w_y.
/// Every term is finite (x in the open ball, y outside it, so x != y).
/// Throws std::domain_error identifying (z, r) when the ball has no mass.
double ball_average(const AtomicMeasure& mu, const KernelSpec& K,
                    const DensityFunction& f, const Point& z, double r,
                    const EvalOptions& opts = {});

// ---- exact antisymmetry identities ----------------------------------------------

struct Residual {
  double residual = 0.0;  // |signed sum|, zero in exact arithmetic
  double scale = 0.0;     // corresponding sum of |K| w w
  double relative() const { return scale > 0.0 ? residual / scale : residual; }
};

/// int_B T_eps(chi_B) dmu = 0: the double sum over pairs inside B cancels
/// pairwise by antisymmetry.
Residual check_ball_cancellation(const AtomicMeasure& mu, const KernelSpec& K,
                                 const Ball& b, double eps, const EvalOptions& opts = {});

/// int_B T_eps(chi_{B^c}) dmu + int_{B^c} T_eps(chi_B) dmu = 0 at every
/// finite truncation.
Residual check_identity_2_2(const AtomicMeasure& mu, const KernelSpec& K, const Ball& b,
                            double eps, const EvalOptions& opts = {});

// ---- empirical operator norm -----------------------------------------------------

struct NormEstimate {
  double value = 0.0;  // largest singular value; lower bound if !converged
  bool converged = true;
  int iterations = 0;
};

/// Operator norm of T_eps on L^2(mu): largest singular value of
/// M_ij = K(x_i, x_j) 1[d >= eps] sqrt(w_i w_j), by matrix-free power
/// iteration on M^T M to the given relative tolerance.
NormEstimate l2_norm_estimate(const AtomicMeasure& mu, const KernelSpec& K, double eps,
                              double rel_tol = 1e-6, int max_iterations = 500,
                              std::uint64_t seed = 1);

}  // namespace pvlab

#endif
