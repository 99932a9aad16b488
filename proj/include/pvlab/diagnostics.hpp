#ifndef PVLAB_DIAGNOSTICS_HPP
#define PVLAB_DIAGNOSTICS_HPP

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pvlab/operators.hpp"

namespace pvlab {

enum class Verdict { Convergent, Oscillatory, Drifting, Undetermined };
std::string to_string(Verdict v);

/// Classification of a truncation sequence over its trusted tail. Exactly one
/// verdict; the estimate matching the verdict is set, the others empty.
struct ConvergenceReport {
  Verdict verdict = Verdict::Undetermined;
  std::optional<double> limit;      // convergent: mean of the trusted tail
  std::optional<double> amplitude;  // oscillatory: max - min over the tail
  std::optional<double> slope;      // drifting: least-squares slope per rung
  int window = 0;                   // number of tail points used
  std::string reason;               // set when undetermined
};

/// Decision procedure for the convergence dichotomy, on the last
/// ceil(tail_fraction * J) points:
///   max-min <= tol_cauchy                  -> convergent, limit = tail mean
///   |lsq slope| >= tol_drift and the de-trended spread is below half the
///   raw spread                             -> drifting
///   spread above tol_cauchy with sign-alternating increments in >= 60% of
///   steps                                  -> oscillatory
///   otherwise                              -> undetermined
/// Fewer than 8 points is undetermined with a reason. The procedure is
/// scale-equivariant: scaling values and both tolerances by lambda > 0 keeps
/// the verdict and scales the estimates.
ConvergenceReport classify_convergence(std::span<const std::pair<double, double>> seq,
                                       double tail_fraction, double tol_cauchy,
                                       double tol_drift);

struct DensityRow {
  double radius = 0.0;
  double mass = 0.0;
  double ratio = 0.0;  // mass / h(radius)
};

/// Density against the majorant at one point: rows along a decreasing radius
/// ladder, plus the growth flag (ratio <= 1 everywhere) and the ratio at the
/// smallest radius (the zero-density evidence).
struct DensityProfile {
  Point x;
  std::vector<DensityRow> rows;
  double max_ratio = 0.0;
  double ratio_at_min_radius = 0.0;
  bool growth_bound_ok = false;
};

DensityProfile density_profile(const AtomicMeasure& mu, const HFunction& h,
                               const Point& x, std::span<const double> radii,
                               const EvalOptions& opts = {});

/// Pointwise sup of the ratio columns over profiles sharing one radius
/// ladder: the empirical envelope of the density ratio.
std::vector<DensityRow> density_envelope(std::span<const DensityProfile> profiles);

struct DoublingResult {
  bool found = false;
  int k = -1;              // first doubling scale, when found
  double inner_radius = 0.0;
  double inner_mass = 0.0;
  double outer_mass = 0.0;
};

/// Smallest k >= 0 with mu(B(a, 2^(1-k) eps)) <= C mu(B(a, 2^-k eps)); the
/// scan stops once 2^-k eps drops below the trust floor ("not found" is a
/// value, not an error).
DoublingResult doubling_scale_search(const AtomicMeasure& mu, const Point& a,
                                     double eps, double C);

struct WeakTypeRow {
  double t = 0.0;
  double superlevel_mass = 0.0;  // mu{ atom : T*(f) > t }
  double product = 0.0;          // t * mass / ||f||_1
};

struct WeakTypeReport {
  double constant = 0.0;  // max product over the t grid
  double t_at_max = 0.0;
  double f_l1 = 0.0;
  double tstar_max = 0.0;
  std::vector<WeakTypeRow> rows;
};

/// Empirical weak (1,1) constant: T* at every atom (exact grid-augmented
/// sup), then sup over the t grid of t * mu{T* > t} / ||f||_1.
WeakTypeReport weak_type_constant(const AtomicMeasure& mu, const KernelSpec& K,
                                  const DensityFunction& f, const TruncationGrid& grid,
                                  std::span<const double> t_grid,
                                  const EvalOptions& opts = {});

}  // namespace pvlab

#endif
