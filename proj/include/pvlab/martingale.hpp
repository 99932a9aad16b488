#ifndef PVLAB_MARTINGALE_HPP
#define PVLAB_MARTINGALE_HPP

#include <cstdint>
#include <vector>

#include "pvlab/operators.hpp"
#include "pvlab/partition.hpp"

namespace pvlab {

/// nu with d(nu) = f d(mu), f >= 0 on the atoms. Non-owning view over the
/// base measure; keep the measure alive while the view is in use.
class WeightedMeasure {
 public:
  WeightedMeasure(const AtomicMeasure& mu, DensityFunction f);

  const AtomicMeasure& measure() const { return *mu_; }
  const DensityFunction& density() const { return f_; }

  /// nu(D) for a cell: sum of f_j w_j over the cell's atoms, index order.
  double cell_mass(const PartitionCell& cell) const;
  double total() const;

 private:
  const AtomicMeasure* mu_;
  DensityFunction f_;
};

/// S_k f(z): with D the level-k cell containing atom z,
///   (nu(D))^-1 sum_{x in D} sum_{y notin D} K(x,y) f(y) w_y f(x) w_x,
/// and 0 by convention when nu(D) = 0.
double s_k(const WeightedMeasure& nu, const KernelSpec& K, const NestedPartition& P,
           int k, std::uint32_t z, const EvalOptions& opts = {});

/// A_k f(z): (mu(D))^-1 sum_{x in D} sum_{y notin D} K(x,y) f(y) w_y w_x,
/// 0 when mu(D) = 0. f may change sign here.
double a_k(const AtomicMeasure& mu, const KernelSpec& K, const DensityFunction& f,
           const NestedPartition& P, int k, std::uint32_t z,
           const EvalOptions& opts = {});

struct MartingaleResidual {
  double max_relative = 0.0;   // worst residual / scale over the parents
  double max_absolute = 0.0;
  std::int64_t worst_parent = -1;
};

/// Martingale property of (S_k f): for each level-k parent D with children
/// D_i, the child integrals must re-sum to the parent integral; the defect is
/// the inter-sibling cross-term sum, which cancels pairwise by antisymmetry.
/// Returns the worst residual over the parents, relative to the absolute-value
/// mass of the same terms.
MartingaleResidual check_martingale_property(const WeightedMeasure& nu,
                                             const KernelSpec& K,
                                             const NestedPartition& P, int k,
                                             const EvalOptions& opts = {});

struct TraceLevel {
  int level = 0;
  std::uint64_t cell_key = 0;
  double nu_mass = 0.0;
  double mu_mass = 0.0;
  double s_value = 0.0;
  double a_value = 0.0;
  double gap = 0.0;  // |S_k - A_k|, which tends to 0 along the levels
};

struct MartingaleTrace {
  std::uint32_t atom = 0;
  std::vector<TraceLevel> levels;
  bool gap_nonincreasing_tail = false;  // over the last three levels
};

/// Per-level S_k and A_k along the cells containing atom z. Requires f >= 0
/// (S_k needs the weighted measure).
MartingaleTrace martingale_trace(const AtomicMeasure& mu, const DensityFunction& f,
                                 const KernelSpec& K, const NestedPartition& P,
                                 std::uint32_t z, const EvalOptions& opts = {});

struct L1BoundReport {
  double value = 0.0;             // |sum over level-k cells of the cell integral|
  double comparison_bound = 0.0;  // 2 * norm_estimate * int f^2 dmu
  double norm_estimate = 0.0;     // grid operator norm at the trust floor
  double f_l2 = 0.0;              // int f^2 dmu
};

/// |int S_k f dnu| next to the scale suggested by the L^2 theory. Informational:
/// the grid norm is evidence, not a certificate, so no inequality is asserted.
L1BoundReport martingale_l1_bound(const WeightedMeasure& nu, const KernelSpec& K,
                                  const NestedPartition& P, int k,
                                  const EvalOptions& opts = {});

}  // namespace pvlab

#endif
