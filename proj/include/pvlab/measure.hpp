#ifndef PVLAB_MEASURE_HPP
#define PVLAB_MEASURE_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pvlab/geometry.hpp"
#include "pvlab/util.hpp"

namespace pvlab {

/// Thrown when an operation asks for a scale below the measure's trust floor
/// (2 x resolution) without the override flag.
class TrustFloorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridIndex;

/// Finite weighted atom cloud in R^d standing in for a Borel measure.
///
/// Invariants: weights >= 0, no two atoms share coordinates (builders merge
/// duplicates), resolution > 0 and, for the generated families, resolution
/// <= min pairwise atom distance. Immutable after construction; all queries
/// are read-only and thread-safe.
class AtomicMeasure {
 public:
  AtomicMeasure(int dim, std::vector<double> coords, std::vector<double> weights,
                double resolution, std::string label);

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }
  double resolution() const { return resolution_; }
  double trust_floor() const { return 2.0 * resolution_; }
  const std::string& label() const { return label_; }

  const double* atom_ptr(std::size_t i) const { return coords_.data() + i * dim_; }
  Point atom(std::size_t i) const {
    return Point::from({atom_ptr(i), static_cast<std::size_t>(dim_)});
  }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& coords() const { return coords_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Total mass, summed in atom index order.
  double total_mass() const;

  /// Diagonal of the atom bounding box; upper bound for the set diameter.
  double bbox_diameter() const;
  void bbox(double* lo, double* hi) const;

  // IFS provenance (set by build_cantor_measure): base-4 cylinder address per
  // atom, most significant digit = level 1.
  bool has_ifs_addresses() const { return ifs_generation_ > 0; }
  int ifs_generation() const { return ifs_generation_; }
  double ifs_contraction() const { return ifs_contraction_; }
  const std::vector<std::uint32_t>& ifs_addresses() const { return ifs_addresses_; }
  void set_ifs_provenance(std::vector<std::uint32_t> addresses, int generation,
                          double contraction);

  const GridIndex* index() const { return index_.get(); }
  void build_index() const;

 private:
  int dim_;
  std::vector<double> coords_;
  std::vector<double> weights_;
  double resolution_;
  std::string label_;
  std::vector<std::uint32_t> ifs_addresses_;
  int ifs_generation_ = 0;
  double ifs_contraction_ = 0.0;
  mutable std::shared_ptr<const GridIndex> index_;
};

/// Uniform grid over the bounding box; pure accelerator for ball queries.
/// Correctness is defined by the brute-force scan, which the query reproduces
/// bitwise by visiting candidates in atom index order.
class GridIndex {
 public:
  GridIndex(const AtomicMeasure& mu, std::size_t target_cells_per_dim = 0);

  /// Atom indices possibly within the ball, ascending. Every atom inside the
  /// ball is in the result; the result may contain outside atoms.
  std::vector<std::uint32_t> candidates(const Ball& b) const;

 private:
  int dim_;
  double lo_[kMaxDim] = {0, 0, 0};
  double cell_ = 1.0;
  std::size_t cells_per_dim_ = 1;
  std::vector<std::vector<std::uint32_t>> cells_;
  std::size_t cell_of(const double* x) const;
};

// ---- builders -------------------------------------------------------------

inline constexpr std::size_t kDefaultAtomBudget = std::size_t{1} << 20;

/// Four-corner Cantor family in the unit square: the k-th iterate of the maps
/// f_i(p) = lambda p + (1 - lambda) e_i, e_i the unit-square corners. Atoms sit
/// at cylinder corner points (the image of the f_0 fixed point), weight 4^-k,
/// resolution lambda^k. lambda = 1/4 gives the classical 1/4-corner set.
AtomicMeasure build_cantor_measure(int generation, double contraction,
                                   std::size_t atom_budget = kDefaultAtomBudget);

/// Midpoint-rule discretization of arc length on the segment [a, b]:
/// n equal weights |b-a|/n at the midpoints of an n-fold equipartition.
AtomicMeasure build_uniform_segment(std::size_t n_atoms, const Point& a, const Point& b);

/// Tensor midpoint grid on [0, side]^d with weight (side/n)^d per atom.
AtomicMeasure build_uniform_cube(std::size_t n_per_side, int dim, double side,
                                 std::size_t atom_budget = kDefaultAtomBudget);

// ---- queries ---------------------------------------------------------------

/// mu(B): sum of weights of atoms strictly inside the open ball, accumulated
/// in atom index order. Uses the grid index when the measure carries one.
double ball_mass(const AtomicMeasure& mu, const Ball& b);

/// Reference scan without the index; always sums in atom index order.
double ball_mass_scan(const AtomicMeasure& mu, const Ball& b);

/// Atoms with ball membership equal to `inside`, weights unchanged,
/// resolution and label inherited. The result may be empty (mass 0).
AtomicMeasure restrict(const AtomicMeasure& mu, const Ball& b, bool inside);

// ---- serialization ---------------------------------------------------------

// Plain text, bit-exact round trip: header line
//   dim=<d> resolution=<r> label=<s>
// then one atom per line "x1 ... xd weight", all reals with 17 significant
// digits.
void write_measure(std::ostream& os, const AtomicMeasure& mu);
void write_measure_file(const std::string& path, const AtomicMeasure& mu);
AtomicMeasure read_measure(std::istream& is);
AtomicMeasure read_measure_file(const std::string& path);

}  // namespace pvlab

#endif
