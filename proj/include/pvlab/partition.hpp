#ifndef PVLAB_PARTITION_HPP
#define PVLAB_PARTITION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pvlab/measure.hpp"

namespace pvlab {

struct PartitionCell {
  std::vector<std::uint32_t> atoms;  // ascending atom indices
  std::int32_t parent = -1;          // cell index at the previous level
  double diameter = 0.0;             // geometric cell diagonal
  std::uint64_t key = 0;             // address prefix / linearized cube index
};

/// Nested system D_k, k = 1..depth: at each level the cells partition the
/// atom index set, and each cell at level k+1 lies inside exactly one cell at
/// level k. mesh(k) = max cell diameter is nonincreasing for the generated
/// families.
class NestedPartition {
 public:
  int depth() const { return static_cast<int>(levels_.size()); }
  const std::vector<PartitionCell>& level(int k) const { return levels_.at(k - 1); }
  std::uint32_t cell_index_of(int k, std::uint32_t atom) const {
    return atom_cell_.at(k - 1).at(atom);
  }
  const PartitionCell& cell_of(int k, std::uint32_t atom) const {
    return levels_[k - 1][cell_index_of(k, atom)];
  }
  double mesh(int k) const;
  std::size_t atom_count() const { return atom_count_; }

  /// Throws std::logic_error if any level fails the disjoint / exhaustive /
  /// nested checks. Generated partitions always pass; this is the self-test.
  void validate() const;

  static NestedPartition from_levels(std::vector<std::vector<PartitionCell>> levels,
                                     std::size_t atom_count);

 private:
  std::vector<std::vector<PartitionCell>> levels_;
  std::vector<std::vector<std::uint32_t>> atom_cell_;
  std::size_t atom_count_ = 0;
};

/// Cylinder partition of an IFS-generated measure: level-k cells collect the
/// atoms sharing an address prefix of length k. Requires IFS provenance and
/// depth <= generation. mesh(k) = sqrt(2) * lambda^k.
NestedPartition nested_partition_from_ifs(const AtomicMeasure& mu, int depth);

/// Dyadic-cube partition anchored at the atom bounding box: level-k cells are
/// the nonempty half-open cubes of side 2^-k * (bounding side). Atoms on the
/// top faces are clamped into the last cube.
NestedPartition nested_partition_dyadic(const AtomicMeasure& mu, int depth);

}  // namespace pvlab

#endif
