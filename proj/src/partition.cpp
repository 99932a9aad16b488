#include "pvlab/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace pvlab {

double NestedPartition::mesh(int k) const {
  double m = 0.0;
  for (const auto& c : level(k)) m = std::max(m, c.diameter);
  return m;
}

NestedPartition NestedPartition::from_levels(
    std::vector<std::vector<PartitionCell>> levels, std::size_t atom_count) {
  NestedPartition p;
  p.levels_ = std::move(levels);
  p.atom_count_ = atom_count;
  p.atom_cell_.resize(p.levels_.size());
  for (std::size_t k = 0; k < p.levels_.size(); ++k) {
    auto& map = p.atom_cell_[k];
    map.assign(atom_count, UINT32_MAX);
    for (std::size_t c = 0; c < p.levels_[k].size(); ++c) {
      for (std::uint32_t a : p.levels_[k][c].atoms) {
        if (a >= atom_count || map[a] != UINT32_MAX) {
          throw std::logic_error("partition: atom assigned twice or out of range");
        }
        map[a] = static_cast<std::uint32_t>(c);
      }
    }
  }
  return p;
}

void NestedPartition::validate() const {
  for (int k = 1; k <= depth(); ++k) {
    // exhaustive + disjoint: every atom mapped exactly once (from_levels
    // already rejects double assignment)
    for (std::size_t a = 0; a < atom_count_; ++a) {
      if (atom_cell_[k - 1][a] == UINT32_MAX) {
        throw std::logic_error("partition: level " + std::to_string(k) +
                               " misses atom " + std::to_string(a));
      }
    }
    if (k > 1) {
      for (const auto& cell : level(k)) {
        if (cell.parent < 0 ||
            static_cast<std::size_t>(cell.parent) >= level(k - 1).size()) {
          throw std::logic_error("partition: bad parent link at level " +
                                 std::to_string(k));
        }
        const auto& parent = level(k - 1)[cell.parent];
        // nesting: child atom set inside the parent atom set
        for (std::uint32_t a : cell.atoms) {
          if (!std::binary_search(parent.atoms.begin(), parent.atoms.end(), a)) {
            throw std::logic_error("partition: nesting violated at level " +
                                   std::to_string(k));
          }
        }
      }
    }
  }
}

NestedPartition nested_partition_from_ifs(const AtomicMeasure& mu, int depth) {
  if (!mu.has_ifs_addresses()) {
    throw std::invalid_argument("nested_partition_from_ifs: measure lacks cylinder addresses");
  }
  if (depth < 1 || depth > mu.ifs_generation()) {
    throw std::invalid_argument("nested_partition_from_ifs: depth must be 1..generation");
  }
  const int g = mu.ifs_generation();
  const double lam = mu.ifs_contraction();
  const auto& addr = mu.ifs_addresses();

  std::vector<std::vector<PartitionCell>> levels(depth);
  std::map<std::uint64_t, std::uint32_t> prev_cell_of_prefix;
  for (int k = 1; k <= depth; ++k) {
    std::map<std::uint64_t, std::uint32_t> cell_of_prefix;
    auto& cells = levels[k - 1];
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const std::uint64_t prefix = addr[i] >> (2 * (g - k));
      auto [it, fresh] = cell_of_prefix.emplace(prefix, cells.size());
      if (fresh) {
        PartitionCell c;
        c.key = prefix;
        c.diameter = std::sqrt(2.0) * std::pow(lam, k);
        c.parent = (k == 1) ? -1
                            : static_cast<std::int32_t>(prev_cell_of_prefix.at(prefix >> 2));
        cells.push_back(std::move(c));
      }
      cells[it->second].atoms.push_back(static_cast<std::uint32_t>(i));
    }
    prev_cell_of_prefix = std::move(cell_of_prefix);
  }
  return NestedPartition::from_levels(std::move(levels), mu.size());
}

NestedPartition nested_partition_dyadic(const AtomicMeasure& mu, int depth) {
  if (depth < 1) throw std::invalid_argument("nested_partition_dyadic: depth must be >= 1");
  if (depth > 20) throw std::invalid_argument("nested_partition_dyadic: depth > 20 unsupported");
  const int d = mu.dim();
  double lo[kMaxDim], hi[kMaxDim];
  mu.bbox(lo, hi);
  double side = 0.0;
  for (int a = 0; a < d; ++a) side = std::max(side, hi[a] - lo[a]);
  if (side <= 0.0) side = 1.0;

  // Each level refines the previous one (cube index doubles, then the atom's
  // half along each axis adds the low bit), so nesting holds by construction
  // and no atom can straddle a parent boundary through rounding.
  const std::size_t n = mu.size();
  std::vector<std::uint64_t> cube(n, 0);  // packed per-axis indices, 20 bits each
  std::vector<std::vector<PartitionCell>> levels(depth);
  std::map<std::uint64_t, std::uint32_t> prev_cell_of_key;
  for (int k = 1; k <= depth; ++k) {
    const double cell_side = side / static_cast<double>(std::uint64_t{1} << k);
    std::map<std::uint64_t, std::uint32_t> cell_of_key;
    auto& cells = levels[k - 1];
    for (std::size_t i = 0; i < n; ++i) {
      const double* p = mu.atom_ptr(i);
      std::uint64_t key = 0;
      for (int a = 0; a < d; ++a) {
        const std::uint64_t ca = (cube[i] >> (20 * (d - 1 - a))) & 0xFFFFF;
        const double mid =
            lo[a] + (2.0 * static_cast<double>(ca) + 1.0) * cell_side;
        const std::uint64_t child = 2 * ca + (p[a] >= mid ? 1 : 0);
        key = (key << 20) | child;
      }
      auto [it, fresh] = cell_of_key.emplace(key, cells.size());
      if (fresh) {
        PartitionCell c;
        c.key = key;
        c.diameter = std::sqrt(static_cast<double>(d)) * cell_side;
        if (k > 1) c.parent = static_cast<std::int32_t>(prev_cell_of_key.at(cube[i]));
        cells.push_back(std::move(c));
      }
      cells[it->second].atoms.push_back(static_cast<std::uint32_t>(i));
      cube[i] = key;
    }
    prev_cell_of_key = std::move(cell_of_key);
  }
  return NestedPartition::from_levels(std::move(levels), mu.size());
}

}  // namespace pvlab
