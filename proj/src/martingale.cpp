#include "pvlab/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pvlab {

namespace {

// sum_{x in D} sum_{y notin D} K(x,y) f(y) w_y * (outer weight of x), with
// outer weight w_x (A_k) or f(x) w_x (S_k). Index order, nested accumulators.
double exterior_integral(const AtomicMeasure& mu, const KernelSpec& K,
                         const DensityFunction& f, const std::vector<std::uint32_t>& cell,
                         bool weight_by_f, const EvalOptions& opts) {
  const std::size_t n = mu.size();
  const int dim = mu.dim();
  std::vector<char> in_cell(n, 0);
  for (std::uint32_t a : cell) in_cell[a] = 1;

  Accumulator outer(opts.compensated);
  for (std::uint32_t a : cell) {
    const double* x = mu.atom_ptr(a);
    Accumulator inner(opts.compensated);
    for (std::size_t j = 0; j < n; ++j) {
      if (in_cell[j]) continue;
      inner.add(K(x, mu.atom_ptr(j), dim) * f[j] * mu.weight(j));
    }
    const double wx = weight_by_f ? f[a] * mu.weight(a) : mu.weight(a);
    outer.add(inner.value() * wx);
  }
  return outer.value();
}

// mass queries are always compensated, like ball_mass / total_mass
double cell_mu_mass(const AtomicMeasure& mu, const std::vector<std::uint32_t>& cell) {
  Accumulator acc;
  for (std::uint32_t a : cell) acc.add(mu.weight(a));
  return acc.value();
}

}  // namespace

WeightedMeasure::WeightedMeasure(const AtomicMeasure& mu, DensityFunction f)
    : mu_(&mu), f_(std::move(f)) {
  f_.check_matches(mu);
  if (!f_.is_one()) {
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (!(f_[i] >= 0.0)) {
        throw std::invalid_argument(
            "WeightedMeasure: density must be >= 0 at every atom");
      }
    }
  }
}

double WeightedMeasure::cell_mass(const PartitionCell& cell) const {
  Accumulator acc;
  for (std::uint32_t a : cell.atoms) acc.add(f_[a] * mu_->weight(a));
  return acc.value();
}

double WeightedMeasure::total() const {
  Accumulator acc;
  for (std::size_t i = 0; i < mu_->size(); ++i) acc.add(f_[i] * mu_->weight(i));
  return acc.value();
}

double s_k(const WeightedMeasure& nu, const KernelSpec& K, const NestedPartition& P,
           int k, std::uint32_t z, const EvalOptions& opts) {
  const AtomicMeasure& mu = nu.measure();
  K.check_dim(mu.dim());
  if (z >= mu.size()) throw std::domain_error("s_k: z is not an atom index");
  if (k < 1 || k > P.depth()) throw std::invalid_argument("s_k: level out of range");
  const PartitionCell& cell = P.cell_of(k, z);
  const double mass = nu.cell_mass(cell);
  if (mass == 0.0) return 0.0;  // stated convention for nu-null cells
  return exterior_integral(mu, K, nu.density(), cell.atoms, true, opts) / mass;
}

double a_k(const AtomicMeasure& mu, const KernelSpec& K, const DensityFunction& f,
           const NestedPartition& P, int k, std::uint32_t z, const EvalOptions& opts) {
  K.check_dim(mu.dim());
  f.check_matches(mu);
  if (z >= mu.size()) throw std::domain_error("a_k: z is not an atom index");
  if (k < 1 || k > P.depth()) throw std::invalid_argument("a_k: level out of range");
  const PartitionCell& cell = P.cell_of(k, z);
  const double mass = cell_mu_mass(mu, cell.atoms);
  if (mass == 0.0) return 0.0;
  return exterior_integral(mu, K, f, cell.atoms, false, opts) / mass;
}

MartingaleResidual check_martingale_property(const WeightedMeasure& nu,
                                             const KernelSpec& K,
                                             const NestedPartition& P, int k,
                                             const EvalOptions& opts) {
  const AtomicMeasure& mu = nu.measure();
  K.check_dim(mu.dim());
  if (k < 1 || k + 1 > P.depth()) {
    throw std::invalid_argument("check_martingale_property: need level k+1 <= depth");
  }
  const DensityFunction& f = nu.density();
  const int dim = mu.dim();

  const auto& parents = P.level(k);
  const auto& children = P.level(k + 1);
  std::vector<std::vector<std::uint32_t>> kids(parents.size());
  for (std::uint32_t c = 0; c < children.size(); ++c) {
    kids[children[c].parent].push_back(c);
  }

  std::vector<double> residual(parents.size(), 0.0);
  std::vector<double> scale(parents.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (long pi = 0; pi < static_cast<long>(parents.size()); ++pi) {
    const auto& ks = kids[static_cast<std::size_t>(pi)];
    // sum over ordered sibling pairs of int_{D_i} int_{D_j} K dnu dnu; these
    // are exactly the terms the child sums carry beyond the parent integral
    Accumulator acc(opts.compensated);
    Accumulator abs_acc(opts.compensated);
    for (std::uint32_t ci : ks) {
      for (std::uint32_t cj : ks) {
        if (ci == cj) continue;
        for (std::uint32_t a : children[ci].atoms) {
          const double* x = mu.atom_ptr(a);
          const double fa = f[a] * mu.weight(a);
          for (std::uint32_t b : children[cj].atoms) {
            const double v = K(x, mu.atom_ptr(b), dim) * f[b] * mu.weight(b) * fa;
            acc.add(v);
            abs_acc.add(std::abs(v));
          }
        }
      }
    }
    residual[static_cast<std::size_t>(pi)] = std::abs(acc.value());
    scale[static_cast<std::size_t>(pi)] = abs_acc.value();
  }

  MartingaleResidual out;
  for (std::size_t p = 0; p < parents.size(); ++p) {
    const double rel = scale[p] > 0.0 ? residual[p] / scale[p] : residual[p];
    if (rel > out.max_relative) {
      out.max_relative = rel;
      out.worst_parent = static_cast<std::int64_t>(p);
    }
    out.max_absolute = std::max(out.max_absolute, residual[p]);
  }
  return out;
}

MartingaleTrace martingale_trace(const AtomicMeasure& mu, const DensityFunction& f,
                                 const KernelSpec& K, const NestedPartition& P,
                                 std::uint32_t z, const EvalOptions& opts) {
  WeightedMeasure nu(mu, f);  // validates f >= 0
  MartingaleTrace trace;
  trace.atom = z;
  for (int k = 1; k <= P.depth(); ++k) {
    const PartitionCell& cell = P.cell_of(k, z);
    TraceLevel lv;
    lv.level = k;
    lv.cell_key = cell.key;
    lv.nu_mass = nu.cell_mass(cell);
    lv.mu_mass = cell_mu_mass(mu, cell.atoms);
    lv.s_value = s_k(nu, K, P, k, z, opts);
    lv.a_value = a_k(mu, K, f, P, k, z, opts);
    lv.gap = std::abs(lv.s_value - lv.a_value);
    trace.levels.push_back(lv);
  }
  const std::size_t L = trace.levels.size();
  trace.gap_nonincreasing_tail = true;
  for (std::size_t k = L >= 3 ? L - 3 : 0; k + 1 < L; ++k) {
    if (trace.levels[k + 1].gap > trace.levels[k].gap) {
      trace.gap_nonincreasing_tail = false;
    }
  }
  return trace;
}

L1BoundReport martingale_l1_bound(const WeightedMeasure& nu, const KernelSpec& K,
                                  const NestedPartition& P, int k,
                                  const EvalOptions& opts) {
  const AtomicMeasure& mu = nu.measure();
  K.check_dim(mu.dim());
  if (k < 1 || k > P.depth()) {
    throw std::invalid_argument("martingale_l1_bound: level out of range");
  }
  const DensityFunction& f = nu.density();

  Accumulator total(opts.compensated);
  for (const auto& cell : P.level(k)) {
    total.add(exterior_integral(mu, K, f, cell.atoms, true, opts));
  }

  L1BoundReport rep;
  rep.value = std::abs(total.value());
  Accumulator fl2(opts.compensated);
  for (std::size_t i = 0; i < mu.size(); ++i) fl2.add(f[i] * f[i] * mu.weight(i));
  rep.f_l2 = fl2.value();
  rep.norm_estimate = l2_norm_estimate(mu, K, mu.trust_floor()).value;
  rep.comparison_bound = 2.0 * rep.norm_estimate * rep.f_l2;
  return rep;
}

}  // namespace pvlab
