#include "pvlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pvlab {

namespace {

constexpr std::size_t kBlock = 512;

// Fixed-block parallel loop: fn(first, last) fills one partial per block;
// partials are combined serially in block order, so the result does not
// depend on the thread count.
template <class Fn>
double blocked_sum(std::size_t n, bool compensated, Fn&& block_fn) {
  if (n == 0) return 0.0;
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < static_cast<long>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    partial[static_cast<std::size_t>(b)] = block_fn(lo, hi);
  }
  Accumulator acc(compensated);
  for (double p : partial) acc.add(p);
  return acc.value();
}

void check_inputs(const AtomicMeasure& mu, const KernelSpec& K,
                  const DensityFunction& f) {
  K.check_dim(mu.dim());
  f.check_matches(mu);
}

void check_floor(const AtomicMeasure& mu, double eps, const EvalOptions& opts,
                 const char* who) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument(std::string(who) + ": eps must be > 0");
  }
  if (!opts.override_trust_floor && eps < mu.trust_floor()) {
    std::ostringstream os;
    os << who << ": eps = " << format_g17(eps) << " is below the trust floor "
       << format_g17(mu.trust_floor())
       << " (2 x resolution); below it the atom cloud no longer proxies its "
          "continuous target. Pass the override flag to force.";
    throw TrustFloorError(os.str());
  }
}

double truncated_unchecked(const AtomicMeasure& mu, const KernelSpec& K,
                           const DensityFunction& f, const double* x, double eps,
                           bool compensated) {
  const int dim = mu.dim();
  Accumulator acc(compensated);
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const double* y = mu.atom_ptr(j);
    const double d = dist(x, y, dim);
    if (d >= eps) acc.add(K(x, y, dim) * f[j] * mu.weight(j));
  }
  return acc.value();
}

}  // namespace

TruncationGrid TruncationGrid::geometric(double eps_max, double ratio, int count,
                                         double trust_floor, bool override_floor) {
  if (!(eps_max > 0.0)) throw std::invalid_argument("grid: eps_max must be > 0");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("grid: ratio must lie in (0, 1)");
  }
  if (count < 1) throw std::invalid_argument("grid: count must be >= 1");
  TruncationGrid g;
  g.trust_floor = trust_floor;
  g.override_floor = override_floor;
  g.epsilons.reserve(static_cast<std::size_t>(count));
  double e = eps_max;
  for (int j = 0; j < count; ++j) {
    g.epsilons.push_back(e);
    e *= ratio;
  }
  if (!override_floor && g.eps_min() < trust_floor) {
    std::ostringstream os;
    os << "grid: smallest rung " << format_g17(g.eps_min())
       << " is below the trust floor " << format_g17(trust_floor)
       << "; shorten the ladder or set the override flag";
    throw TrustFloorError(os.str());
  }
  return g;
}

double truncated(const AtomicMeasure& mu, const KernelSpec& K, const DensityFunction& f,
                 const Point& x, double eps, const EvalOptions& opts) {
  check_inputs(mu, K, f);
  if (x.dim() != mu.dim()) throw std::invalid_argument("truncated: point dim mismatch");
  check_floor(mu, eps, opts, "truncated");
  return truncated_unchecked(mu, K, f, x.data(), eps, opts.compensated);
}

MaximalResult maximal(const AtomicMeasure& mu, const KernelSpec& K,
                      const DensityFunction& f, const Point& x,
                      const TruncationGrid& grid, const EvalOptions& opts) {
  check_inputs(mu, K, f);
  if (x.dim() != mu.dim()) throw std::invalid_argument("maximal: point dim mismatch");
  if (grid.epsilons.empty()) throw std::invalid_argument("maximal: empty grid");

  // candidate radii: the grid rungs plus every atom distance in range (the
  // discrete sup over eps is attained there)
  std::vector<double> cand = grid.epsilons;
  const double lo = grid.eps_min(), hi = grid.eps_max();
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const double d = dist(x.data(), mu.atom_ptr(j), mu.dim());
    if (d >= lo && d <= hi) cand.push_back(d);
  }
  std::sort(cand.begin(), cand.end(), std::greater<>());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  MaximalResult best;
  best.argmax_eps = cand.front();
  for (double eps : cand) {
    const double v =
        std::abs(truncated_unchecked(mu, K, f, x.data(), eps, opts.compensated));
    if (v > best.value) {
      best.value = v;
      best.argmax_eps = eps;
    }
  }
  return best;
}

std::vector<double> maximal_at_atoms(const AtomicMeasure& mu, const KernelSpec& K,
                                     const DensityFunction& f,
                                     const TruncationGrid& grid,
                                     const EvalOptions& opts) {
  check_inputs(mu, K, f);
  if (grid.epsilons.empty()) throw std::invalid_argument("maximal_at_atoms: empty grid");
  const std::size_t n = mu.size();
  const int dim = mu.dim();
  const double lo = grid.eps_min(), hi = grid.eps_max();
  std::vector<double> out(n, 0.0);

#pragma omp parallel for schedule(dynamic)
  for (long ii = 0; ii < static_cast<long>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const double* x = mu.atom_ptr(i);
    struct Term {
      double d;
      std::uint32_t j;
      double value;
    };
    std::vector<Term> terms;
    terms.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double* y = mu.atom_ptr(j);
      const double d = dist(x, y, dim);
      terms.push_back({d, static_cast<std::uint32_t>(j),
                       K(x, y, dim) * f[j] * mu.weight(j)});
    }
    // descending distance, atom index breaks ties so the order (and hence
    // the compensated prefix) is deterministic
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
      return a.d > b.d || (a.d == b.d && a.j < b.j);
    });

    // walk groups of equal distance; T_eps equals the running prefix at each
    // group boundary, and stays constant between boundaries
    Accumulator prefix(opts.compensated);
    double best = 0.0;
    bool have = false;
    auto consider = [&](double v) {
      best = have ? std::max(best, v) : v;
      have = true;
    };
    std::size_t g = 0;
    while (g < terms.size()) {
      const double d = terms[g].d;
      if (d < lo) break;
      if (d < hi && !have) consider(std::abs(prefix.value()));  // plateau (d, hi]
      std::size_t e = g;
      while (e < terms.size() && terms[e].d == d) {
        prefix.add(terms[e].value);
        ++e;
      }
      if (d <= hi) consider(std::abs(prefix.value()));  // value at eps = d
      g = e;
    }
    if (!have) consider(std::abs(prefix.value()));  // no breakpoint in [lo, hi]
    out[i] = best;
  }
  return out;
}

std::vector<std::pair<double, double>> pv_sequence(const AtomicMeasure& mu,
                                                   const KernelSpec& K,
                                                   const DensityFunction& f,
                                                   const Point& x,
                                                   const TruncationGrid& grid,
                                                   const EvalOptions& opts) {
  EvalOptions o = opts;
  o.override_trust_floor = opts.override_trust_floor || grid.override_floor;
  std::vector<std::pair<double, double>> seq;
  seq.reserve(grid.epsilons.size());
  for (double eps : grid.epsilons) {
    seq.emplace_back(eps, truncated(mu, K, f, x, eps, o));
  }
  return seq;
}

double bilinear_pairing(const AtomicMeasure& mu, const KernelSpec& K,
                        const DensityFunction& f, const DensityFunction& g,
                        const EvalOptions& opts) {
  check_inputs(mu, K, f);
  g.check_matches(mu);
  const std::size_t n = mu.size();
  const int dim = mu.dim();
  const double s = blocked_sum(n, opts.compensated, [&](std::size_t lo, std::size_t hi) {
    Accumulator acc(opts.compensated);
    for (std::size_t i = lo; i < hi; ++i) {
      const double* xi = mu.atom_ptr(i);
      const double wi = mu.weight(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double* xj = mu.atom_ptr(j);
        acc.add(K(xi, xj, dim) * (f[i] * g[j] - f[j] * g[i]) * wi * mu.weight(j));
      }
    }
    return acc.value();
  });
  return 0.5 * s;
}

double ball_average(const AtomicMeasure& mu, const KernelSpec& K,
                    const DensityFunction& f, const Point& z, double r,
                    const EvalOptions& opts) {
  check_inputs(mu, K, f);
  if (z.dim() != mu.dim()) throw std::invalid_argument("ball_average: point dim mismatch");
  if (!(r > 0.0)) throw std::invalid_argument("ball_average: r must be > 0");
  const std::size_t n = mu.size();
  const int dim = mu.dim();

  std::vector<char> inside(n, 0);
  Accumulator mass(opts.compensated);
  for (std::size_t i = 0; i < n; ++i) {
    if (dist(z.data(), mu.atom_ptr(i), dim) < r) {
      inside[i] = 1;
      mass.add(mu.weight(i));
    }
  }
  const double mb = mass.value();
  if (mb <= 0.0) {
    std::ostringstream os;
    os << "ball_average: ball B(" << to_string(z) << ", " << format_g17(r)
       << ") carries no mass";
    throw std::domain_error(os.str());
  }

  // serial on purpose: the nested compensated sums keep exactly antisymmetric
  // configurations at exact zero
  Accumulator outer(opts.compensated);
  for (std::size_t i = 0; i < n; ++i) {
    if (!inside[i]) continue;
    const double* xi = mu.atom_ptr(i);
    Accumulator inner(opts.compensated);
    for (std::size_t j = 0; j < n; ++j) {
      if (inside[j]) continue;
      inner.add(K(xi, mu.atom_ptr(j), dim) * f[j] * mu.weight(j));
    }
    outer.add(inner.value() * mu.weight(i));
  }
  return outer.value() / mb;
}

Residual check_ball_cancellation(const AtomicMeasure& mu, const KernelSpec& K,
                                 const Ball& b, double eps, const EvalOptions& opts) {
  K.check_dim(mu.dim());
  if (b.center.dim() != mu.dim()) {
    throw std::invalid_argument("check_ball_cancellation: ball dim mismatch");
  }
  const int dim = mu.dim();
  std::vector<std::uint32_t> in;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (b.contains(mu.atom_ptr(i), dim)) in.push_back(static_cast<std::uint32_t>(i));
  }
  const std::size_t m = in.size();
  std::vector<double> partial_abs((m + kBlock - 1) / kBlock, 0.0);
  const double signed_sum =
      blocked_sum(m, opts.compensated, [&](std::size_t lo, std::size_t hi) {
        Accumulator acc(opts.compensated);
        Accumulator abs_acc(opts.compensated);
        for (std::size_t a = lo; a < hi; ++a) {
          const double* x = mu.atom_ptr(in[a]);
          const double wx = mu.weight(in[a]);
          for (std::size_t c = 0; c < m; ++c) {
            if (c == a) continue;
            const double* y = mu.atom_ptr(in[c]);
            if (dist(x, y, dim) < eps) continue;
            const double kv = K(x, y, dim) * wx * mu.weight(in[c]);
            acc.add(kv);
            abs_acc.add(std::abs(kv));
          }
        }
        partial_abs[lo / kBlock] = abs_acc.value();
        return acc.value();
      });
  Accumulator scale;
  for (double p : partial_abs) scale.add(p);
  return {std::abs(signed_sum), scale.value()};
}

Residual check_identity_2_2(const AtomicMeasure& mu, const KernelSpec& K, const Ball& b,
                            double eps, const EvalOptions& opts) {
  K.check_dim(mu.dim());
  if (b.center.dim() != mu.dim()) {
    throw std::invalid_argument("check_identity_2_2: ball dim mismatch");
  }
  const int dim = mu.dim();
  std::vector<std::uint32_t> in, out;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    (b.contains(mu.atom_ptr(i), dim) ? in : out).push_back(static_cast<std::uint32_t>(i));
  }
  // sum over (x in B, y in B^c, d >= eps) of K(x,y) w w plus the mirrored
  // ordered pairs; per-term antisymmetry makes the total vanish
  std::vector<double> partial_abs((in.size() + kBlock - 1) / kBlock, 0.0);
  const double signed_sum =
      blocked_sum(in.size(), opts.compensated, [&](std::size_t lo, std::size_t hi) {
        Accumulator acc(opts.compensated);
        Accumulator abs_acc(opts.compensated);
        for (std::size_t a = lo; a < hi; ++a) {
          const double* x = mu.atom_ptr(in[a]);
          const double wx = mu.weight(in[a]);
          for (std::uint32_t j : out) {
            const double* y = mu.atom_ptr(j);
            if (dist(x, y, dim) < eps) continue;
            const double wy = mu.weight(j);
            const double fwd = K(x, y, dim) * wx * wy;
            const double rev = K(y, x, dim) * wy * wx;
            acc.add(fwd);
            acc.add(rev);
            abs_acc.add(std::abs(fwd));
            abs_acc.add(std::abs(rev));
          }
        }
        partial_abs[lo / kBlock] = abs_acc.value();
        return acc.value();
      });
  Accumulator scale;
  for (double p : partial_abs) scale.add(p);
  return {std::abs(signed_sum), scale.value()};
}

NormEstimate l2_norm_estimate(const AtomicMeasure& mu, const KernelSpec& K, double eps,
                              double rel_tol, int max_iterations, std::uint64_t seed) {
  K.check_dim(mu.dim());
  if (!(eps > 0.0)) throw std::invalid_argument("l2_norm_estimate: eps must be > 0");
  const std::size_t n = mu.size();
  if (n < 2) return {0.0, true, 0};
  const int dim = mu.dim();

  std::vector<double> sw(n);
  for (std::size_t i = 0; i < n; ++i) sw[i] = std::sqrt(mu.weight(i));

  auto matvec = [&](const std::vector<double>& v, std::vector<double>& dst,
                    bool transpose) {
#pragma omp parallel for schedule(dynamic)
    for (long ii = 0; ii < static_cast<long>(n); ++ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      const double* xi = mu.atom_ptr(i);
      Accumulator acc;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double* xj = mu.atom_ptr(j);
        if (dist(xi, xj, dim) < eps) continue;
        const double kv = transpose ? K(xj, xi, dim) : K(xi, xj, dim);
        acc.add(kv * sw[i] * sw[j] * v[j]);
      }
      dst[i] = acc.value();
    }
  };

  std::mt19937_64 rng(seed);
  std::vector<double> v(n), u(n), t(n);
  NormEstimate est;
  for (int attempt = 0; attempt < 3; ++attempt) {
    for (double& c : v) c = unit_double(rng) - 0.5;
    double nv = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (nv == 0.0) continue;
    for (double& c : v) c /= nv;

    double sigma = 0.0;
    for (int it = 1; it <= max_iterations; ++it) {
      matvec(v, u, false);
      const double nu = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
      if (nu == 0.0) break;  // v in the kernel of M; retry with a fresh vector
      const double sigma_new = nu;  // ||Mv|| with ||v|| = 1
      matvec(u, t, true);
      double nt = std::sqrt(std::inner_product(t.begin(), t.end(), t.begin(), 0.0));
      if (nt == 0.0) break;
      for (std::size_t i = 0; i < n; ++i) v[i] = t[i] / nt;
      est.iterations = it;
      if (it > 1 && std::abs(sigma_new - sigma) <= rel_tol * std::max(sigma_new, 1e-300)) {
        est.value = sigma_new;
        est.converged = true;
        return est;
      }
      sigma = sigma_new;
    }
    if (sigma > 0.0) {
      // ran out of iterations: report the current Rayleigh value as a lower bound
      est.value = sigma;
      est.converged = false;
      return est;
    }
  }
  return {0.0, true, est.iterations};  // M annihilated every probe: zero matrix
}

}  // namespace pvlab
