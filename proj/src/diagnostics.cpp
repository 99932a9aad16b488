#include "pvlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pvlab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Convergent: return "convergent";
    case Verdict::Oscillatory: return "oscillatory";
    case Verdict::Drifting: return "drifting";
    case Verdict::Undetermined: return "undetermined";
  }
  return "undetermined";
}

ConvergenceReport classify_convergence(std::span<const std::pair<double, double>> seq,
                                       double tail_fraction, double tol_cauchy,
                                       double tol_drift) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw std::invalid_argument("classify: tail_fraction must lie in (0, 1]");
  }
  if (!(tol_cauchy >= 0.0) || !(tol_drift >= 0.0)) {
    throw std::invalid_argument("classify: tolerances must be >= 0");
  }
  ConvergenceReport rep;
  const std::size_t J = seq.size();
  if (J < 8) {
    rep.reason = "fewer than 8 trusted points (got " + std::to_string(J) + ")";
    return rep;
  }
  for (const auto& [eps, v] : seq) {
    (void)eps;
    if (!std::isfinite(v)) {
      rep.reason = "sequence contains a non-finite value";
      return rep;
    }
  }

  const std::size_t m =
      std::min<std::size_t>(J, static_cast<std::size_t>(
                                   std::ceil(tail_fraction * static_cast<double>(J))));
  std::vector<double> tail(m);
  for (std::size_t i = 0; i < m; ++i) tail[i] = seq[J - m + i].second;
  rep.window = static_cast<int>(m);

  const auto [mn_it, mx_it] = std::minmax_element(tail.begin(), tail.end());
  const double spread = *mx_it - *mn_it;

  if (spread <= tol_cauchy) {
    Accumulator mean;
    for (double v : tail) mean.add(v);
    rep.verdict = Verdict::Convergent;
    rep.limit = mean.value() / static_cast<double>(m);
    return rep;
  }

  // least squares v ~ a + b * i over the tail
  double slope = 0.0;
  {
    const double tbar = 0.5 * static_cast<double>(m - 1);
    double vbar = 0.0;
    for (double v : tail) vbar += v;
    vbar /= static_cast<double>(m);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double dt = static_cast<double>(i) - tbar;
      num += dt * (tail[i] - vbar);
      den += dt * dt;
    }
    slope = den > 0.0 ? num / den : 0.0;
    double rmin = 0.0, rmax = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = tail[i] - (vbar + slope * (static_cast<double>(i) - tbar));
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    if (std::abs(slope) >= tol_drift && (rmax - rmin) < 0.5 * spread) {
      rep.verdict = Verdict::Drifting;
      rep.slope = slope;
      return rep;
    }
  }

  // alternation fraction of the tail increments
  if (m >= 4) {
    std::size_t alternations = 0;
    for (std::size_t i = 0; i + 2 < m; ++i) {
      const double d0 = tail[i + 1] - tail[i];
      const double d1 = tail[i + 2] - tail[i + 1];
      if (d0 * d1 < 0.0) ++alternations;
    }
    const double frac =
        static_cast<double>(alternations) / static_cast<double>(m - 2);
    if (frac >= 0.6) {
      rep.verdict = Verdict::Oscillatory;
      rep.amplitude = spread;
      return rep;
    }
  }

  std::ostringstream os;
  os << "tail spread " << format_g17(spread) << " exceeds tol_cauchy "
     << format_g17(tol_cauchy) << " without a drift or alternation pattern";
  rep.reason = os.str();
  return rep;
}

DensityProfile density_profile(const AtomicMeasure& mu, const HFunction& h,
                               const Point& x, std::span<const double> radii,
                               const EvalOptions& opts) {
  if (x.dim() != mu.dim()) throw std::invalid_argument("density_profile: dim mismatch");
  if (radii.empty()) throw std::invalid_argument("density_profile: empty radius ladder");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw std::invalid_argument("density_profile: radii > 0");
    if (i > 0 && !(radii[i] < radii[i - 1])) {
      throw std::invalid_argument("density_profile: radii must be strictly decreasing");
    }
  }
  if (!opts.override_trust_floor && radii.back() < mu.trust_floor()) {
    std::ostringstream os;
    os << "density_profile: smallest radius " << format_g17(radii.back())
       << " is below the trust floor " << format_g17(mu.trust_floor());
    throw TrustFloorError(os.str());
  }

  DensityProfile prof;
  prof.x = x;
  prof.growth_bound_ok = true;
  for (double r : radii) {
    DensityRow row;
    row.radius = r;
    row.mass = ball_mass(mu, Ball(x, r));
    row.ratio = row.mass / h(r);
    prof.max_ratio = std::max(prof.max_ratio, row.ratio);
    if (row.ratio > 1.0 + 1e-12) prof.growth_bound_ok = false;
    prof.rows.push_back(row);
  }
  prof.ratio_at_min_radius = prof.rows.back().ratio;
  return prof;
}

std::vector<DensityRow> density_envelope(std::span<const DensityProfile> profiles) {
  if (profiles.empty()) return {};
  const std::size_t R = profiles.front().rows.size();
  for (const auto& p : profiles) {
    if (p.rows.size() != R) {
      throw std::invalid_argument("density_envelope: profiles use different ladders");
    }
  }
  std::vector<DensityRow> env(R);
  for (std::size_t r = 0; r < R; ++r) {
    env[r].radius = profiles.front().rows[r].radius;
    for (const auto& p : profiles) {
      if (p.rows[r].radius != env[r].radius) {
        throw std::invalid_argument("density_envelope: radius ladders disagree");
      }
      env[r].mass = std::max(env[r].mass, p.rows[r].mass);
      env[r].ratio = std::max(env[r].ratio, p.rows[r].ratio);
    }
  }
  return env;
}

DoublingResult doubling_scale_search(const AtomicMeasure& mu, const Point& a,
                                     double eps, double C) {
  if (!(C > 1.0)) throw std::invalid_argument("doubling_scale_search: need C > 1");
  if (!(eps > 0.0)) throw std::invalid_argument("doubling_scale_search: eps > 0");
  const double diam = mu.bbox_diameter();
  if (diam > 0.0 && eps > diam) {
    throw std::invalid_argument("doubling_scale_search: eps exceeds the diameter");
  }
  DoublingResult res;
  for (int k = 0;; ++k) {
    const double r_in = std::ldexp(eps, -k);  // 2^-k eps, exact
    if (r_in < mu.trust_floor()) {
      res.k = k;  // first untrusted scale; found stays false
      return res;
    }
    const double m_in = ball_mass(mu, Ball(a, r_in));
    const double m_out = ball_mass(mu, Ball(a, 2.0 * r_in));
    if (m_out <= C * m_in) {
      res.found = true;
      res.k = k;
      res.inner_radius = r_in;
      res.inner_mass = m_in;
      res.outer_mass = m_out;
      return res;
    }
  }
}

WeakTypeReport weak_type_constant(const AtomicMeasure& mu, const KernelSpec& K,
                                  const DensityFunction& f, const TruncationGrid& grid,
                                  std::span<const double> t_grid,
                                  const EvalOptions& opts) {
  f.check_matches(mu);
  Accumulator l1;
  for (std::size_t i = 0; i < mu.size(); ++i) l1.add(std::abs(f[i]) * mu.weight(i));
  WeakTypeReport rep;
  rep.f_l1 = l1.value();
  if (!(rep.f_l1 > 0.0)) {
    throw std::invalid_argument("weak_type_constant: ||f||_1 must be > 0");
  }
  for (double t : t_grid) {
    if (!(t > 0.0)) throw std::invalid_argument("weak_type_constant: t grid must be > 0");
  }

  const std::vector<double> tstar = maximal_at_atoms(mu, K, f, grid, opts);
  for (double v : tstar) rep.tstar_max = std::max(rep.tstar_max, v);

  for (double t : t_grid) {
    Accumulator mass;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (tstar[i] > t) mass.add(mu.weight(i));
    }
    WeakTypeRow row;
    row.t = t;
    row.superlevel_mass = mass.value();
    row.product = t * row.superlevel_mass / rep.f_l1;
    rep.rows.push_back(row);
    if (row.product > rep.constant) {
      rep.constant = row.product;
      rep.t_at_max = t;
    }
  }
  return rep;
}

}  // namespace pvlab
