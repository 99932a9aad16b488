#include "pvlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pvlab {

KernelSpec KernelSpec::riesz(int m, int component_1based) {
  if (m < 1) throw std::invalid_argument("riesz: m must be a positive integer");
  if (component_1based < 1 || component_1based > kMaxDim) {
    throw std::invalid_argument("riesz: component must be 1..3");
  }
  KernelSpec k;
  k.family_ = KernelFamily::Riesz;
  k.m_ = m;
  k.component_ = component_1based;
  return k;
}

KernelSpec KernelSpec::hilbert() {
  KernelSpec k;
  k.family_ = KernelFamily::Hilbert;
  return k;
}

KernelSpec KernelSpec::huovinen_power(int kk, ComplexPart part) {
  if (kk < 1) throw std::invalid_argument("huovinen: k must be a positive integer");
  KernelSpec k;
  k.family_ = KernelFamily::HuovinenPower;
  k.k_ = kk;
  k.part_ = part;
  return k;
}

KernelSpec KernelSpec::huovinen_combo() {
  KernelSpec k;
  k.family_ = KernelFamily::HuovinenCombo;
  return k;
}

int KernelSpec::required_dim() const {
  switch (family_) {
    case KernelFamily::Hilbert: return 1;
    case KernelFamily::HuovinenPower:
    case KernelFamily::HuovinenCombo: return 2;
    case KernelFamily::Riesz: return 0;
  }
  return 0;
}

void KernelSpec::check_dim(int dim) const {
  const int req = required_dim();
  if (req != 0 && dim != req) {
    throw std::domain_error(describe() + " requires dim " + std::to_string(req) +
                            ", got " + std::to_string(dim));
  }
  if (family_ == KernelFamily::Riesz && component_ > dim) {
    throw std::domain_error(describe() + ": component exceeds dim " +
                            std::to_string(dim));
  }
}

double KernelSpec::operator()(const double* x, const double* y, int dim) const {
  switch (family_) {
    case KernelFamily::Riesz: {
      const double r2 = dist2(x, y, dim);
      const double num = x[component_ - 1] - y[component_ - 1];
      // |x-y|^(m+1) = (r^2)^((m+1)/2); keep even powers multiplication-only
      if (m_ == 1) return num / r2;
      double p = 1.0;
      const int half = (m_ + 1) / 2;
      for (int i = 0; i < half; ++i) p *= r2;
      if ((m_ + 1) % 2 != 0) p *= std::sqrt(r2);
      return num / p;
    }
    case KernelFamily::Hilbert:
      return 1.0 / (y[0] - x[0]);
    case KernelFamily::HuovinenPower: {
      const double zr = x[0] - y[0];
      const double zi = x[1] - y[1];
      const double n2 = zr * zr + zi * zi;
      // zeta^(2k-1): zeta * (zeta^2)^(k-1)
      double ar = zr, ai = zi;
      double sr = zr * zr - zi * zi, si = 2.0 * zr * zi;
      for (int i = 1; i < k_; ++i) {
        const double nr = ar * sr - ai * si;
        const double ni = ar * si + ai * sr;
        ar = nr;
        ai = ni;
      }
      double denom = 1.0;
      for (int i = 0; i < k_; ++i) denom *= n2;  // |zeta|^(2k)
      return (part_ == ComplexPart::Real ? ar : ai) / denom;
    }
    case KernelFamily::HuovinenCombo: {
      const double zr = x[0] - y[0];
      const double zi = x[1] - y[1];
      const double n2 = zr * zr + zi * zi;
      // Re(zeta/|zeta|^2) = zr / n2 ; Re(zeta^3/|zeta|^4) = (zr^3 - 3 zr zi^2)/n2^2
      return zr / n2 - (zr * zr * zr - 3.0 * zr * zi * zi) / (n2 * n2);
    }
  }
  return 0.0;
}

double KernelSpec::eval(const Point& x, const Point& y) const {
  if (x.dim() != y.dim()) throw std::invalid_argument("eval_kernel: dim mismatch");
  check_dim(x.dim());
  if (x == y) throw std::domain_error("eval_kernel: x == y is outside the domain");
  return (*this)(x.data(), y.data(), x.dim());
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  switch (family_) {
    case KernelFamily::Riesz: os << "riesz m=" << m_ << " i=" << component_; break;
    case KernelFamily::Hilbert: os << "hilbert"; break;
    case KernelFamily::HuovinenPower:
      os << "huovinen-power k=" << k_
         << " part=" << (part_ == ComplexPart::Real ? "re" : "im");
      break;
    case KernelFamily::HuovinenCombo: os << "huovinen-combo"; break;
  }
  return os.str();
}

// ---- HFunction ----------------------------------------------------------------

HFunction HFunction::power(double c, double s) {
  if (!(c > 0.0) || !(s > 0.0)) {
    throw std::invalid_argument("h power form: need c > 0 and s > 0");
  }
  HFunction h;
  h.c_ = c;
  h.s_ = s;
  return h;
}

HFunction HFunction::table(std::vector<std::pair<double, double>> knots) {
  if (knots.size() < 2) throw std::invalid_argument("h table: need >= 2 knots");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!(knots[i].first > 0.0) || !(knots[i].second > 0.0)) {
      throw std::invalid_argument("h table: knots must be positive");
    }
    if (i > 0 && (knots[i].first <= knots[i - 1].first ||
                  knots[i].second <= knots[i - 1].second)) {
      throw std::invalid_argument("h table: knots must be strictly increasing");
    }
  }
  HFunction h;
  h.knots_ = std::move(knots);
  return h;
}

double HFunction::operator()(double r) const {
  if (!(r > 0.0)) throw std::domain_error("h(r): r must be > 0");
  if (is_power()) return c_ * std::pow(r, s_);
  const auto& t = knots_;
  for (const auto& [kr, kh] : t) {
    if (r == kr) return kh;  // knots reproduce exactly
  }
  // locate segment; end segments extend by their own power law
  std::size_t j = 1;
  if (r <= t.front().first) {
    j = 1;
  } else if (r >= t.back().first) {
    j = t.size() - 1;
  } else {
    while (t[j].first < r) ++j;
  }
  const double lr0 = std::log(t[j - 1].first), lr1 = std::log(t[j].first);
  const double lh0 = std::log(t[j - 1].second), lh1 = std::log(t[j].second);
  const double u = (std::log(r) - lr0) / (lr1 - lr0);
  return std::exp(lh0 + u * (lh1 - lh0));
}

double HFunction::doubling_constant() const {
  if (is_power()) return std::exp2(s_);  // 2^s, exact for integer s
  double worst = 0.0;
  for (const auto& [r, hr] : knots_) {
    (void)hr;
    worst = std::max(worst, (*this)(2.0 * r) / (*this)(r));
    worst = std::max(worst, (*this)(r) / (*this)(0.5 * r));
  }
  return worst;
}

std::string HFunction::describe() const {
  if (is_power()) {
    return "power c=" + format_g17(c_) + " s=" + format_g17(s_);
  }
  return "table knots=" + std::to_string(knots_.size());
}

// ---- condition checkers --------------------------------------------------------

PairSampler::PairSampler(int dim, std::uint64_t seed, double box_lo, double box_hi,
                         double min_separation)
    : dim_(dim), lo_(box_lo), hi_(box_hi), min_sep_(min_separation), rng_(seed) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("PairSampler: dim 1..3");
  if (!(box_hi > box_lo)) throw std::invalid_argument("PairSampler: empty box");
}

std::pair<Point, Point> PairSampler::next() {
  while (true) {
    double a[kMaxDim], b[kMaxDim];
    for (int i = 0; i < dim_; ++i) {
      a[i] = uniform_double(rng_, lo_, hi_);
      b[i] = uniform_double(rng_, lo_, hi_);
    }
    if (dist(a, b, dim_) >= min_sep_) {
      return {Point::from({a, static_cast<std::size_t>(dim_)}),
              Point::from({b, static_cast<std::size_t>(dim_)})};
    }
  }
}

namespace {

// A handful of deterministic adversarial pairs: collinear along the first
// axis across scales, and nearly coincident points.
std::vector<std::pair<Point, Point>> adversarial_pairs(int dim) {
  std::vector<std::pair<Point, Point>> out;
  for (int e = -6; e <= 2; ++e) {
    const double d = std::ldexp(1.0, e);
    double a[kMaxDim] = {0, 0, 0}, b[kMaxDim] = {0, 0, 0};
    b[0] = d;
    out.push_back({Point::from({a, static_cast<std::size_t>(dim)}),
                   Point::from({b, static_cast<std::size_t>(dim)})});
    if (dim > 1) {
      double c[kMaxDim] = {0.5, 0.5, 0};
      double e2[kMaxDim] = {0.5 + d, 0.5 + d, 0};
      out.push_back({Point::from({c, static_cast<std::size_t>(dim)}),
                     Point::from({e2, static_cast<std::size_t>(dim)})});
    }
  }
  return out;
}

void consider(ConditionReport& rep, double v, const Point& x, const Point& y) {
  if (v > rep.supremum) {
    rep.supremum = v;
    rep.arg_x = x;
    rep.arg_y = y;
  }
}

}  // namespace

ConditionReport check_antisymmetry(const KernelSpec& k, PairSampler& sampler, int n) {
  if (n < 1) throw std::invalid_argument("check_antisymmetry: n >= 1");
  k.check_dim(sampler.dim());
  ConditionReport rep;
  auto probe = [&](const Point& x, const Point& y) {
    const double v =
        std::abs(k(x.data(), y.data(), x.dim()) + k(y.data(), x.data(), x.dim()));
    consider(rep, v, x, y);
  };
  for (int i = 0; i < n; ++i) {
    auto [x, y] = sampler.next();
    probe(x, y);
  }
  for (const auto& [x, y] : adversarial_pairs(sampler.dim())) probe(x, y);
  return rep;
}

ConditionReport check_size_condition(const KernelSpec& k, const HFunction& h,
                                     PairSampler& sampler, int n) {
  if (n < 1) throw std::invalid_argument("check_size_condition: n >= 1");
  k.check_dim(sampler.dim());
  ConditionReport rep;
  auto probe = [&](const Point& x, const Point& y) {
    const double d = dist(x, y);
    if (d <= 0.0) return;
    const double v = std::abs(k(x.data(), y.data(), x.dim())) * h(d);
    consider(rep, v, x, y);
  };
  for (int i = 0; i < n; ++i) {
    auto [x, y] = sampler.next();
    probe(x, y);
  }
  for (const auto& [x, y] : adversarial_pairs(sampler.dim())) probe(x, y);
  return rep;
}

ConditionReport check_smoothness_condition(const KernelSpec& k, const HFunction& h,
                                           PairSampler& sampler, int n) {
  if (n < 1) throw std::invalid_argument("check_smoothness_condition: n >= 1");
  const int dim = sampler.dim();
  k.check_dim(dim);
  ConditionReport rep;
  // triples (x, y, z) with d(x,y) > 2 d(y,z): draw (x, y), then z near y
  for (int i = 0; i < n; ++i) {
    auto [x, y] = sampler.next();
    const double dxy = dist(x, y);
    auto [u, v] = sampler.next();
    double z[kMaxDim];
    const double shrink = 0.25 * dxy / std::max(dist(u, v), 1e-300);
    for (int a = 0; a < dim; ++a) z[a] = y[a] + shrink * (v[a] - u[a]);
    const Point zp = Point::from({z, static_cast<std::size_t>(dim)});
    const double dyz = dist(y, zp);
    if (!(dxy > 2.0 * dyz) || dyz == 0.0) continue;
    const double diff =
        std::abs(k(x.data(), y.data(), dim) - k(x.data(), zp.data(), dim));
    consider(rep, diff * dxy * h(dxy) / dyz, x, y);
  }
  return rep;
}

}  // namespace pvlab
