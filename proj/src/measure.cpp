#include "pvlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace pvlab {

namespace {

void check_weights(const std::vector<double>& w) {
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument("AtomicMeasure: weights must be finite and >= 0");
    }
  }
}

}  // namespace

AtomicMeasure::AtomicMeasure(int dim, std::vector<double> coords,
                             std::vector<double> weights, double resolution,
                             std::string label)
    : dim_(dim),
      coords_(std::move(coords)),
      weights_(std::move(weights)),
      resolution_(resolution),
      label_(std::move(label)) {
  if (dim_ < 1 || dim_ > kMaxDim) {
    throw std::invalid_argument("AtomicMeasure: dim must be 1..3");
  }
  if (coords_.size() != weights_.size() * static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument("AtomicMeasure: coords/weights length mismatch");
  }
  if (!(resolution_ > 0.0)) {
    throw std::invalid_argument("AtomicMeasure: resolution must be > 0");
  }
  check_weights(weights_);

  // merge exact duplicates by weight addition, preserving first-seen order
  std::map<std::vector<double>, std::size_t> seen;
  std::vector<double> mc;
  std::vector<double> mw;
  bool merged = false;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    std::vector<double> key(atom_ptr(i), atom_ptr(i) + dim_);
    auto [it, fresh] = seen.emplace(std::move(key), mw.size());
    if (fresh) {
      mc.insert(mc.end(), atom_ptr(i), atom_ptr(i) + dim_);
      mw.push_back(weights_[i]);
    } else {
      mw[it->second] += weights_[i];
      merged = true;
    }
  }
  if (merged) {
    coords_ = std::move(mc);
    weights_ = std::move(mw);
  }
}

double AtomicMeasure::total_mass() const {
  Accumulator acc;
  for (double w : weights_) acc.add(w);
  return acc.value();
}

void AtomicMeasure::bbox(double* lo, double* hi) const {
  for (int a = 0; a < dim_; ++a) {
    lo[a] = hi[a] = empty() ? 0.0 : coords_[a];
  }
  for (std::size_t i = 1; i < size(); ++i) {
    const double* p = atom_ptr(i);
    for (int a = 0; a < dim_; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
}

double AtomicMeasure::bbox_diameter() const {
  if (size() < 2) return 0.0;
  double lo[kMaxDim], hi[kMaxDim];
  bbox(lo, hi);
  double s = 0.0;
  for (int a = 0; a < dim_; ++a) s += (hi[a] - lo[a]) * (hi[a] - lo[a]);
  return std::sqrt(s);
}

void AtomicMeasure::set_ifs_provenance(std::vector<std::uint32_t> addresses,
                                       int generation, double contraction) {
  if (addresses.size() != size()) {
    throw std::invalid_argument("ifs provenance: address count mismatch");
  }
  ifs_addresses_ = std::move(addresses);
  ifs_generation_ = generation;
  ifs_contraction_ = contraction;
}

void AtomicMeasure::build_index() const {
  if (!index_ && size() > 0) index_ = std::make_shared<GridIndex>(*this);
}

// ---- GridIndex --------------------------------------------------------------

GridIndex::GridIndex(const AtomicMeasure& mu, std::size_t target_cells_per_dim) {
  dim_ = mu.dim();
  double hi[kMaxDim] = {0, 0, 0};
  mu.bbox(lo_, hi);
  double side = 0.0;
  for (int a = 0; a < dim_; ++a) side = std::max(side, hi[a] - lo_[a]);
  if (side <= 0.0) side = 1.0;

  // cell size ~ resolution, capped so fractal measures (tiny resolution,
  // O(N) occupied cells) do not blow up the grid
  std::size_t by_res = static_cast<std::size_t>(side / mu.resolution()) + 1;
  std::size_t cap = target_cells_per_dim;
  if (cap == 0) {
    cap = static_cast<std::size_t>(
              std::ceil(std::pow(static_cast<double>(mu.size()), 1.0 / dim_))) +
          1;
  }
  cells_per_dim_ = std::clamp<std::size_t>(std::min(by_res, cap), 1, 4096);
  cell_ = side / static_cast<double>(cells_per_dim_) * (1.0 + 1e-12);

  std::size_t ncells = 1;
  for (int a = 0; a < dim_; ++a) ncells *= cells_per_dim_;
  cells_.resize(ncells);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    cells_[cell_of(mu.atom_ptr(i))].push_back(static_cast<std::uint32_t>(i));
  }
}

std::size_t GridIndex::cell_of(const double* x) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) {
    double t = (x[a] - lo_[a]) / cell_;
    long c = static_cast<long>(std::floor(t));
    c = std::clamp<long>(c, 0, static_cast<long>(cells_per_dim_) - 1);
    idx = idx * cells_per_dim_ + static_cast<std::size_t>(c);
  }
  return idx;
}

std::vector<std::uint32_t> GridIndex::candidates(const Ball& b) const {
  long lo_c[kMaxDim], hi_c[kMaxDim];
  for (int a = 0; a < dim_; ++a) {
    lo_c[a] = static_cast<long>(std::floor((b.center[a] - b.radius - lo_[a]) / cell_));
    hi_c[a] = static_cast<long>(std::floor((b.center[a] + b.radius - lo_[a]) / cell_));
    lo_c[a] = std::clamp<long>(lo_c[a], 0, static_cast<long>(cells_per_dim_) - 1);
    hi_c[a] = std::clamp<long>(hi_c[a], 0, static_cast<long>(cells_per_dim_) - 1);
  }
  std::vector<std::uint32_t> out;
  long it[kMaxDim] = {0, 0, 0};
  for (int a = 0; a < dim_; ++a) it[a] = lo_c[a];
  while (true) {
    std::size_t idx = 0;
    for (int a = 0; a < dim_; ++a) idx = idx * cells_per_dim_ + static_cast<std::size_t>(it[a]);
    const auto& cell = cells_[idx];
    out.insert(out.end(), cell.begin(), cell.end());
    int a = dim_ - 1;
    while (a >= 0 && ++it[a] > hi_c[a]) {
      it[a] = lo_c[a];
      --a;
    }
    if (a < 0) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---- builders ---------------------------------------------------------------

AtomicMeasure build_cantor_measure(int generation, double contraction,
                                   std::size_t atom_budget) {
  if (generation < 0) throw std::invalid_argument("cantor: generation must be >= 0");
  if (!(contraction > 0.0 && contraction < 0.5)) {
    throw std::invalid_argument(
        "cantor: contraction must lie in (0, 1/2); pieces overlap otherwise");
  }
  if (generation > 15) throw std::invalid_argument("cantor: generation > 15 unsupported");
  const std::size_t n = std::size_t{1} << (2 * generation);  // 4^k
  if (n > atom_budget) {
    throw std::invalid_argument("cantor: 4^" + std::to_string(generation) +
                                " atoms exceed the atom budget of " +
                                std::to_string(atom_budget));
  }

  static const double ex[4] = {0.0, 1.0, 0.0, 1.0};
  static const double ey[4] = {0.0, 0.0, 1.0, 1.0};
  const double lam = contraction;

  std::vector<double> coords(2 * n);
  std::vector<std::uint32_t> addr(n);
  for (std::size_t code = 0; code < n; ++code) {
    double x = 0.0, y = 0.0, scale = 1.0 - lam;
    for (int level = 1; level <= generation; ++level) {
      const unsigned digit = (code >> (2 * (generation - level))) & 3u;
      x += scale * ex[digit];
      y += scale * ey[digit];
      scale *= lam;
    }
    coords[2 * code] = x;
    coords[2 * code + 1] = y;
    addr[code] = static_cast<std::uint32_t>(code);
  }
  const double w = 1.0 / static_cast<double>(n);
  std::ostringstream label;
  label << "cantor4(generation=" << generation << " contraction=" << format_g17(lam)
        << ")";
  AtomicMeasure mu(2, std::move(coords), std::vector<double>(n, w),
                   std::pow(lam, generation), label.str());
  mu.set_ifs_provenance(std::move(addr), generation, lam);
  mu.build_index();
  return mu;
}

AtomicMeasure build_uniform_segment(std::size_t n_atoms, const Point& a,
                                    const Point& b) {
  if (n_atoms < 2) throw std::invalid_argument("segment: need n_atoms >= 2");
  if (a.dim() != b.dim()) throw std::invalid_argument("segment: endpoint dim mismatch");
  const int d = a.dim();
  const double len = dist(a, b);
  if (!(len > 0.0)) throw std::invalid_argument("segment: endpoints coincide");

  std::vector<double> coords(n_atoms * d);
  for (std::size_t i = 0; i < n_atoms; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n_atoms);
    for (int k = 0; k < d; ++k) coords[i * d + k] = a[k] + t * (b[k] - a[k]);
  }
  const double w = len / static_cast<double>(n_atoms);
  std::ostringstream label;
  label << "segment(n=" << n_atoms << " len=" << format_g17(len) << ")";
  AtomicMeasure mu(d, std::move(coords), std::vector<double>(n_atoms, w), w,
                   label.str());
  mu.build_index();
  return mu;
}

AtomicMeasure build_uniform_cube(std::size_t n_per_side, int dim, double side,
                                 std::size_t atom_budget) {
  if (n_per_side < 1) throw std::invalid_argument("cube: n_per_side must be >= 1");
  if (dim < 1 || dim > 3) throw std::invalid_argument("cube: dim must be 1..3");
  if (!(side > 0.0)) throw std::invalid_argument("cube: side must be > 0");
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) {
    n *= n_per_side;
    if (n > atom_budget) {
      throw std::invalid_argument("cube: atom budget of " +
                                  std::to_string(atom_budget) + " exceeded");
    }
  }
  const double h = side / static_cast<double>(n_per_side);
  std::vector<double> coords(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rem = i;
    for (int a = dim - 1; a >= 0; --a) {
      const std::size_t ia = rem % n_per_side;
      rem /= n_per_side;
      coords[i * dim + a] = (static_cast<double>(ia) + 0.5) * h;
    }
  }
  double w = 1.0;
  for (int a = 0; a < dim; ++a) w *= h;
  std::ostringstream label;
  label << "cube(n=" << n_per_side << " dim=" << dim << " side=" << format_g17(side)
        << ")";
  AtomicMeasure mu(dim, std::move(coords), std::vector<double>(n, w), h, label.str());
  mu.build_index();
  return mu;
}

// ---- queries ----------------------------------------------------------------

double ball_mass_scan(const AtomicMeasure& mu, const Ball& b) {
  if (b.center.dim() != mu.dim()) {
    throw std::invalid_argument("ball_mass: ball/measure dim mismatch");
  }
  Accumulator acc;
  const double r2 = b.radius * b.radius;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (dist2(b.center.data(), mu.atom_ptr(i), mu.dim()) < r2) acc.add(mu.weight(i));
  }
  return acc.value();
}

double ball_mass(const AtomicMeasure& mu, const Ball& b) {
  if (b.center.dim() != mu.dim()) {
    throw std::invalid_argument("ball_mass: ball/measure dim mismatch");
  }
  const GridIndex* idx = mu.index();
  if (!idx) return ball_mass_scan(mu, b);
  Accumulator acc;
  const double r2 = b.radius * b.radius;
  for (std::uint32_t i : idx->candidates(b)) {
    if (dist2(b.center.data(), mu.atom_ptr(i), mu.dim()) < r2) acc.add(mu.weight(i));
  }
  return acc.value();
}

AtomicMeasure restrict(const AtomicMeasure& mu, const Ball& b, bool inside) {
  if (b.center.dim() != mu.dim()) {
    throw std::invalid_argument("restrict: ball/measure dim mismatch");
  }
  std::vector<double> coords;
  std::vector<double> weights;
  std::vector<std::uint32_t> addr;
  const double r2 = b.radius * b.radius;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const bool in = dist2(b.center.data(), mu.atom_ptr(i), mu.dim()) < r2;
    if (in == inside) {
      coords.insert(coords.end(), mu.atom_ptr(i), mu.atom_ptr(i) + mu.dim());
      weights.push_back(mu.weight(i));
      if (mu.has_ifs_addresses()) addr.push_back(mu.ifs_addresses()[i]);
    }
  }
  if (weights.empty()) {
    // empty restriction is legal; signal it through the label
    AtomicMeasure out(mu.dim(), {}, {}, mu.resolution(),
                      mu.label() + " | restrict[empty]");
    return out;
  }
  AtomicMeasure out(mu.dim(), std::move(coords), std::move(weights), mu.resolution(),
                    mu.label() + (inside ? " | inside " : " | outside "));
  if (mu.has_ifs_addresses()) {
    out.set_ifs_provenance(std::move(addr), mu.ifs_generation(), mu.ifs_contraction());
  }
  out.build_index();
  return out;
}

// ---- serialization ----------------------------------------------------------

void write_measure(std::ostream& os, const AtomicMeasure& mu) {
  os << "dim=" << mu.dim() << " resolution=" << format_g17(mu.resolution())
     << " label=" << mu.label() << "\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (int a = 0; a < mu.dim(); ++a) {
      os << format_g17(mu.atom_ptr(i)[a]) << ' ';
    }
    os << format_g17(mu.weight(i)) << "\n";
  }
}

void write_measure_file(const std::string& path, const AtomicMeasure& mu) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_measure(os, mu);
}

AtomicMeasure read_measure(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("measure file: empty input");
  int dim = 0;
  double resolution = 0.0;
  std::string label;
  {
    const auto dpos = header.find("dim=");
    const auto rpos = header.find("resolution=");
    const auto lpos = header.find("label=");
    if (dpos == std::string::npos || rpos == std::string::npos ||
        lpos == std::string::npos) {
      throw std::runtime_error("measure file: malformed header: " + header);
    }
    dim = std::stoi(header.substr(dpos + 4));
    resolution = std::stod(header.substr(rpos + 11));
    label = header.substr(lpos + 6);
  }
  std::vector<double> coords;
  std::vector<double> weights;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double v;
    std::vector<double> row;
    while (ls >> v) row.push_back(v);
    if (row.size() != static_cast<std::size_t>(dim) + 1) {
      throw std::runtime_error("measure file: bad row: " + line);
    }
    coords.insert(coords.end(), row.begin(), row.end() - 1);
    weights.push_back(row.back());
  }
  AtomicMeasure mu(dim, std::move(coords), std::move(weights), resolution, label);
  mu.build_index();
  return mu;
}

AtomicMeasure read_measure_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open measure file: " + path);
  return read_measure(is);
}

}  // namespace pvlab
