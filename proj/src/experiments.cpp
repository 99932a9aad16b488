#include "pvlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "svg.hpp"

namespace fs = std::filesystem;

namespace pvlab {

namespace {

// ---- descriptor helpers -------------------------------------------------------

Point parse_point_csv(const std::string& s) {
  std::vector<double> coords;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    coords.push_back(std::stod(tok));
  }
  return Point::from(coords);
}

AtomicMeasure build_measure(const Descriptor& d, std::size_t budget) {
  if (d.name == "segment") {
    const long n = d.param_int("n", 0);
    const Point a = parse_point_csv(d.param("a").value_or("0"));
    const Point b = parse_point_csv(d.param("b").value_or("1"));
    return build_uniform_segment(static_cast<std::size_t>(n), a, b);
  }
  if (d.name == "cantor") {
    return build_cantor_measure(static_cast<int>(d.param_int("generation", -1)),
                                d.param_double("contraction", 0.25), budget);
  }
  if (d.name == "cube") {
    return build_uniform_cube(static_cast<std::size_t>(d.param_int("n", 0)),
                              static_cast<int>(d.param_int("dim", 2)),
                              d.param_double("side", 1.0), budget);
  }
  if (d.name == "file") {
    const auto path = d.param("path");
    if (!path) throw std::runtime_error("measure file: missing path=");
    return read_measure_file(*path);
  }
  throw std::runtime_error("unknown measure type: " + d.name);
}

// Same family at half resolution, for the two-resolution noise estimate.
std::optional<AtomicMeasure> build_coarse_measure(const Descriptor& d,
                                                  std::size_t budget) {
  Descriptor c = d;
  if (d.name == "segment") {
    c.params["n"] = std::to_string(std::max<long>(2, d.param_int("n", 0) / 2));
  } else if (d.name == "cantor") {
    c.params["generation"] = std::to_string(std::max<long>(0, d.param_int("generation", 0) - 1));
  } else if (d.name == "cube") {
    c.params["n"] = std::to_string(std::max<long>(1, d.param_int("n", 0) / 2));
  } else {
    return std::nullopt;
  }
  return build_measure(c, budget);
}

KernelSpec build_kernel(const Descriptor& d) {
  if (d.name == "riesz") {
    return KernelSpec::riesz(static_cast<int>(d.param_int("m", 1)),
                             static_cast<int>(d.param_int("i", 1)));
  }
  if (d.name == "hilbert") return KernelSpec::hilbert();
  if (d.name == "huovinen-power") {
    const auto part = d.param("part").value_or("re");
    if (part != "re" && part != "im") {
      throw std::runtime_error("huovinen-power: part must be re or im");
    }
    return KernelSpec::huovinen_power(
        static_cast<int>(d.param_int("k", 1)),
        part == "re" ? ComplexPart::Real : ComplexPart::Imag);
  }
  if (d.name == "huovinen-combo") return KernelSpec::huovinen_combo();
  throw std::runtime_error("unknown kernel name: " + d.name);
}

HFunction build_h(const Descriptor& d) {
  if (d.name == "power") {
    return HFunction::power(d.param_double("c", 1.0), d.param_double("s", 1.0));
  }
  if (d.name == "table") {
    const auto rs = d.param("r");
    const auto vs = d.param("v");
    if (!rs || !vs) throw std::runtime_error("h table: need r=.. and v=.. lists");
    std::vector<double> r, v;
    std::istringstream ris(*rs), vis(*vs);
    std::string tok;
    while (std::getline(ris, tok, ',')) r.push_back(std::stod(tok));
    while (std::getline(vis, tok, ',')) v.push_back(std::stod(tok));
    if (r.size() != v.size()) throw std::runtime_error("h table: r/v length mismatch");
    std::vector<std::pair<double, double>> knots;
    for (std::size_t i = 0; i < r.size(); ++i) knots.emplace_back(r[i], v[i]);
    return HFunction::table(std::move(knots));
  }
  throw std::runtime_error("unknown h form: " + d.name);
}

DensityFunction build_density(const Descriptor& d, const AtomicMeasure& mu) {
  if (d.name == "one") return DensityFunction::one();
  if (d.name == "affine") {
    const double c0 = d.param_double("c0", 0.0);
    const double ca[3] = {d.param_double("cx", 0.0), d.param_double("cy", 0.0),
                          d.param_double("cz", 0.0)};
    std::vector<double> v(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
      double s = c0;
      for (int a = 0; a < mu.dim(); ++a) s += ca[a] * mu.atom_ptr(i)[a];
      v[i] = s;
    }
    return DensityFunction::of(std::move(v));
  }
  if (d.name == "indicator") {
    const int axis = static_cast<int>(d.param_int("axis", 1));
    if (axis < 1 || axis > mu.dim()) {
      throw std::runtime_error("indicator density: axis out of range");
    }
    const double below = d.param_double("below", 0.5);
    std::vector<double> v(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
      v[i] = mu.atom_ptr(i)[axis - 1] < below ? 1.0 : 0.0;
    }
    return DensityFunction::of(std::move(v));
  }
  throw std::runtime_error("unknown density form: " + d.name);
}

std::vector<double> geometric_ladder(double vmax, double ratio, int count) {
  if (!(vmax > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1) {
    throw std::runtime_error("ladder: need max > 0, ratio in (0,1), count >= 1");
  }
  std::vector<double> out;
  double v = vmax;
  for (int j = 0; j < count; ++j) {
    out.push_back(v);
    v *= ratio;
  }
  return out;
}

// ---- query selection ------------------------------------------------------------

struct Query {
  Point x;
  long atom = -1;  // atom index when the query is an atom
};

long nearest_atom(const AtomicMeasure& mu, const Point& x) {
  long best = -1;
  double bd = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double d = dist(x.data(), mu.atom_ptr(i), mu.dim());
    if (best < 0 || d < bd) {
      best = static_cast<long>(i);
      bd = d;
    }
  }
  return best;
}

// Per-kind ladder defaults, shared between validate() and run() so the static
// floor checks see the same numbers the run will use.
struct GridDefaults {
  double eps_max = 0.5, eps_ratio = 0.5;
  int eps_count = 12;
  double r_max = 0.25, r_ratio = 0.5;
  int r_count = 8;
};

GridDefaults grid_defaults(const std::string& kind) {
  GridDefaults g;
  if (kind == "counterexample-cantor") {
    g.eps_max = 0.9;
    g.eps_ratio = 0.25;
    g.eps_count = 7;
    g.r_max = 0.225;
    g.r_ratio = 0.25;
    g.r_count = 5;
  }
  return g;
}

std::vector<Query> select_queries(const KeyValueConfig& cfg, const AtomicMeasure& mu,
                                  std::uint64_t seed, bool want_atoms) {
  const std::string mode = cfg.get_or("query", "mode", "random-atoms");
  std::vector<Query> out;
  if (mode == "explicit") {
    const auto pts = cfg.get("query", "points");
    if (!pts) throw std::runtime_error("[query] points required for explicit mode");
    std::istringstream is(*pts);
    std::string tok;
    while (std::getline(is, tok, ';')) {
      // each point: whitespace-separated coordinates
      std::istringstream ps(tok);
      std::vector<double> coords;
      double c;
      while (ps >> c) coords.push_back(c);
      if (coords.empty()) continue;
      Query q;
      q.x = Point::from(coords);
      if (q.x.dim() != mu.dim()) {
        throw std::runtime_error("[query] points: dimension mismatch");
      }
      if (want_atoms) {
        q.atom = nearest_atom(mu, q.x);
        q.x = mu.atom(static_cast<std::size_t>(q.atom));
      }
      out.push_back(q);
    }
    return out;
  }
  if (mode == "all-atoms") {
    out.reserve(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
      out.push_back({mu.atom(i), static_cast<long>(i)});
    }
    return out;
  }
  if (mode == "random-atoms") {
    const long count = cfg.get_int("query", "count", 50);
    const double margin = cfg.get_double("query", "interior_margin", 0.0);
    double lo[kMaxDim], hi[kMaxDim];
    mu.bbox(lo, hi);
    std::vector<std::uint32_t> eligible;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      bool ok = true;
      for (int a = 0; a < mu.dim(); ++a) {
        const double ext = hi[a] - lo[a];
        const double c = mu.atom_ptr(i)[a];
        if (c < lo[a] + margin * ext || c > hi[a] - margin * ext) ok = false;
      }
      if (ok) eligible.push_back(static_cast<std::uint32_t>(i));
    }
    if (eligible.empty()) return out;
    std::mt19937_64 rng(seed);
    const std::size_t take = std::min<std::size_t>(eligible.size(),
                                                   static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + bounded_uint(rng, eligible.size() - i);
      std::swap(eligible[i], eligible[j]);
      out.push_back(
          {mu.atom(eligible[i]), static_cast<long>(eligible[i])});
    }
    return out;
  }
  throw std::runtime_error("unknown query mode: " + mode);
}

// ---- output sink -----------------------------------------------------------------

class OutputSink {
 public:
  OutputSink(fs::path dir, std::string kind, std::uint64_t config_checksum, bool plot)
      : dir_(std::move(dir)),
        kind_(std::move(kind)),
        checksum_(config_checksum),
        plot_(plot) {
    fs::create_directories(dir_);
  }

  std::string csv_header() const {
    return "# pvlab " + std::string(kVersion) + " kind=" + kind_ +
           " config=" + hex64(checksum_) +
           " units=ambient-coordinate-lengths,measure-mass\n";
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
    os << content;
    checksums_[name] = hex64(fnv1a64(content));
  }

  void plot_lines(const std::string& name, const std::string& title,
                  const std::string& xlabel, const std::string& ylabel,
                  const std::vector<SvgSeries>& series, bool log_x) {
    if (!plot_) return;
    write(name, render_svg(title, xlabel, ylabel, series, log_x));
  }

  const std::map<std::string, std::string>& checksums() const { return checksums_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::string kind_;
  std::uint64_t checksum_;
  bool plot_;
  std::map<std::string, std::string> checksums_;
};

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  return out + "\"";
}

// ---- shared experiment context ----------------------------------------------------

struct Ctx {
  const KeyValueConfig& cfg;
  EvalOptions opts;
  std::uint64_t seed;
  std::size_t atom_budget;
  Descriptor measure_desc;
  AtomicMeasure mu;
  KernelSpec kernel;
  HFunction h;
  OutputSink sink;
  GridDefaults gdef;

  TruncationGrid eps_grid() const {
    return TruncationGrid::geometric(
        cfg.get_double("grid", "eps_max", gdef.eps_max),
        cfg.get_double("grid", "eps_ratio", gdef.eps_ratio),
        static_cast<int>(cfg.get_int("grid", "eps_count", gdef.eps_count)),
        mu.trust_floor(), opts.override_trust_floor);
  }
  std::vector<double> r_ladder() const {
    return geometric_ladder(cfg.get_double("grid", "r_max", gdef.r_max),
                            cfg.get_double("grid", "r_ratio", gdef.r_ratio),
                            static_cast<int>(cfg.get_int("grid", "r_count", gdef.r_count)));
  }
};

struct ClassifySpec {
  double tail_fraction = 0.5;
  bool auto_tol = true;
  double tol_cauchy = 0.0;  // when !auto_tol
  double tol_drift = 0.0;
};

ClassifySpec read_classify(const KeyValueConfig& cfg) {
  ClassifySpec cs;
  cs.tail_fraction = cfg.get_double("classify", "tail_fraction", 0.5);
  const std::string tc = cfg.get_or("classify", "tol_cauchy", "auto");
  const std::string td = cfg.get_or("classify", "tol_drift", "auto");
  if (tc == "auto") {
    cs.auto_tol = true;
  } else {
    cs.auto_tol = false;
    cs.tol_cauchy = std::stod(tc);
    cs.tol_drift = (td == "auto") ? cs.tol_cauchy : std::stod(td);
  }
  return cs;
}

// Two-resolution noise estimate: the tolerance for one query point is 10x the
// fine-vs-coarse difference at the smallest rung that the half-resolution
// measure can calibrate. Near its own trust floor the comparison measures the
// coarse error, not the fine one, so the anchor keeps a factor 4 of margin.
struct NoiseProbe {
  std::optional<AtomicMeasure> coarse;
  DensityFunction f_coarse;
  double ref_eps = 0.0;

  double tol_at(const Ctx& ctx, const DensityFunction& f_fine, const Point& x) const {
    if (!coarse) return 0.0;
    EvalOptions o = ctx.opts;
    o.override_trust_floor = true;
    const double a = truncated(ctx.mu, ctx.kernel, f_fine, x, ref_eps, o);
    const double b = truncated(*coarse, ctx.kernel, f_coarse, x, ref_eps, o);
    return 10.0 * std::abs(a - b);
  }
};

NoiseProbe make_noise_probe(const Ctx& ctx, const Descriptor& density_desc,
                            double grid_eps_min) {
  NoiseProbe probe;
  probe.coarse = build_coarse_measure(ctx.measure_desc, ctx.atom_budget);
  if (probe.coarse) {
    probe.f_coarse = build_density(density_desc, *probe.coarse);
    probe.ref_eps = std::max(grid_eps_min, 4.0 * probe.coarse->trust_floor());
  }
  return probe;
}

std::string opt_str(const std::optional<double>& v) {
  return v ? format_g17(*v) : std::string();
}

// ---- pv-convergence ---------------------------------------------------------------

struct PvResult {
  std::vector<std::vector<std::pair<double, double>>> sequences;
  std::vector<ConvergenceReport> reports;
  std::vector<double> tol_cauchy, tol_drift;
};

PvResult run_pv_core(const Ctx& ctx, const std::vector<Query>& queries,
                     const TruncationGrid& grid, const DensityFunction& f,
                     const ClassifySpec& cs, const Descriptor& density_desc) {
  PvResult res;
  const std::size_t P = queries.size();
  res.sequences.resize(P);
  res.reports.resize(P);
  res.tol_cauchy.assign(P, cs.tol_cauchy);
  res.tol_drift.assign(P, cs.tol_drift);

  NoiseProbe probe;
  if (cs.auto_tol) probe = make_noise_probe(ctx, density_desc, grid.eps_min());

#pragma omp parallel for schedule(dynamic)
  for (long qi = 0; qi < static_cast<long>(P); ++qi) {
    const std::size_t q = static_cast<std::size_t>(qi);
    res.sequences[q] = pv_sequence(ctx.mu, ctx.kernel, f, queries[q].x, grid, ctx.opts);
    if (cs.auto_tol) {
      const double tol = probe.tol_at(ctx, f, queries[q].x);
      res.tol_cauchy[q] = tol;
      res.tol_drift[q] = tol;
    }
    res.reports[q] = classify_convergence(res.sequences[q], cs.tail_fraction,
                                          res.tol_cauchy[q], res.tol_drift[q]);
  }
  return res;
}

void emit_pv_csv(Ctx& ctx, const std::vector<Query>& queries, const PvResult& res) {
  std::ostringstream pv;
  pv << ctx.sink.csv_header() << "point,eps,value\n";
  std::vector<SvgSeries> series;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    SvgSeries s;
    s.label = "p" + std::to_string(q);
    for (const auto& [eps, v] : res.sequences[q]) {
      pv << q << ',' << format_g17(eps) << ',' << format_g17(v) << "\n";
      s.points.emplace_back(eps, v);
    }
    series.push_back(std::move(s));
  }
  ctx.sink.write("pv.csv", pv.str());
  ctx.sink.plot_lines("pv.svg", "truncated operator along the eps ladder", "eps",
                      "T_eps(f)", series, true);

  std::ostringstream vd;
  vd << ctx.sink.csv_header() << "point,atom";
  for (int a = 1; a <= ctx.mu.dim(); ++a) vd << ",x" << a;
  vd << ",verdict,limit,amplitude,slope,window,tol_cauchy,tol_drift,reason\n";
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto& r = res.reports[q];
    vd << q << ',' << queries[q].atom;
    for (int a = 0; a < ctx.mu.dim(); ++a) vd << ',' << format_g17(queries[q].x[a]);
    vd << ',' << to_string(r.verdict) << ',' << opt_str(r.limit) << ','
       << opt_str(r.amplitude) << ',' << opt_str(r.slope) << ',' << r.window << ','
       << format_g17(res.tol_cauchy[q]) << ',' << format_g17(res.tol_drift[q]) << ','
       << csv_quote(r.reason) << "\n";
  }
  ctx.sink.write("verdicts.csv", vd.str());
}

std::map<std::string, int> verdict_tally(const PvResult& res) {
  std::map<std::string, int> tally{{"convergent", 0},
                                   {"oscillatory", 0},
                                   {"drifting", 0},
                                   {"undetermined", 0}};
  for (const auto& r : res.reports) ++tally[to_string(r.verdict)];
  return tally;
}

void run_pv_convergence(Ctx& ctx) {
  const auto grid = ctx.eps_grid();
  const Descriptor fd = Descriptor::parse(ctx.cfg.get_or("density", "f", "one"));
  const DensityFunction f = build_density(fd, ctx.mu);
  const auto queries = select_queries(ctx.cfg, ctx.mu, ctx.seed, false);
  const ClassifySpec cs = read_classify(ctx.cfg);

  const PvResult res = run_pv_core(ctx, queries, grid, f, cs, fd);
  emit_pv_csv(ctx, queries, res);

  std::ostringstream sum;
  sum << "kind = pv-convergence\natoms = " << ctx.mu.size()
      << "\nqueries = " << queries.size() << "\n";
  for (const auto& [verdict, count] : verdict_tally(res)) {
    sum << "verdict_" << verdict << " = " << count << "\n";
  }
  ctx.sink.write("summary.txt", sum.str());
}

// ---- ball-average -----------------------------------------------------------------

void run_ball_average(Ctx& ctx) {
  const auto radii = ctx.r_ladder();
  if (!ctx.opts.override_trust_floor && radii.back() < ctx.mu.trust_floor()) {
    throw TrustFloorError("ball-average: smallest radius " + format_g17(radii.back()) +
                          " is below the trust floor " +
                          format_g17(ctx.mu.trust_floor()));
  }
  const Descriptor fd = Descriptor::parse(ctx.cfg.get_or("density", "f", "one"));
  const DensityFunction f = build_density(fd, ctx.mu);
  const auto queries = select_queries(ctx.cfg, ctx.mu, ctx.seed, false);

  struct Row {
    double value = 0.0, mass = 0.0;
    bool empty = false;
  };
  std::vector<std::vector<Row>> rows(queries.size(),
                                     std::vector<Row>(radii.size()));
#pragma omp parallel for schedule(dynamic)
  for (long qi = 0; qi < static_cast<long>(queries.size()); ++qi) {
    const std::size_t q = static_cast<std::size_t>(qi);
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
      Row& row = rows[q][ri];
      row.mass = ball_mass(ctx.mu, Ball(queries[q].x, radii[ri]));
      if (row.mass <= 0.0) {
        row.empty = true;
      } else {
        row.value = ball_average(ctx.mu, ctx.kernel, f, queries[q].x, radii[ri], ctx.opts);
      }
    }
  }

  std::ostringstream os;
  os << ctx.sink.csv_header() << "point,r,value,ball_mass,empty\n";
  std::vector<SvgSeries> series;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    SvgSeries s;
    s.label = "p" + std::to_string(q);
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
      const Row& row = rows[q][ri];
      os << q << ',' << format_g17(radii[ri]) << ','
         << (row.empty ? std::string() : format_g17(row.value)) << ','
         << format_g17(row.mass) << ',' << (row.empty ? 1 : 0) << "\n";
      if (!row.empty) s.points.emplace_back(radii[ri], row.value);
    }
    series.push_back(std::move(s));
  }
  ctx.sink.write("avg.csv", os.str());
  ctx.sink.plot_lines("avg.svg", "ball average along the r ladder", "r", "average",
                      series, true);

  std::ostringstream sum;
  sum << "kind = ball-average\natoms = " << ctx.mu.size()
      << "\nqueries = " << queries.size() << "\nr_min = " << format_g17(radii.back())
      << "\n";
  for (std::size_t q = 0; q < queries.size(); ++q) {
    sum << "final_value_p" << q << " = "
        << (rows[q].back().empty ? std::string("empty") : format_g17(rows[q].back().value))
        << "\n";
  }
  ctx.sink.write("summary.txt", sum.str());
}

// ---- martingale -------------------------------------------------------------------

NestedPartition build_partition(const Ctx& ctx) {
  const std::string kind = ctx.cfg.get_or("grid", "partition", "dyadic");
  const int depth = static_cast<int>(ctx.cfg.get_int("grid", "depth", 6));
  if (kind == "ifs") return nested_partition_from_ifs(ctx.mu, depth);
  if (kind == "dyadic") return nested_partition_dyadic(ctx.mu, depth);
  throw std::runtime_error("unknown partition kind: " + kind);
}

void run_martingale(Ctx& ctx) {
  const NestedPartition P = build_partition(ctx);
  const Descriptor fd = Descriptor::parse(ctx.cfg.get_or("density", "f", "one"));
  const DensityFunction f = build_density(fd, ctx.mu);
  WeightedMeasure nu(ctx.mu, f);
  const auto queries = select_queries(ctx.cfg, ctx.mu, ctx.seed, true);

  std::vector<MartingaleTrace> traces(queries.size());
#pragma omp parallel for schedule(dynamic)
  for (long qi = 0; qi < static_cast<long>(queries.size()); ++qi) {
    const std::size_t q = static_cast<std::size_t>(qi);
    traces[q] = martingale_trace(ctx.mu, f, ctx.kernel, P,
                                 static_cast<std::uint32_t>(queries[q].atom), ctx.opts);
  }

  std::ostringstream tr;
  tr << ctx.sink.csv_header()
     << "point,level,cell_key,nu_mass,mu_mass,s_k,a_k,gap\n";
  std::vector<SvgSeries> series;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    SvgSeries s;
    s.label = "p" + std::to_string(q);
    for (const auto& lv : traces[q].levels) {
      tr << q << ',' << lv.level << ',' << lv.cell_key << ','
         << format_g17(lv.nu_mass) << ',' << format_g17(lv.mu_mass) << ','
         << format_g17(lv.s_value) << ',' << format_g17(lv.a_value) << ','
         << format_g17(lv.gap) << "\n";
      s.points.emplace_back(lv.level, lv.a_value);
    }
    series.push_back(std::move(s));
  }
  ctx.sink.write("trace.csv", tr.str());
  ctx.sink.plot_lines("trace.svg", "martingale averages A_k along the levels", "level",
                      "A_k(f)", series, false);

  std::ostringstream rs;
  rs << ctx.sink.csv_header() << "level,max_relative,max_absolute,worst_parent\n";
  std::vector<SvgSeries> rseries(1);
  rseries[0].label = "max relative residual (log10)";
  for (int k = 1; k + 1 <= P.depth(); ++k) {
    const auto r = check_martingale_property(nu, ctx.kernel, P, k, ctx.opts);
    rs << k << ',' << format_g17(r.max_relative) << ',' << format_g17(r.max_absolute)
       << ',' << r.worst_parent << "\n";
    rseries[0].points.emplace_back(k, std::log10(std::max(r.max_relative, 1e-18)));
  }
  ctx.sink.write("residuals.csv", rs.str());
  ctx.sink.plot_lines("residuals.svg", "martingale property residuals", "level",
                      "log10 relative residual", rseries, false);

  std::ostringstream sum;
  sum << "kind = martingale\natoms = " << ctx.mu.size() << "\ndepth = " << P.depth()
      << "\nqueries = " << queries.size() << "\n";
  for (std::size_t q = 0; q < queries.size(); ++q) {
    sum << "gap_nonincreasing_p" << q << " = "
        << (traces[q].gap_nonincreasing_tail ? "true" : "false") << "\n";
  }
  ctx.sink.write("summary.txt", sum.str());
}

// ---- density ----------------------------------------------------------------------

void run_density(Ctx& ctx) {
  const auto radii = ctx.r_ladder();
  const auto queries = select_queries(ctx.cfg, ctx.mu, ctx.seed, false);
  const double vanish_threshold =
      ctx.cfg.get_double("density", "vanish_threshold", 0.1);

  std::vector<DensityProfile> profiles(queries.size());
#pragma omp parallel for schedule(dynamic)
  for (long qi = 0; qi < static_cast<long>(queries.size()); ++qi) {
    const std::size_t q = static_cast<std::size_t>(qi);
    profiles[q] = density_profile(ctx.mu, ctx.h, queries[q].x, radii, ctx.opts);
  }
  const auto envelope = density_envelope(profiles);

  std::ostringstream os;
  os << ctx.sink.csv_header() << "point,r,mass,ratio\n";
  std::vector<SvgSeries> series;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    SvgSeries s;
    s.label = "p" + std::to_string(q);
    for (const auto& row : profiles[q].rows) {
      os << q << ',' << format_g17(row.radius) << ',' << format_g17(row.mass) << ','
         << format_g17(row.ratio) << "\n";
      s.points.emplace_back(row.radius, row.ratio);
    }
    series.push_back(std::move(s));
  }
  SvgSeries env;
  env.label = "envelope";
  for (const auto& row : envelope) {
    os << "-1," << format_g17(row.radius) << ',' << format_g17(row.mass) << ','
       << format_g17(row.ratio) << "\n";
    env.points.emplace_back(row.radius, row.ratio);
  }
  series.push_back(std::move(env));
  ctx.sink.write("density.csv", os.str());
  ctx.sink.plot_lines("density.svg", "density ratio mu(B(x,r)) / h(r)", "r", "ratio",
                      series, true);

  int vanish_count = 0;
  bool growth_all = true;
  double min_ratio_at_min = profiles.empty() ? 0.0 : profiles[0].ratio_at_min_radius;
  for (const auto& p : profiles) {
    if (p.ratio_at_min_radius <= vanish_threshold) ++vanish_count;
    growth_all = growth_all && p.growth_bound_ok;
    min_ratio_at_min = std::min(min_ratio_at_min, p.ratio_at_min_radius);
  }
  std::ostringstream sum;
  sum << "kind = density\natoms = " << ctx.mu.size() << "\nqueries = " << queries.size()
      << "\nvanish_threshold = " << format_g17(vanish_threshold)
      << "\npoints_below_threshold = " << vanish_count
      << "\ngrowth_bound_ok = " << (growth_all ? "true" : "false")
      << "\nmin_ratio_at_min_radius = " << format_g17(min_ratio_at_min) << "\n";
  ctx.sink.write("summary.txt", sum.str());
}

// ---- weak-type --------------------------------------------------------------------

void run_weak_type(Ctx& ctx) {
  const auto grid = ctx.eps_grid();
  const Descriptor fd = Descriptor::parse(ctx.cfg.get_or("density", "f", "one"));
  const DensityFunction f = build_density(fd, ctx.mu);

  const auto tstar = maximal_at_atoms(ctx.mu, ctx.kernel, f, grid, ctx.opts);
  double tstar_max = 0.0;
  for (double v : tstar) tstar_max = std::max(tstar_max, v);
  if (!(tstar_max > 0.0)) {
    throw std::runtime_error("weak-type: T* vanishes at every atom; nothing to scan");
  }

  const int t_count = static_cast<int>(ctx.cfg.get_int("grid", "t_count", 96));
  const double t_min_frac = ctx.cfg.get_double("grid", "t_min_frac", 1.0 / 256.0);
  if (t_count < 2 || !(t_min_frac > 0.0 && t_min_frac < 1.0)) {
    throw std::runtime_error("weak-type: need t_count >= 2 and t_min_frac in (0,1)");
  }
  std::vector<double> t_grid(static_cast<std::size_t>(t_count));
  for (int j = 0; j < t_count; ++j) {
    t_grid[static_cast<std::size_t>(j)] =
        tstar_max * std::pow(t_min_frac, static_cast<double>(j) / (t_count - 1));
  }

  const auto rep = weak_type_constant(ctx.mu, ctx.kernel, f, grid, t_grid, ctx.opts);

  std::ostringstream os;
  os << ctx.sink.csv_header() << "t,superlevel_mass,product\n";
  SvgSeries s;
  s.label = "t * mu{T* > t} / ||f||_1";
  for (const auto& row : rep.rows) {
    os << format_g17(row.t) << ',' << format_g17(row.superlevel_mass) << ','
       << format_g17(row.product) << "\n";
    s.points.emplace_back(row.t, row.product);
  }
  ctx.sink.write("weak.csv", os.str());
  ctx.sink.plot_lines("weak.svg", "weak (1,1) products over the threshold grid", "t",
                      "normalized product", {s}, true);

  std::ostringstream sum;
  sum << "kind = weak-type\natoms = " << ctx.mu.size()
      << "\nconstant = " << format_g17(rep.constant)
      << "\nt_at_max = " << format_g17(rep.t_at_max)
      << "\ntstar_max = " << format_g17(rep.tstar_max)
      << "\nf_l1 = " << format_g17(rep.f_l1) << "\n";
  ctx.sink.write("summary.txt", sum.str());
}

// ---- counterexample-cantor ----------------------------------------------------------

void run_counterexample(Ctx& ctx) {
  if (!ctx.mu.has_ifs_addresses()) {
    throw std::runtime_error("counterexample-cantor requires a cantor measure");
  }
  const auto grid = ctx.eps_grid();
  const auto radii = ctx.r_ladder();
  const Descriptor fd = Descriptor::parse(ctx.cfg.get_or("density", "f", "one"));
  const DensityFunction f = build_density(fd, ctx.mu);
  const auto queries = select_queries(ctx.cfg, ctx.mu, ctx.seed, true);
  const ClassifySpec cs = read_classify(ctx.cfg);

  const PvResult pv = run_pv_core(ctx, queries, grid, f, cs, fd);
  emit_pv_csv(ctx, queries, pv);

  // ball averages over the same atoms, for the side-by-side comparison
  std::vector<std::vector<double>> avg(queries.size(),
                                       std::vector<double>(radii.size(), 0.0));
#pragma omp parallel for schedule(dynamic)
  for (long qi = 0; qi < static_cast<long>(queries.size()); ++qi) {
    const std::size_t q = static_cast<std::size_t>(qi);
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
      avg[q][ri] = ball_average(ctx.mu, ctx.kernel, f, queries[q].x, radii[ri], ctx.opts);
    }
  }
  std::ostringstream av;
  av << ctx.sink.csv_header() << "point,r,value\n";
  std::vector<SvgSeries> aseries;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    SvgSeries s;
    s.label = "p" + std::to_string(q);
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
      av << q << ',' << format_g17(radii[ri]) << ',' << format_g17(avg[q][ri]) << "\n";
      s.points.emplace_back(radii[ri], avg[q][ri]);
    }
    aseries.push_back(std::move(s));
  }
  ctx.sink.write("avg.csv", av.str());
  ctx.sink.plot_lines("avg.svg", "ball averages on the Cantor measure", "r", "average",
                      aseries, true);

  std::vector<DensityProfile> profiles(queries.size());
#pragma omp parallel for schedule(dynamic)
  for (long qi = 0; qi < static_cast<long>(queries.size()); ++qi) {
    const std::size_t q = static_cast<std::size_t>(qi);
    profiles[q] = density_profile(ctx.mu, ctx.h, queries[q].x, radii, ctx.opts);
  }
  std::ostringstream dn;
  dn << ctx.sink.csv_header() << "point,r,mass,ratio\n";
  double min_ratio = profiles.empty() ? 0.0 : profiles[0].rows[0].ratio;
  std::vector<SvgSeries> dseries;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    SvgSeries s;
    s.label = "p" + std::to_string(q);
    for (const auto& row : profiles[q].rows) {
      dn << q << ',' << format_g17(row.radius) << ',' << format_g17(row.mass) << ','
         << format_g17(row.ratio) << "\n";
      min_ratio = std::min(min_ratio, row.ratio);
      s.points.emplace_back(row.radius, row.ratio);
    }
    dseries.push_back(std::move(s));
  }
  ctx.sink.write("density.csv", dn.str());
  ctx.sink.plot_lines("density.svg", "density ratio on the Cantor measure", "r",
                      "ratio", dseries, true);

  const auto tally = verdict_tally(pv);
  const int not_convergent = static_cast<int>(queries.size()) - tally.at("convergent");
  std::ostringstream sum;
  sum << "kind = counterexample-cantor\natoms = " << ctx.mu.size()
      << "\nqueries = " << queries.size() << "\n";
  for (const auto& [verdict, count] : tally) {
    sum << "verdict_" << verdict << " = " << count << "\n";
  }
  sum << "frac_not_convergent = "
      << format_g17(queries.empty()
                        ? 0.0
                        : static_cast<double>(not_convergent) / queries.size())
      << "\nmin_density_ratio = " << format_g17(min_ratio) << "\n";
  // the side-by-side story per point: what the truncations do vs where the
  // ball averages sit at the finest radius
  for (std::size_t q = 0; q < queries.size(); ++q) {
    sum << "point_" << q << " = " << to_string(pv.reports[q].verdict)
        << " final_avg=" << format_g17(avg[q].back()) << "\n";
  }
  ctx.sink.write("summary.txt", sum.str());
}

// ---- identity-suite -----------------------------------------------------------------

void run_identity_suite(Ctx& ctx) {
  const long cases = ctx.cfg.get_int("limits", "cases", 100);
  std::mt19937_64 rng(ctx.seed);

  std::ostringstream os;
  os << ctx.sink.csv_header()
     << "case,measure,kernel,check,param,residual,scale,relative,pass\n";
  std::vector<SvgSeries> series(3);
  series[0].label = "ball-cancellation";
  series[1].label = "identity-2.2";
  series[2].label = "martingale";
  double worst = 0.0;
  bool all_pass = true;

  for (long c = 0; c < cases; ++c) {
    // rotate the measure family, modest sizes keep the whole suite fast
    AtomicMeasure mu = [&]() -> AtomicMeasure {
      switch (c % 3) {
        case 0:
          return build_cantor_measure(3 + static_cast<int>(bounded_uint(rng, 3)), 0.25,
                                      ctx.atom_budget);
        case 1:
          return build_uniform_segment(std::size_t{64} << bounded_uint(rng, 5),
                                       Point{0.0}, Point{1.0});
        default:
          return build_uniform_cube(8 + 4 * bounded_uint(rng, 5), 2, 1.0,
                                    ctx.atom_budget);
      }
    }();

    KernelSpec K = [&]() {
      if (mu.dim() == 1) {
        switch (bounded_uint(rng, 3)) {
          case 0: return KernelSpec::hilbert();
          case 1: return KernelSpec::riesz(1, 1);
          default: return KernelSpec::riesz(2, 1);
        }
      }
      switch (bounded_uint(rng, 6)) {
        case 0: return KernelSpec::riesz(1, 1);
        case 1: return KernelSpec::riesz(1, 2);
        case 2: return KernelSpec::riesz(2, 1);
        case 3: return KernelSpec::huovinen_power(1, ComplexPart::Real);
        case 4: return KernelSpec::huovinen_power(2, ComplexPart::Imag);
        default: return KernelSpec::huovinen_combo();
      }
    }();

    const double diam = mu.bbox_diameter();
    const std::size_t center_atom = bounded_uint(rng, mu.size());
    Point center = mu.atom(center_atom);
    for (int a = 0; a < mu.dim(); ++a) {
      center[a] += uniform_double(rng, -0.3, 0.3) * mu.resolution();
    }
    const Ball ball(center, uniform_double(rng, 4.0 * mu.resolution(), 0.5 * diam));
    const double eps = uniform_double(rng, mu.resolution(), 0.25 * diam);

    auto emit = [&](const char* check, double param, const Residual& r, int si) {
      const double rel = r.relative();
      const bool pass = rel <= 1e-10;
      all_pass = all_pass && pass;
      worst = std::max(worst, rel);
      os << c << ',' << mu.label() << ',' << K.describe() << ',' << check << ','
         << format_g17(param) << ',' << format_g17(r.residual) << ','
         << format_g17(r.scale) << ',' << format_g17(rel) << ',' << (pass ? 1 : 0)
         << "\n";
      series[static_cast<std::size_t>(si)].points.emplace_back(
          static_cast<double>(c), std::log10(std::max(rel, 1e-18)));
    };

    emit("ball-cancellation", eps,
         check_ball_cancellation(mu, K, ball, eps, ctx.opts), 0);
    emit("identity-2.2", eps, check_identity_2_2(mu, K, ball, eps, ctx.opts), 1);

    // martingale property on a random level with a random nonnegative density
    const int depth = mu.has_ifs_addresses() ? std::min(3, mu.ifs_generation())
                                             : 3;
    if (depth >= 2) {
      const NestedPartition P = mu.has_ifs_addresses()
                                    ? nested_partition_from_ifs(mu, depth)
                                    : nested_partition_dyadic(mu, depth);
      const int k = 1 + static_cast<int>(bounded_uint(rng, static_cast<std::uint64_t>(depth - 1)));
      Descriptor fd;
      fd.name = "affine";
      fd.params["c0"] = format_g17(1.0 + unit_double(rng));
      fd.params["cx"] = format_g17(uniform_double(rng, -0.45, 0.45));
      if (mu.dim() > 1) fd.params["cy"] = format_g17(uniform_double(rng, -0.45, 0.45));
      WeightedMeasure nu(mu, build_density(fd, mu));
      const auto mres = check_martingale_property(nu, K, P, k, ctx.opts);
      Residual r;
      r.residual = mres.max_relative;  // already normalized per parent
      r.scale = 1.0;
      emit("martingale", static_cast<double>(k), r, 2);
    }
  }

  ctx.sink.write("identities.csv", os.str());
  ctx.sink.plot_lines("identities.svg", "antisymmetry identity residuals", "case",
                      "log10 relative residual", series, false);

  std::ostringstream sum;
  sum << "kind = identity-suite\ncases = " << cases
      << "\nmax_relative = " << format_g17(worst)
      << "\nall_pass = " << (all_pass ? "true" : "false") << "\n";
  ctx.sink.write("summary.txt", sum.str());
}

}  // namespace

// ---- config / validate / run ---------------------------------------------------------

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  return ExperimentConfig{KeyValueConfig::parse(text)};
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return ExperimentConfig{KeyValueConfig::parse_file(path)};
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["version"] = kVersion;
  j["kind"] = kind;
  j["out_dir"] = out_dir;
  j["config_checksum"] = hex64(config_checksum);
  j["wall_clock_seconds"] = wall_seconds;
  j["outputs"] = output_checksums;
  return j.dump(2) + "\n";
}

namespace {

const std::vector<std::string> kKinds = {
    "pv-convergence", "ball-average",          "martingale",    "density",
    "weak-type",      "counterexample-cantor", "identity-suite"};

struct MeasureStatic {
  int dim = 0;
  double resolution = 0.0;
  std::size_t atoms = 0;
};

// What validate() can know about the measure without building the atoms.
std::optional<MeasureStatic> measure_static(const Descriptor& d, std::size_t budget,
                                            std::vector<ValidationFinding>& findings) {
  auto fail = [&](const std::string& msg) {
    findings.push_back({"[measure] type", msg});
    return std::nullopt;
  };
  if (d.name == "segment") {
    const long n = d.param_int("n", 0);
    if (n < 2) return fail("segment: n must be >= 2");
    Point a, b;
    try {
      a = parse_point_csv(d.param("a").value_or("0"));
      b = parse_point_csv(d.param("b").value_or("1"));
    } catch (const std::exception& e) {
      return fail(std::string("segment endpoints: ") + e.what());
    }
    if (a.dim() != b.dim()) return fail("segment: endpoint dimension mismatch");
    const double len = dist(a, b);
    if (!(len > 0.0)) return fail("segment: endpoints coincide");
    return MeasureStatic{a.dim(), len / static_cast<double>(n),
                         static_cast<std::size_t>(n)};
  }
  if (d.name == "cantor") {
    const long g = d.param_int("generation", -1);
    const double lam = d.param_double("contraction", 0.25);
    if (g < 0 || g > 15) return fail("cantor: generation must be 0..15");
    if (!(lam > 0.0 && lam < 0.5)) {
      return fail("cantor: contraction " + format_g17(lam) +
                  " outside (0, 1/2): pieces would overlap");
    }
    const std::size_t atoms = std::size_t{1} << (2 * g);
    if (atoms > budget) {
      return fail("cantor: 4^" + std::to_string(g) + " = " + std::to_string(atoms) +
                  " atoms exceed the atom budget " + std::to_string(budget));
    }
    return MeasureStatic{2, std::pow(lam, static_cast<double>(g)), atoms};
  }
  if (d.name == "cube") {
    const long n = d.param_int("n", 0);
    const long dim = d.param_int("dim", 2);
    const double side = d.param_double("side", 1.0);
    if (n < 1) return fail("cube: n must be >= 1");
    if (dim < 1 || dim > 3) return fail("cube: dim must be 1..3");
    if (!(side > 0.0)) return fail("cube: side must be > 0");
    double atoms = std::pow(static_cast<double>(n), static_cast<double>(dim));
    if (atoms > static_cast<double>(budget)) {
      return fail("cube: n^dim exceeds the atom budget " + std::to_string(budget));
    }
    return MeasureStatic{static_cast<int>(dim), side / static_cast<double>(n),
                         static_cast<std::size_t>(atoms)};
  }
  if (d.name == "file") {
    const auto path = d.param("path");
    if (!path) return fail("file measure: missing path=");
    std::ifstream is(*path);
    if (!is) return fail("file measure: cannot open " + *path);
    try {
      std::string header;
      std::getline(is, header);
      const auto dpos = header.find("dim=");
      const auto rpos = header.find("resolution=");
      if (dpos == std::string::npos || rpos == std::string::npos) {
        return fail("file measure: malformed header in " + *path);
      }
      return MeasureStatic{std::stoi(header.substr(dpos + 4)),
                           std::stod(header.substr(rpos + 11)), 0};
    } catch (const std::exception& e) {
      return fail(std::string("file measure header: ") + e.what());
    }
  }
  return fail("unknown measure type: " + d.name);
}

}  // namespace

std::vector<ValidationFinding> validate(const ExperimentConfig& config,
                                        bool override_trust_floor) {
  // fresh parse so the consumed-flags bookkeeping starts clean
  const KeyValueConfig cfg = KeyValueConfig::parse(config.cfg.text());
  std::vector<ValidationFinding> findings;
  auto note = [&](const std::string& where, const std::string& msg) {
    findings.push_back({where, msg});
  };

  const std::string kind = cfg.get_or("experiment", "kind", "");
  const bool known_kind = std::find(kKinds.begin(), kKinds.end(), kind) != kKinds.end();
  if (!known_kind) note("[experiment] kind", "unknown experiment kind: '" + kind + "'");
  cfg.get_int("experiment", "seed", 1);
  const std::string summation = cfg.get_or("experiment", "summation", "compensated");
  if (summation != "compensated" && summation != "plain") {
    note("[experiment] summation", "must be compensated or plain, got " + summation);
  }

  const std::size_t budget = static_cast<std::size_t>(
      cfg.get_int("limits", "atom_budget", static_cast<long>(kDefaultAtomBudget)));
  cfg.get_int("limits", "cases", 100);

  std::optional<MeasureStatic> ms;
  std::optional<Descriptor> mdesc;
  try {
    mdesc = Descriptor::parse(cfg.get_or("measure", "type", ""));
    ms = measure_static(*mdesc, budget, findings);
  } catch (const std::exception& e) {
    note("[measure] type", e.what());
  }
  const bool is_family = mdesc && mdesc->name != "file";

  std::optional<KernelSpec> kernel;
  try {
    kernel = build_kernel(Descriptor::parse(cfg.get_or("kernel", "kernel", "riesz m=1 i=1")));
    if (ms) kernel->check_dim(ms->dim);
  } catch (const std::exception& e) {
    note("[kernel] kernel", e.what());
  }

  try {
    build_h(Descriptor::parse(cfg.get_or("h", "h", "power c=1 s=1")));
  } catch (const std::exception& e) {
    note("[h] h", e.what());
  }

  const bool override_floor =
      override_trust_floor || cfg.get_bool("grid", "override_trust_floor", false);
  const double floor = ms ? 2.0 * ms->resolution : 0.0;

  const bool wants_eps =
      kind == "pv-convergence" || kind == "weak-type" || kind == "counterexample-cantor";
  const bool wants_r = kind == "ball-average" || kind == "density" ||
                       kind == "counterexample-cantor";
  try {
    const GridDefaults gdef = grid_defaults(kind);
    const double eps_max = cfg.get_double("grid", "eps_max", gdef.eps_max);
    const double ratio = cfg.get_double("grid", "eps_ratio", gdef.eps_ratio);
    const long count = cfg.get_int("grid", "eps_count", gdef.eps_count);
    if (wants_eps) {
      if (!(eps_max > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1) {
        note("[grid] eps_max", "ladder needs eps_max > 0, eps_ratio in (0,1), eps_count >= 1");
      } else if (ms) {
        const double eps_min = eps_max * std::pow(ratio, static_cast<double>(count - 1));
        if (eps_min < floor && !override_floor) {
          note("[grid] eps_count",
               "smallest rung " + format_g17(eps_min) + " is below the trust floor " +
                   format_g17(floor) + "; shorten the ladder or override");
        }
      }
    }
    const double r_max = cfg.get_double("grid", "r_max", gdef.r_max);
    const double r_ratio = cfg.get_double("grid", "r_ratio", gdef.r_ratio);
    const long r_count = cfg.get_int("grid", "r_count", gdef.r_count);
    if (wants_r) {
      if (!(r_max > 0.0) || !(r_ratio > 0.0 && r_ratio < 1.0) || r_count < 1) {
        note("[grid] r_max", "ladder needs r_max > 0, r_ratio in (0,1), r_count >= 1");
      } else if (ms) {
        const double r_min = r_max * std::pow(r_ratio, static_cast<double>(r_count - 1));
        if (r_min < floor && !override_floor) {
          note("[grid] r_count", "smallest radius " + format_g17(r_min) +
                                     " is below the trust floor " + format_g17(floor) +
                                     "; shorten the ladder or override");
        }
      }
    }
    const long t_count = cfg.get_int("grid", "t_count", 96);
    const double t_min_frac = cfg.get_double("grid", "t_min_frac", 1.0 / 256.0);
    if (kind == "weak-type") {
      if (t_count < 2) note("[grid] t_count", "need at least 2 threshold rungs");
      if (!(t_min_frac > 0.0 && t_min_frac < 1.0)) {
        note("[grid] t_min_frac", "must lie in (0, 1)");
      }
    }
    const long depth = cfg.get_int("grid", "depth", 6);
    const std::string partition = cfg.get_or("grid", "partition", "dyadic");
    if (kind == "martingale") {
      if (partition != "dyadic" && partition != "ifs") {
        note("[grid] partition", "must be dyadic or ifs, got " + partition);
      }
      if (depth < 1) note("[grid] depth", "depth must be >= 1");
      if (partition == "ifs" && mdesc && mdesc->name != "cantor") {
        note("[grid] partition", "ifs partition requires a cantor measure");
      }
      if (partition == "ifs" && mdesc && mdesc->name == "cantor" &&
          depth > mdesc->param_int("generation", 0)) {
        note("[grid] depth", "ifs depth exceeds the measure generation");
      }
    }
  } catch (const std::exception& e) {
    note("[grid]", e.what());
  }

  try {
    const std::string mode = cfg.get_or("query", "mode", "random-atoms");
    // all keys of the section are known regardless of the mode
    const auto pts = cfg.get("query", "points");
    const long count = cfg.get_int("query", "count", 50);
    const double margin = cfg.get_double("query", "interior_margin", 0.0);
    if (mode == "explicit") {
      if (!pts) {
        note("[query] points", "explicit mode needs points = x1 .. ; x1 ..");
      } else if (ms) {
        std::istringstream is(*pts);
        std::string tok;
        while (std::getline(is, tok, ';')) {
          std::istringstream ps(tok);
          std::vector<double> coords;
          double c;
          while (ps >> c) coords.push_back(c);
          if (!coords.empty() && static_cast<int>(coords.size()) != ms->dim) {
            note("[query] points", "point '" + tok + "' has dimension " +
                                       std::to_string(coords.size()) + ", measure has " +
                                       std::to_string(ms->dim));
          }
        }
      }
    } else if (mode == "random-atoms") {
      if (count < 1) note("[query] count", "count must be >= 1");
      if (margin < 0.0 || margin >= 0.5) {
        note("[query] interior_margin", "must lie in [0, 0.5)");
      }
    } else if (mode != "all-atoms") {
      note("[query] mode", "unknown query mode: " + mode);
    }
  } catch (const std::exception& e) {
    note("[query]", e.what());
  }

  try {
    const double tf = cfg.get_double("classify", "tail_fraction", 0.5);
    if (!(tf > 0.0 && tf <= 1.0)) {
      note("[classify] tail_fraction", "must lie in (0, 1]");
    }
    for (const char* key : {"tol_cauchy", "tol_drift"}) {
      const std::string tol = cfg.get_or("classify", key, "auto");
      if (tol == "auto") {
        if (!is_family &&
            (kind == "pv-convergence" || kind == "counterexample-cantor")) {
          note(std::string("[classify] ") + key,
               "auto tolerance needs a generator measure (segment/cantor/cube) to "
               "rebuild at half resolution; file measures need a numeric tolerance");
        }
      } else {
        try {
          if (std::stod(tol) < 0.0) {
            note(std::string("[classify] ") + key, "tolerance must be >= 0");
          }
        } catch (const std::exception&) {
          note(std::string("[classify] ") + key, "expected 'auto' or a number, got " + tol);
        }
      }
    }
  } catch (const std::exception& e) {
    note("[classify]", e.what());
  }

  try {
    const Descriptor fd = Descriptor::parse(cfg.get_or("density", "f", "one"));
    if (fd.name != "one" && fd.name != "affine" && fd.name != "indicator") {
      note("[density] f", "unknown density form: " + fd.name);
    }
    if (fd.name == "indicator" && ms) {
      const long axis = fd.param_int("axis", 1);
      if (axis < 1 || axis > ms->dim) note("[density] f", "indicator axis out of range");
    }
    cfg.get_double("density", "vanish_threshold", 0.1);
  } catch (const std::exception& e) {
    note("[density] f", e.what());
  }

  if (kind == "counterexample-cantor" && mdesc && mdesc->name != "cantor") {
    note("[measure] type", "counterexample-cantor requires type = cantor");
  }

  if (cfg.get_or("output", "dir", "out").empty()) {
    note("[output] dir", "output directory must not be empty");
  }
  cfg.get_bool("output", "plot", false);
  cfg.get_bool("output", "save_measure", false);

  for (const auto& stray : cfg.unconsumed()) {
    note(stray, "unknown key");
  }
  return findings;
}

RunManifest run(const ExperimentConfig& config, const RunOverrides& overrides) {
  const auto t0 = std::chrono::steady_clock::now();
  {
    auto findings = validate(config, overrides.override_trust_floor);
    if (!findings.empty()) {
      std::string what = "config refused: " + findings.front().where + ": " +
                         findings.front().message;
      if (findings.size() > 1) {
        what += " (+" + std::to_string(findings.size() - 1) + " more)";
      }
      throw ValidationRefusal(what, std::move(findings));
    }
  }
  const KeyValueConfig& cfg = config.cfg;
  const std::string kind = config.kind();

  EvalOptions opts;
  opts.compensated = cfg.get_or("experiment", "summation", "compensated") == "compensated";
  opts.override_trust_floor =
      overrides.override_trust_floor || cfg.get_bool("grid", "override_trust_floor", false);

  const std::size_t budget = static_cast<std::size_t>(
      cfg.get_int("limits", "atom_budget", static_cast<long>(kDefaultAtomBudget)));
  const Descriptor mdesc = Descriptor::parse(cfg.get_or("measure", "type", ""));

  const std::string out_dir =
      overrides.out_dir.empty() ? cfg.get_or("output", "dir", "out") : overrides.out_dir;
  const bool plot = overrides.plot || cfg.get_bool("output", "plot", false);

  Ctx ctx{cfg,
          opts,
          config.seed(),
          budget,
          mdesc,
          build_measure(mdesc, budget),
          build_kernel(Descriptor::parse(cfg.get_or("kernel", "kernel", "riesz m=1 i=1"))),
          build_h(Descriptor::parse(cfg.get_or("h", "h", "power c=1 s=1"))),
          OutputSink(out_dir, kind, cfg.checksum(), plot),
          grid_defaults(kind)};
  ctx.kernel.check_dim(ctx.mu.dim());

  if (cfg.get_bool("output", "save_measure", false)) {
    std::ostringstream ms;
    write_measure(ms, ctx.mu);
    ctx.sink.write("measure.txt", ms.str());
  }

  if (kind == "pv-convergence") {
    run_pv_convergence(ctx);
  } else if (kind == "ball-average") {
    run_ball_average(ctx);
  } else if (kind == "martingale") {
    run_martingale(ctx);
  } else if (kind == "density") {
    run_density(ctx);
  } else if (kind == "weak-type") {
    run_weak_type(ctx);
  } else if (kind == "counterexample-cantor") {
    run_counterexample(ctx);
  } else if (kind == "identity-suite") {
    run_identity_suite(ctx);
  } else {
    throw std::runtime_error("unknown experiment kind: " + kind);
  }

  RunManifest manifest;
  manifest.kind = kind;
  manifest.out_dir = ctx.sink.dir().string();
  manifest.config_checksum = cfg.checksum();
  manifest.output_checksums = ctx.sink.checksums();
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::json j;
  j["version"] = kVersion;
  j["kind"] = manifest.kind;
  j["config_checksum"] = hex64(manifest.config_checksum);
  j["wall_clock_seconds"] = manifest.wall_seconds;
  j["outputs"] = manifest.output_checksums;
  j["config_echo"] = cfg.text();
  std::ofstream mf(fs::path(manifest.out_dir) / "manifest.json", std::ios::binary);
  mf << j.dump(2) << "\n";

  return manifest;
}

}  // namespace pvlab
