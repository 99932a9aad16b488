#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pvlab/experiments.hpp"

namespace py = pybind11;
using namespace pvlab;

namespace {

Point as_point(const std::vector<double>& coords) { return Point::from(coords); }

std::vector<double> point_coords(const Point& p) {
  std::vector<double> out(static_cast<std::size_t>(p.dim()));
  for (int i = 0; i < p.dim(); ++i) out[static_cast<std::size_t>(i)] = p[i];
  return out;
}

EvalOptions make_opts(bool compensated, bool override_trust_floor) {
  EvalOptions o;
  o.compensated = compensated;
  o.override_trust_floor = override_trust_floor;
  return o;
}

}  // namespace

PYBIND11_MODULE(_pvlab, m) {
  m.doc() = "Truncated singular integral operators, martingale averages and "
            "convergence diagnostics on discrete measures";
  m.attr("__version__") = kVersion;

  py::register_exception<TrustFloorError>(m, "TrustFloorError", PyExc_RuntimeError);

  py::class_<EvalOptions>(m, "EvalOptions")
      .def(py::init<>())
      .def_readwrite("compensated", &EvalOptions::compensated)
      .def_readwrite("override_trust_floor", &EvalOptions::override_trust_floor);

  py::class_<AtomicMeasure>(m, "AtomicMeasure")
      .def_property_readonly("dim", &AtomicMeasure::dim)
      .def_property_readonly("resolution", &AtomicMeasure::resolution)
      .def_property_readonly("trust_floor", &AtomicMeasure::trust_floor)
      .def_property_readonly("label", &AtomicMeasure::label)
      .def("__len__", &AtomicMeasure::size)
      .def("atom", [](const AtomicMeasure& mu, std::size_t i) {
        if (i >= mu.size()) throw py::index_error();
        return point_coords(mu.atom(i));
      })
      .def("weight", [](const AtomicMeasure& mu, std::size_t i) {
        if (i >= mu.size()) throw py::index_error();
        return mu.weight(i);
      })
      .def_property_readonly("weights", [](const AtomicMeasure& mu) { return mu.weights(); })
      .def("total_mass", &AtomicMeasure::total_mass)
      .def("bbox_diameter", &AtomicMeasure::bbox_diameter)
      .def("__repr__", [](const AtomicMeasure& mu) {
        return "<AtomicMeasure " + mu.label() + ", " + std::to_string(mu.size()) +
               " atoms>";
      });

  m.def("build_cantor_measure", &build_cantor_measure, py::arg("generation"),
        py::arg("contraction") = 0.25, py::arg("atom_budget") = kDefaultAtomBudget);
  m.def(
      "build_uniform_segment",
      [](std::size_t n, const std::vector<double>& a, const std::vector<double>& b) {
        return build_uniform_segment(n, as_point(a), as_point(b));
      },
      py::arg("n_atoms"), py::arg("a") = std::vector<double>{0.0},
      py::arg("b") = std::vector<double>{1.0});
  m.def("build_uniform_cube", &build_uniform_cube, py::arg("n_per_side"), py::arg("dim"),
        py::arg("side") = 1.0, py::arg("atom_budget") = kDefaultAtomBudget);
  m.def("read_measure_file", &read_measure_file, py::arg("path"));
  m.def("write_measure_file", &write_measure_file, py::arg("path"), py::arg("measure"));

  m.def(
      "ball_mass",
      [](const AtomicMeasure& mu, const std::vector<double>& center, double radius) {
        return ball_mass(mu, Ball(as_point(center), radius));
      },
      py::arg("measure"), py::arg("center"), py::arg("radius"));
  m.def(
      "restrict",
      [](const AtomicMeasure& mu, const std::vector<double>& center, double radius,
         bool inside) { return restrict(mu, Ball(as_point(center), radius), inside); },
      py::arg("measure"), py::arg("center"), py::arg("radius"), py::arg("inside"));

  py::class_<NestedPartition>(m, "NestedPartition")
      .def_property_readonly("depth", &NestedPartition::depth)
      .def("mesh", &NestedPartition::mesh, py::arg("level"))
      .def("validate", &NestedPartition::validate)
      .def("cell_atoms",
           [](const NestedPartition& p, int k, std::uint32_t atom) {
             return p.cell_of(k, atom).atoms;
           },
           py::arg("level"), py::arg("atom"))
      .def("cells_at",
           [](const NestedPartition& p, int k) { return p.level(k).size(); },
           py::arg("level"));
  m.def("nested_partition_from_ifs", &nested_partition_from_ifs, py::arg("measure"),
        py::arg("depth"));
  m.def("nested_partition_dyadic", &nested_partition_dyadic, py::arg("measure"),
        py::arg("depth"));

  py::class_<KernelSpec>(m, "KernelSpec")
      .def_static("riesz", &KernelSpec::riesz, py::arg("m"), py::arg("i"))
      .def_static("hilbert", &KernelSpec::hilbert)
      .def_static(
          "huovinen_power",
          [](int k, const std::string& part) {
            return KernelSpec::huovinen_power(
                k, part == "im" ? ComplexPart::Imag : ComplexPart::Real);
          },
          py::arg("k"), py::arg("part") = "re")
      .def_static("huovinen_combo", &KernelSpec::huovinen_combo)
      .def("__call__",
           [](const KernelSpec& k, const std::vector<double>& x,
              const std::vector<double>& y) { return k.eval(as_point(x), as_point(y)); })
      .def("describe", &KernelSpec::describe)
      .def("__repr__",
           [](const KernelSpec& k) { return "<KernelSpec " + k.describe() + ">"; });

  py::class_<HFunction>(m, "HFunction")
      .def_static("power", &HFunction::power, py::arg("c"), py::arg("s"))
      .def_static("table", &HFunction::table, py::arg("knots"))
      .def("__call__", [](const HFunction& h, double r) { return h(r); })
      .def("doubling_constant", &HFunction::doubling_constant)
      .def("describe", &HFunction::describe);

  m.def(
      "check_antisymmetry",
      [](const KernelSpec& k, int dim, int n, std::uint64_t seed) {
        PairSampler s(dim, seed);
        return check_antisymmetry(k, s, n).supremum;
      },
      py::arg("kernel"), py::arg("dim"), py::arg("n") = 10000, py::arg("seed") = 1);
  m.def(
      "check_size_condition",
      [](const KernelSpec& k, const HFunction& h, int dim, int n, std::uint64_t seed) {
        PairSampler s(dim, seed);
        return check_size_condition(k, h, s, n).supremum;
      },
      py::arg("kernel"), py::arg("h"), py::arg("dim"), py::arg("n") = 10000,
      py::arg("seed") = 1);
  m.def(
      "check_smoothness_condition",
      [](const KernelSpec& k, const HFunction& h, int dim, int n, std::uint64_t seed) {
        PairSampler s(dim, seed);
        return check_smoothness_condition(k, h, s, n).supremum;
      },
      py::arg("kernel"), py::arg("h"), py::arg("dim"), py::arg("n") = 10000,
      py::arg("seed") = 1);

  py::class_<TruncationGrid>(m, "TruncationGrid")
      .def_static("geometric", &TruncationGrid::geometric, py::arg("eps_max"),
                  py::arg("ratio"), py::arg("count"), py::arg("trust_floor"),
                  py::arg("override_floor") = false)
      .def_readonly("epsilons", &TruncationGrid::epsilons)
      .def_readonly("trust_floor", &TruncationGrid::trust_floor);

  py::class_<DensityFunction>(m, "DensityFunction")
      .def_static("one", &DensityFunction::one)
      .def_static("of", &DensityFunction::of, py::arg("values"));

  m.def(
      "truncated",
      [](const AtomicMeasure& mu, const KernelSpec& k, const DensityFunction& f,
         const std::vector<double>& x, double eps, bool compensated, bool override_floor) {
        return truncated(mu, k, f, as_point(x), eps,
                         make_opts(compensated, override_floor));
      },
      py::arg("measure"), py::arg("kernel"), py::arg("f"), py::arg("x"), py::arg("eps"),
      py::arg("compensated") = true, py::arg("override_trust_floor") = false);
  m.def(
      "maximal",
      [](const AtomicMeasure& mu, const KernelSpec& k, const DensityFunction& f,
         const std::vector<double>& x, const TruncationGrid& grid, bool compensated) {
        const auto r = maximal(mu, k, f, as_point(x), grid, make_opts(compensated, false));
        return py::make_tuple(r.value, r.argmax_eps);
      },
      py::arg("measure"), py::arg("kernel"), py::arg("f"), py::arg("x"), py::arg("grid"),
      py::arg("compensated") = true);
  m.def(
      "maximal_at_atoms",
      [](const AtomicMeasure& mu, const KernelSpec& k, const DensityFunction& f,
         const TruncationGrid& grid) { return maximal_at_atoms(mu, k, f, grid); },
      py::arg("measure"), py::arg("kernel"), py::arg("f"), py::arg("grid"));
  m.def(
      "pv_sequence",
      [](const AtomicMeasure& mu, const KernelSpec& k, const DensityFunction& f,
         const std::vector<double>& x, const TruncationGrid& grid) {
        return pv_sequence(mu, k, f, as_point(x), grid);
      },
      py::arg("measure"), py::arg("kernel"), py::arg("f"), py::arg("x"), py::arg("grid"));
  m.def("bilinear_pairing", &bilinear_pairing, py::arg("measure"), py::arg("kernel"),
        py::arg("f"), py::arg("g"), py::arg("opts") = EvalOptions{});
  m.def(
      "ball_average",
      [](const AtomicMeasure& mu, const KernelSpec& k, const DensityFunction& f,
         const std::vector<double>& z, double r) {
        return ball_average(mu, k, f, as_point(z), r);
      },
      py::arg("measure"), py::arg("kernel"), py::arg("f"), py::arg("z"), py::arg("r"));

  py::class_<Residual>(m, "Residual")
      .def_readonly("residual", &Residual::residual)
      .def_readonly("scale", &Residual::scale)
      .def("relative", &Residual::relative);
  m.def(
      "check_ball_cancellation",
      [](const AtomicMeasure& mu, const KernelSpec& k, const std::vector<double>& center,
         double radius, double eps) {
        return check_ball_cancellation(mu, k, Ball(as_point(center), radius), eps);
      },
      py::arg("measure"), py::arg("kernel"), py::arg("center"), py::arg("radius"),
      py::arg("eps"));
  m.def(
      "check_identity_2_2",
      [](const AtomicMeasure& mu, const KernelSpec& k, const std::vector<double>& center,
         double radius, double eps) {
        return check_identity_2_2(mu, k, Ball(as_point(center), radius), eps);
      },
      py::arg("measure"), py::arg("kernel"), py::arg("center"), py::arg("radius"),
      py::arg("eps"));

  py::class_<NormEstimate>(m, "NormEstimate")
      .def_readonly("value", &NormEstimate::value)
      .def_readonly("converged", &NormEstimate::converged)
      .def_readonly("iterations", &NormEstimate::iterations);
  m.def("l2_norm_estimate", &l2_norm_estimate, py::arg("measure"), py::arg("kernel"),
        py::arg("eps"), py::arg("rel_tol") = 1e-6, py::arg("max_iterations") = 500,
        py::arg("seed") = 1);

  m.def(
      "s_k",
      [](const AtomicMeasure& mu, const DensityFunction& f, const KernelSpec& k,
         const NestedPartition& p, int level, std::uint32_t z) {
        return s_k(WeightedMeasure(mu, f), k, p, level, z);
      },
      py::arg("measure"), py::arg("f"), py::arg("kernel"), py::arg("partition"),
      py::arg("level"), py::arg("z"));
  m.def(
      "a_k",
      [](const AtomicMeasure& mu, const DensityFunction& f, const KernelSpec& k,
         const NestedPartition& p, int level, std::uint32_t z) {
        return a_k(mu, k, f, p, level, z);
      },
      py::arg("measure"), py::arg("f"), py::arg("kernel"), py::arg("partition"),
      py::arg("level"), py::arg("z"));
  py::class_<MartingaleResidual>(m, "MartingaleResidual")
      .def_readonly("max_relative", &MartingaleResidual::max_relative)
      .def_readonly("max_absolute", &MartingaleResidual::max_absolute)
      .def_readonly("worst_parent", &MartingaleResidual::worst_parent);
  m.def(
      "check_martingale_property",
      [](const AtomicMeasure& mu, const DensityFunction& f, const KernelSpec& k,
         const NestedPartition& p, int level) {
        return check_martingale_property(WeightedMeasure(mu, f), k, p, level);
      },
      py::arg("measure"), py::arg("f"), py::arg("kernel"), py::arg("partition"),
      py::arg("level"));
  py::class_<TraceLevel>(m, "TraceLevel")
      .def_readonly("level", &TraceLevel::level)
      .def_readonly("nu_mass", &TraceLevel::nu_mass)
      .def_readonly("mu_mass", &TraceLevel::mu_mass)
      .def_readonly("s_value", &TraceLevel::s_value)
      .def_readonly("a_value", &TraceLevel::a_value)
      .def_readonly("gap", &TraceLevel::gap);
  py::class_<MartingaleTrace>(m, "MartingaleTrace")
      .def_readonly("atom", &MartingaleTrace::atom)
      .def_readonly("levels", &MartingaleTrace::levels)
      .def_readonly("gap_nonincreasing_tail", &MartingaleTrace::gap_nonincreasing_tail);
  m.def("martingale_trace", &martingale_trace, py::arg("measure"), py::arg("f"),
        py::arg("kernel"), py::arg("partition"), py::arg("z"),
        py::arg("opts") = EvalOptions{});
  py::class_<L1BoundReport>(m, "L1BoundReport")
      .def_readonly("value", &L1BoundReport::value)
      .def_readonly("comparison_bound", &L1BoundReport::comparison_bound)
      .def_readonly("norm_estimate", &L1BoundReport::norm_estimate)
      .def_readonly("f_l2", &L1BoundReport::f_l2);
  m.def(
      "martingale_l1_bound",
      [](const AtomicMeasure& mu, const DensityFunction& f, const KernelSpec& k,
         const NestedPartition& p, int level) {
        return martingale_l1_bound(WeightedMeasure(mu, f), k, p, level);
      },
      py::arg("measure"), py::arg("f"), py::arg("kernel"), py::arg("partition"),
      py::arg("level"));

  py::class_<ConvergenceReport>(m, "ConvergenceReport")
      .def_property_readonly("verdict",
                             [](const ConvergenceReport& r) { return to_string(r.verdict); })
      .def_readonly("limit", &ConvergenceReport::limit)
      .def_readonly("amplitude", &ConvergenceReport::amplitude)
      .def_readonly("slope", &ConvergenceReport::slope)
      .def_readonly("window", &ConvergenceReport::window)
      .def_readonly("reason", &ConvergenceReport::reason);
  m.def(
      "classify_convergence",
      [](const std::vector<std::pair<double, double>>& seq, double tail_fraction,
         double tol_cauchy, double tol_drift) {
        return classify_convergence(seq, tail_fraction, tol_cauchy, tol_drift);
      },
      py::arg("seq"), py::arg("tail_fraction") = 0.5, py::arg("tol_cauchy") = 1e-9,
      py::arg("tol_drift") = 1e-9);

  py::class_<DensityRow>(m, "DensityRow")
      .def_readonly("radius", &DensityRow::radius)
      .def_readonly("mass", &DensityRow::mass)
      .def_readonly("ratio", &DensityRow::ratio);
  py::class_<DensityProfile>(m, "DensityProfile")
      .def_readonly("rows", &DensityProfile::rows)
      .def_readonly("max_ratio", &DensityProfile::max_ratio)
      .def_readonly("ratio_at_min_radius", &DensityProfile::ratio_at_min_radius)
      .def_readonly("growth_bound_ok", &DensityProfile::growth_bound_ok);
  m.def(
      "density_profile",
      [](const AtomicMeasure& mu, const HFunction& h, const std::vector<double>& x,
         const std::vector<double>& radii, bool override_floor) {
        return density_profile(mu, h, as_point(x), radii,
                               make_opts(true, override_floor));
      },
      py::arg("measure"), py::arg("h"), py::arg("x"), py::arg("radii"),
      py::arg("override_trust_floor") = false);
  m.def(
      "density_envelope",
      [](const std::vector<DensityProfile>& profiles) {
        return density_envelope(profiles);
      },
      py::arg("profiles"));
  py::class_<DoublingResult>(m, "DoublingResult")
      .def_readonly("found", &DoublingResult::found)
      .def_readonly("k", &DoublingResult::k)
      .def_readonly("inner_radius", &DoublingResult::inner_radius)
      .def_readonly("inner_mass", &DoublingResult::inner_mass)
      .def_readonly("outer_mass", &DoublingResult::outer_mass);
  m.def(
      "doubling_scale_search",
      [](const AtomicMeasure& mu, const std::vector<double>& a, double eps, double C) {
        return doubling_scale_search(mu, as_point(a), eps, C);
      },
      py::arg("measure"), py::arg("a"), py::arg("eps"), py::arg("C"));
  py::class_<WeakTypeRow>(m, "WeakTypeRow")
      .def_readonly("t", &WeakTypeRow::t)
      .def_readonly("superlevel_mass", &WeakTypeRow::superlevel_mass)
      .def_readonly("product", &WeakTypeRow::product);
  py::class_<WeakTypeReport>(m, "WeakTypeReport")
      .def_readonly("constant", &WeakTypeReport::constant)
      .def_readonly("t_at_max", &WeakTypeReport::t_at_max)
      .def_readonly("f_l1", &WeakTypeReport::f_l1)
      .def_readonly("tstar_max", &WeakTypeReport::tstar_max)
      .def_readonly("rows", &WeakTypeReport::rows);
  m.def(
      "weak_type_constant",
      [](const AtomicMeasure& mu, const KernelSpec& k, const DensityFunction& f,
         const TruncationGrid& grid, const std::vector<double>& t_grid) {
        return weak_type_constant(mu, k, f, grid, t_grid);
      },
      py::arg("measure"), py::arg("kernel"), py::arg("f"), py::arg("grid"),
      py::arg("t_grid"));

  py::class_<ValidationFinding>(m, "ValidationFinding")
      .def_readonly("where", &ValidationFinding::where)
      .def_readonly("message", &ValidationFinding::message);
  py::class_<RunManifest>(m, "RunManifest")
      .def_readonly("kind", &RunManifest::kind)
      .def_readonly("out_dir", &RunManifest::out_dir)
      .def_readonly("wall_seconds", &RunManifest::wall_seconds)
      .def_readonly("output_checksums", &RunManifest::output_checksums);
  m.def(
      "validate_config",
      [](const std::string& path) {
        return validate(ExperimentConfig::from_file(path));
      },
      py::arg("path"));
  m.def(
      "validate_config_text",
      [](const std::string& text) {
        return validate(ExperimentConfig::from_text(text));
      },
      py::arg("text"));
  m.def(
      "run_config",
      [](const std::string& path, const std::string& out_dir, bool plot,
         bool override_floor) {
        RunOverrides ov;
        ov.out_dir = out_dir;
        ov.plot = plot;
        ov.override_trust_floor = override_floor;
        return run(ExperimentConfig::from_file(path), ov);
      },
      py::arg("path"), py::arg("out_dir") = "", py::arg("plot") = false,
      py::arg("override_trust_floor") = false);
  m.def(
      "run_config_text",
      [](const std::string& text, const std::string& out_dir, bool plot,
         bool override_floor) {
        RunOverrides ov;
        ov.out_dir = out_dir;
        ov.plot = plot;
        ov.override_trust_floor = override_floor;
        return run(ExperimentConfig::from_text(text), ov);
      },
      py::arg("text"), py::arg("out_dir") = "", py::arg("plot") = false,
      py::arg("override_trust_floor") = false);
}
