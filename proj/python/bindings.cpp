#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "kinreg/experiment.hpp"
#include "kinreg/functionals.hpp"

namespace py = pybind11;
using namespace kinreg;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Fields cross the boundary as (nt, nx, nv) arrays, the in-memory layout of GridField.
GridField to_field(const Array& a, const GridSpec& g, FieldRole role = FieldRole::Solution) {
    if (a.ndim() != 3 || a.shape(0) != g.nt || a.shape(1) != g.nx || a.shape(2) != g.nv)
        throw std::invalid_argument("field array must have shape (nt, nx, nv) of the grid");
    GridField f(g, 0.0, role);
    std::copy(a.data(), a.data() + a.size(), f.values.begin());
    return f;
}

Array to_array(const GridField& f) {
    Array a({f.grid.nt, f.grid.nx, f.grid.nv});
    std::copy(f.values.begin(), f.values.end(), a.mutable_data());
    return a;
}

Array slice_array(const std::vector<double>& s, const GridSpec& g) {
    Array a({g.nx, g.nv});
    std::copy(s.begin(), s.end(), a.mutable_data());
    return a;
}

std::vector<double> from_slice(const Array& a, const GridSpec& g) {
    if (a.ndim() != 2 || a.shape(0) != g.nx || a.shape(1) != g.nv)
        throw std::invalid_argument("initial slice must have shape (nx, nv)");
    return {a.data(), a.data() + a.size()};
}

}  // namespace

PYBIND11_MODULE(_kinreg, m) {
    m.doc() = "Kinetic Fokker-Planck solver and regularity-estimate verification";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](int nx, int nv, int nt, double lx, double v_max, double t_start, double t_end) {
                 GridSpec g{nx, nv, nt, lx, v_max, t_start, t_end};
                 g.validate();
                 return g;
             }),
             py::arg("nx"), py::arg("nv"), py::arg("nt"), py::arg("lx"), py::arg("v_max"), py::arg("t_start") = 0.0,
             py::arg("t_end") = 1.0)
        .def_readonly("nx", &GridSpec::nx)
        .def_readonly("nv", &GridSpec::nv)
        .def_readonly("nt", &GridSpec::nt)
        .def_readonly("lx", &GridSpec::lx)
        .def_readonly("v_max", &GridSpec::v_max)
        .def_readonly("t_start", &GridSpec::t_start)
        .def_readonly("t_end", &GridSpec::t_end)
        .def_property_readonly("dx", &GridSpec::dx)
        .def_property_readonly("dv", &GridSpec::dv)
        .def_property_readonly("dt", &GridSpec::dt)
        .def("x", &GridSpec::x)
        .def("v", &GridSpec::v)
        .def("t", &GridSpec::t)
        .def("__repr__", [](const GridSpec& g) {
            return "GridSpec(nx=" + std::to_string(g.nx) + ", nv=" + std::to_string(g.nv) +
                   ", nt=" + std::to_string(g.nt) + ")";
        });

    py::class_<Point>(m, "Point")
        .def(py::init<double, double, double>(), py::arg("x"), py::arg("v"), py::arg("t"))
        .def_property_readonly("x", [](const Point& p) { return p.x[0]; })
        .def_property_readonly("v", [](const Point& p) { return p.v[0]; })
        .def_readonly("t", &Point::t);

    py::enum_<CylinderKind>(m, "CylinderKind")
        .value("Straight", CylinderKind::Straight)
        .value("Slanted", CylinderKind::Slanted)
        .value("Sheared", CylinderKind::Sheared)
        .value("Box", CylinderKind::Box);

    py::class_<CylinderSpec>(m, "Cylinder")
        .def(py::init<Point, double, CylinderKind>(), py::arg("center"), py::arg("radius"),
             py::arg("kind") = CylinderKind::Straight)
        .def_readonly("center", &CylinderSpec::center)
        .def_readonly("radius", &CylinderSpec::radius)
        .def_readonly("kind", &CylinderSpec::kind)
        .def("contains", [](const CylinderSpec& c, double x, double v, double t) {
            return cylinder_contains(c, Point(x, v, t));
        })
        .def("volume", [](const CylinderSpec& c) { return cylinder_volume(c, 1); });

    py::enum_<CoefficientKind>(m, "CoefficientKind")
        .value("Constant", CoefficientKind::Constant)
        .value("Checkerboard", CoefficientKind::Checkerboard)
        .value("RandomLaminate", CoefficientKind::RandomLaminate)
        .value("Oscillatory", CoefficientKind::Oscillatory);

    py::class_<CoefficientField>(m, "CoefficientField")
        .def_static(
            "generate",
            [](CoefficientKind kind, double lambda, double Lambda, std::uint64_t seed, double cell) {
                CoefficientParams p;
                p.cell = cell;
                return CoefficientField::generate(kind, lambda, Lambda, seed, p);
            },
            py::arg("kind"), py::arg("lam"), py::arg("Lam"), py::arg("seed") = 0, py::arg("cell") = 0.1)
        .def("__call__", &CoefficientField::eval_scalar, py::arg("x"), py::arg("v"), py::arg("t"))
        .def_property_readonly("lam", &CoefficientField::lambda)
        .def_property_readonly("Lam", &CoefficientField::Lambda);

    py::enum_<TransportMethod>(m, "Transport")
        .value("SemiLagrangianLinear", TransportMethod::SemiLagrangianLinear)
        .value("SemiLagrangianCubic", TransportMethod::SemiLagrangianCubic)
        .value("Upwind", TransportMethod::UpwindConservative);

    m.def(
        "solve",
        [](const Array& initial, const CoefficientField& field, const GridSpec& g, TransportMethod transport,
           double theta) {
            SchemeParams p;
            p.transport = transport;
            p.diffusion_theta = theta;
            const auto init = from_slice(initial, g);
            GridField f;
            {
                py::gil_scoped_release release;
                f = solve(init, field, g, p);
            }
            return to_array(f);
        },
        py::arg("initial"), py::arg("field"), py::arg("grid"),
        py::arg("transport") = TransportMethod::SemiLagrangianLinear, py::arg("theta") = 0.5,
        "Evolve an (nx, nv) initial slice; returns the (nt, nx, nv) solution at the time-cell centers.");

    m.def("kolmogorov_kernel", &kolmogorov_kernel, py::arg("t"), py::arg("x"), py::arg("v"), py::arg("y") = 0.0,
          py::arg("w") = 0.0);
    m.def(
        "gaussian_density",
        [](const GridSpec& g, double mean_x, double mean_v, double cov_xx, double cov_xv, double cov_vv, double t) {
            const Gaussian2 g0{mean_x, mean_v, cov_xx, cov_xv, cov_vv, 1.0};
            const Gaussian2 gt = t > 0.0 ? evolve_gaussian(g0, t) : g0;
            return slice_array(sample_slice(g, [&](double x, double v) { return periodic_density(gt, x, v, g.lx); }),
                               g);
        },
        py::arg("grid"), py::arg("mean_x"), py::arg("mean_v"), py::arg("cov_xx"), py::arg("cov_xv"),
        py::arg("cov_vv"), py::arg("t") = 0.0,
        "Periodized Gaussian on a slice, evolved exactly by the A = 1 equation for time t.");

    m.def(
        "lp_norm", [](const Array& f, const GridSpec& g, const CylinderSpec& c, double p) {
            return lp_norm(to_field(f, g), c, p);
        },
        py::arg("f"), py::arg("grid"), py::arg("cylinder"), py::arg("p"));
    m.def(
        "max_over", [](const Array& f, const GridSpec& g, const CylinderSpec& c) { return max_over(to_field(f, g), c); },
        py::arg("f"), py::arg("grid"), py::arg("cylinder"));

    py::class_<EstimateReport>(m, "EstimateReport")
        .def_readonly("estimate_id", &EstimateReport::estimate_id)
        .def_readonly("lhs", &EstimateReport::lhs)
        .def_readonly("rhs_raw", &EstimateReport::rhs_raw)
        .def_readonly("ratio", &EstimateReport::ratio)
        .def_readonly("cap", &EstimateReport::cap)
        .def_readonly("degenerate", &EstimateReport::degenerate)
        .def_readonly("passed", &EstimateReport::pass)
        .def("__repr__", [](const EstimateReport& r) {
            return "EstimateReport(" + r.estimate_id + ", ratio=" + std::to_string(r.ratio) + ")";
        });

    m.def(
        "verify_energy",
        [](const Array& f, const GridSpec& g, const CylinderSpec& q1, const CylinderSpec& q0, double q) {
            return verify_energy(to_field(f, g), q1, q0, q);
        },
        py::arg("f"), py::arg("grid"), py::arg("q1"), py::arg("q0"), py::arg("q") = 6.0);
    m.def(
        "verify_sup_bound",
        [](const Array& f, const GridSpec& g, const CylinderSpec& q0, const CylinderSpec& q_inf) {
            return verify_sup_bound(to_field(f, g, FieldRole::SubSolution), q0, q_inf);
        },
        py::arg("f"), py::arg("grid"), py::arg("q0"), py::arg("q_inf"));

    py::class_<MoserLevel>(m, "MoserLevel")
        .def_readonly("n", &MoserLevel::n)
        .def_readonly("q", &MoserLevel::q)
        .def_readonly("radius", &MoserLevel::radius)
        .def_readonly("norm", &MoserLevel::norm)
        .def_readonly("c_n", &MoserLevel::c_n)
        .def_readonly("partial_product", &MoserLevel::partial_product);
    py::class_<MoserTrace>(m, "MoserTrace")
        .def_readonly("levels", &MoserTrace::levels)
        .def_readonly("a", &MoserTrace::a)
        .def_readonly("b", &MoserTrace::b)
        .def_readonly("predicted_sup", &MoserTrace::predicted_sup)
        .def_readonly("actual_sup", &MoserTrace::actual_sup)
        .def_readonly("stop_reason", &MoserTrace::stop_reason);
    m.def(
        "moser_iterate",
        [](const Array& f, const GridSpec& g, const CylinderSpec& q0, double r_inf, double kappa, int n_max) {
            return moser_iterate(to_field(f, g, FieldRole::SubSolution), q0, r_inf, kappa, n_max);
        },
        py::arg("f"), py::arg("grid"), py::arg("q0"), py::arg("r_inf"), py::arg("kappa") = 3.0, py::arg("n_max") = 12);
    m.def("moser_radius", &moser_radius, py::arg("n"), py::arg("r0"), py::arg("a"));
    m.def("moser_a", &moser_a, py::arg("r0"), py::arg("r_inf"));

    py::class_<HolderEstimate>(m, "HolderEstimate")
        .def_readonly("scales", &HolderEstimate::scales)
        .def_readonly("oscillations", &HolderEstimate::oscillations)
        .def_readonly("alpha_hat", &HolderEstimate::alpha_hat)
        .def_readonly("lambda_hat", &HolderEstimate::lambda_hat)
        .def_readonly("degenerate", &HolderEstimate::degenerate);
    m.def(
        "estimate_holder",
        [](const Array& f, const GridSpec& g, const Point& z0, const std::vector<double>& scales, double floor) {
            return estimate_holder(to_field(f, g), z0, scales, floor);
        },
        py::arg("f"), py::arg("grid"), py::arg("center"), py::arg("scales"), py::arg("noise_floor") = 0.0);

    // Config-driven runs, the same entry points as the command-line tool.
    m.def(
        "run_verify",
        [](const std::string& config_text, const std::filesystem::path& out, const std::vector<std::string>& tasks) {
            const ExperimentConfig cfg = parse_config(config_text, "<python>");
            VerifyOutput v;
            {
                py::gil_scoped_release release;
                v = run_verify(cfg, out, tasks);
            }
            return py::make_tuple(v.all_pass, v.results.reports.size(), v.results.errors);
        },
        py::arg("config"), py::arg("out"), py::arg("tasks") = std::vector<std::string>{},
        "Parse a YAML config, verify member 0 and write CSVs; returns (all_pass, n_reports, errors).");
    m.def(
        "config_hash", [](const std::string& text) { return parse_config(text, "<python>").hash(); },
        py::arg("config"));
}
