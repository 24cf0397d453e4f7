#include "wavekernel/boundary_map.hpp"
#include "wavekernel/control_op.hpp"
#include "wavekernel/errors.hpp"
#include "wavekernel/goursat_kernel.hpp"
#include "wavekernel/oracle.hpp"
#include "wavekernel/propagator.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wavekernel;

namespace {

py::dict snapshot_dict(const WaveSnapshot& s) {
    py::dict d;
    d["T"] = s.T;
    d["x"] = s.x;
    d["u"] = s.u;
    d["u_x"] = s.u_x;
    d["u_xx"] = s.u_xx;
    return d;
}

WaveSnapshot snapshot_from(const py::dict& d) {
    WaveSnapshot s;
    s.T = d["T"].cast<double>();
    s.x = d["x"].cast<std::vector<double>>();
    s.u = d["u"].cast<Eigen::MatrixXcd>();
    return s;
}

SampledFunction sampled(double T, const Eigen::MatrixXcd& values) {
    SampledFunction g;
    g.T = T;
    g.values = values;
    return g;
}

PotentialGrid sampled_potential(const std::vector<double>& x, const std::vector<Matrix>& values) {
    PotentialDescription d;
    d.kind = PotentialDescription::Kind::sampled;
    d.sample_x = x;
    d.sample_values = values;
    return build_potential(d);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kernel representation of the matrix telegraph equation with boundary control";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_IndexError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<SingularError>(m, "SingularError", PyExc_ArithmeticError);

    py::class_<PotentialGrid>(m, "Potential")
        .def_static("zero", &PotentialGrid::zero, py::arg("n"), py::arg("x_max"), py::arg("step"))
        .def_static("constant", &PotentialGrid::constant, py::arg("c"), py::arg("x_max"), py::arg("step"))
        .def_static("preset", &PotentialGrid::preset, py::arg("name"), py::arg("x_max"), py::arg("step"))
        .def_static("preset_names", &PotentialGrid::preset_names)
        .def_static("sampled", &sampled_potential, py::arg("x"), py::arg("values"),
                    "Uniform samples starting at x = 0; values is a list of n x n Hermitian matrices.")
        .def_property_readonly("dimension", &PotentialGrid::dimension)
        .def_property_readonly("x_max", &PotentialGrid::x_max)
        .def_property_readonly("step", &PotentialGrid::step)
        .def("at", &PotentialGrid::at)
        .def("conjugated", &PotentialGrid::conjugated);

    m.def("integral_Q", &integral_Q, py::arg("p"), py::arg("a"), py::arg("b"));
    m.def("majorant_S", &majorant_S, py::arg("p"), py::arg("eta"));
    m.def("norm_constants", [](const PotentialGrid& p, double T) {
        const NormConstants c = norm_constants(p, T);
        return py::dict(py::arg("a1") = c.a1, py::arg("a2") = c.a2);
    });

    py::class_<KernelField>(m, "KernelField")
        .def_property_readonly("horizon", &KernelField::horizon)
        .def_property_readonly("step", &KernelField::step)
        .def_property_readonly("dimension", &KernelField::dimension)
        .def_property_readonly("lattice_size", &KernelField::lattice_size)
        .def_property_readonly("iterations", &KernelField::iterations)
        .def_property_readonly("tail_bound", &KernelField::tail_bound)
        .def_property_readonly("last_change", &KernelField::last_change)
        .def_property_readonly("change_history", &KernelField::change_history)
        .def("v", [](const KernelField& f, std::size_t i, std::size_t j) { return Matrix(f.v().matrix(i, j)); },
             py::arg("i"), py::arg("j"))
        .def("w", &kernel_w, py::arg("x"), py::arg("t"));

    m.def("solve_goursat", &solve_goursat, py::arg("p"), py::arg("T"), py::arg("h"), py::arg("tol") = 1e-10,
          py::arg("max_sweeps") = 100);
    m.def("kernel_constants", [](const PotentialGrid& p, const KernelField& f) {
        const KernelConstants k = kernel_constants(p, f);
        return py::dict(py::arg("b1") = k.b1, py::arg("b2") = k.b2, py::arg("b3") = k.b3, py::arg("b4") = k.b4);
    });
    m.def("check_goursat", [](const PotentialGrid& p, const KernelField& f) {
        const GoursatResiduals r = check_goursat(p, f);
        return py::dict(py::arg("diagonal") = r.diagonal, py::arg("edge") = r.edge, py::arg("interior") = r.interior);
    });
    m.def("apriori_bound_excess", &apriori_bound_excess);

    py::class_<Control>(m, "Control")
        .def_static("zero", &Control::zero, py::arg("n"), py::arg("T"))
        .def_static("bump", &Control::bump, py::arg("T"), py::arg("start"), py::arg("end"), py::arg("amplitude"))
        .def_static("from_samples", &Control::from_samples, py::arg("T"), py::arg("samples"),
                    py::arg("support_start"))
        .def_property_readonly("dimension", &Control::dimension)
        .def_property_readonly("horizon", &Control::horizon)
        .def("__call__", &Control::value)
        .def("sample", &Control::sample, py::arg("N"));

    m.def("propagate",
          [](const PotentialGrid& p, const KernelField& f, const Control& c, double T, std::size_t N) {
              return snapshot_dict(propagate(p, f, c, T, N));
          },
          py::arg("p"), py::arg("field"), py::arg("f"), py::arg("T"), py::arg("N"));
    m.def("apply_W",
          [](const PotentialGrid& p, const KernelField& f, const Control& c, double T, std::size_t N) {
              return apply_W(p, f, c, T, N).values;
          },
          py::arg("p"), py::arg("field"), py::arg("f"), py::arg("T"), py::arg("N"));

    py::class_<VolterraSystem>(m, "VolterraSystem")
        .def_property_readonly("horizon", &VolterraSystem::horizon)
        .def_property_readonly("intervals", &VolterraSystem::intervals)
        .def("apply", &VolterraSystem::apply)
        .def("solve", &VolterraSystem::solve)
        .def("dense", &VolterraSystem::dense);
    m.def("build_volterra", &build_volterra, py::arg("field"), py::arg("T"), py::arg("N"));
    m.def("invert_W",
          [](const VolterraSystem& sys, const Eigen::MatrixXcd& u) {
              return reflect(invert_W(sys, sampled(sys.horizon(), u))).values;
          },
          py::arg("system"), py::arg("u"), "Control samples f(t_k) recovered from u(x_k, T).");
    m.def("condition_estimate", [](const VolterraSystem& sys) {
        const ConditionEstimate c = condition_estimate(sys);
        return py::dict(py::arg("sigma_min") = c.sigma_min, py::arg("sigma_max") = c.sigma_max,
                        py::arg("cond") = c.cond);
    });
    m.def("inverse_h2_norm", [](const VolterraSystem& sys) { return inverse_h2_norm(sys); });
    m.def("h2_norm", [](double T, const Eigen::MatrixXcd& g) { return h2_norm(sampled(T, g)); });
    m.def("certify_h2_bound",
          [](const PotentialGrid& p, const KernelField& f, double T, int trials, std::uint64_t seed, std::size_t N) {
              const SobolevReport r = certify_h2_bound(p, f, T, trials, seed, N);
              py::dict d;
              d["bound_i"] = r.bound_i;
              d["bound_ii"] = r.bound_ii;
              d["bound_ii_c"] = r.bound_ii0;
              d["bound_iii"] = r.bound_iii;
              d["bound_h2"] = r.bound_h2;
              d["ratio_i"] = r.ratio_i;
              d["ratio_ii"] = r.ratio_ii;
              d["ratio_ii_c"] = r.ratio_ii0;
              d["ratio_iii"] = r.ratio_iii;
              d["empirical_ratio"] = r.empirical_ratio;
              d["trials"] = r.trials;
              d["violations"] = r.violations;
              return d;
          },
          py::arg("p"), py::arg("field"), py::arg("T"), py::arg("trials") = 100, py::arg("seed") = 0,
          py::arg("N") = 128);

    m.def("fd_solve",
          [](const PotentialGrid& p, const Control& f, double T, std::size_t N_x, double cfl) {
              FDConfig cfg;
              cfg.T = T;
              cfg.N_x = N_x;
              cfg.cfl = cfl;
              return snapshot_dict(fd_solve(p, f, cfg));
          },
          py::arg("p"), py::arg("f"), py::arg("T"), py::arg("N_x") = 256, py::arg("cfl") = 1.0);
    m.def("compare", [](const py::dict& a, const py::dict& b) {
        const Comparison c = compare(snapshot_from(a), snapshot_from(b));
        return py::dict(py::arg("l2") = c.l2, py::arg("max") = c.max, py::arg("rel_l2") = c.rel_l2);
    });
    m.def("bessel_kernel_constant", &bessel_kernel_constant, py::arg("c"), py::arg("x"), py::arg("t"));

    py::class_<WeylSolution>(m, "WeylSolution")
        .def_property_readonly("cutoff", &WeylSolution::cutoff)
        .def("at", &WeylSolution::at)
        .def("derivative", &WeylSolution::derivative);
    m.def("weyl_solution", &weyl_solution, py::arg("p"), py::arg("X"), py::arg("c"));
}
