#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pointdiff/doob.hpp"
#include "pointdiff/families.hpp"
#include "pointdiff/gof.hpp"
#include "pointdiff/hmap.hpp"
#include "pointdiff/kernel.hpp"
#include "pointdiff/sampler.hpp"
#include "pointdiff/specfun.hpp"

namespace py = pybind11;
using namespace pointdiff;

namespace {

py::array_t<double> to_array(const std::vector<PlanarPoint>& pts) {
  py::array_t<double> out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    view(i, 0) = pts[i].x;
    view(i, 1) = pts[i].y;
  }
  return out;
}

std::pair<double, double> as_pair(SpecialValue v) { return {v.value, v.err_estimate}; }

}  // namespace

PYBIND11_MODULE(_pointdiff, m) {
  m.doc() = "Planar point-interaction diffusions: kernels, Doob transforms, H-map and samplers.";

  // Exception types live for the lifetime of the interpreter; the handles are
  // released so nothing is torn down during finalization.
  static const py::handle tolerance_error =
      py::exception<ToleranceError>(m, "ToleranceError", PyExc_ArithmeticError).release();
  static const py::handle divergence_error =
      py::exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError).release();
  static const py::handle hypothesis_violation =
      py::exception<HypothesisViolation>(m, "HypothesisViolation", PyExc_RuntimeError).release();
  static const py::handle sampler_error =
      py::exception<SamplerError>(m, "SamplerError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DomainError& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const ToleranceError& e) {
      py::set_error(tolerance_error, e.what());
    } catch (const DivergenceError& e) {
      py::set_error(divergence_error, e.what());
    } catch (const HypothesisViolation& e) {
      // Carries the bracket as args[1:] so callers can inspect it.
      py::set_error(hypothesis_violation, py::make_tuple(e.what(), e.bracket_lo(), e.bracket_hi()));
    } catch (const SamplerError& e) {
      py::set_error(sampler_error, e.what());
    }
  });

  py::class_<PlanarPoint>(m, "PlanarPoint")
      .def(py::init<>())
      .def(py::init([](double x, double y) { return PlanarPoint{x, y}; }), py::arg("x"), py::arg("y"))
      .def(py::init([](py::sequence s) {
        if (py::len(s) != 2) throw py::value_error("a planar point needs two coordinates");
        return PlanarPoint{s[0].cast<double>(), s[1].cast<double>()};
      }))
      .def_readwrite("x", &PlanarPoint::x)
      .def_readwrite("y", &PlanarPoint::y)
      .def("norm", &PlanarPoint::norm)
      .def("__iter__", [](const PlanarPoint& p) { return py::iter(py::make_tuple(p.x, p.y)); })
      .def("__eq__", [](const PlanarPoint& a, const PlanarPoint& b) { return a == b; })
      .def("__repr__", [](const PlanarPoint& p) {
        return "PlanarPoint(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
      });
  py::implicitly_convertible<py::tuple, PlanarPoint>();
  py::implicitly_convertible<py::list, PlanarPoint>();

  // ---------------------------------------------------------------- specfun
  m.def("heat_kernel", &heat_kernel, py::arg("t"), py::arg("x"));
  m.def("nu", &volterra::nu, py::arg("a"), "Volterra function nu(a) (tabulated).");
  m.def("nu_prime", &volterra::nu_prime, py::arg("a"));
  m.def("renewal_integral", &renewal_integral, py::arg("x"));
  m.def("bessel_k", [](int n, double z) { return as_pair(bessel_k(n, z)); }, py::arg("order"), py::arg("z"),
        "(value, err_estimate) of K_n(z).");
  m.def("incomplete_bessel_k", [](int n, double z, double y) { return as_pair(incomplete_bessel_k(n, z, y)); },
        py::arg("order"), py::arg("z"), py::arg("y"));

  // ----------------------------------------------------------------- kernel
  py::class_<KernelParams>(m, "KernelParams")
      .def(py::init([](double theta) { return KernelParams{theta, {}}; }), py::arg("theta"))
      .def_readonly("theta", &KernelParams::theta);
  m.def("interaction_v", &interaction_v, py::arg("params"), py::arg("t"), py::arg("x"), py::arg("y"));
  m.def("full_kernel", &full_kernel, py::arg("params"), py::arg("t"), py::arg("x"), py::arg("y"));
  m.def("semigroup_residual", &semigroup_residual, py::arg("params"), py::arg("s"), py::arg("t"), py::arg("x"),
        py::arg("y"));
  m.def("gst_eigen_residual", &gst_eigen_residual, py::arg("params"), py::arg("t"), py::arg("x"));

  // --------------------------------------------------------------- families
  py::class_<FamilySpec>(m, "FamilySpec")
      .def_static("gst", &FamilySpec::gst, py::arg("theta"), py::arg("T"))
      .def_static("leb", &FamilySpec::leb, py::arg("theta"), py::arg("T"))
      .def_static("dir", &FamilySpec::dir, py::arg("theta"), py::arg("T"), py::arg("eps"))
      .def_static("gau", &FamilySpec::gau, py::arg("theta"), py::arg("T"), py::arg("alpha"))
      .def_static("parse", &FamilySpec::parse, py::arg("selector"), py::arg("theta"), py::arg("T"))
      .def_readonly("theta", &FamilySpec::theta)
      .def_readonly("T", &FamilySpec::horizon_T)
      .def("selector", &FamilySpec::selector)
      .def("__repr__", [](const FamilySpec& f) {
        return "FamilySpec('" + f.selector() + "', theta=" + std::to_string(f.theta) +
               ", T=" + std::to_string(f.horizon_T) + ")";
      });
  m.def("h_eval", &h_eval, py::arg("family"), py::arg("t"), py::arg("x"));
  m.def("volterra_V", &volterra_V, py::arg("family"), py::arg("t"), py::arg("x"));
  m.def("base_conv", &base_conv, py::arg("family"), py::arg("t"), py::arg("x"));
  m.def("drift_eval", [](const FamilySpec& f, double t, PlanarPoint x) { return drift_eval(f, t, x).components; },
        py::arg("family"), py::arg("t"), py::arg("x"), "grad log h_t(x).");

  // ------------------------------------------------------------------- doob
  py::class_<DensityEval>(m, "DensityEval")
      .def(py::init<const FamilySpec&>(), py::arg("family"))
      .def_property_readonly("family", &DensityEval::family);
  m.def("transition_density", &transition_density, py::arg("d"), py::arg("s"), py::arg("t"), py::arg("x"),
        py::arg("y"));
  m.def("conditional_density", &conditional_density, py::arg("d"), py::arg("s"), py::arg("t"), py::arg("x"),
        py::arg("y"));
  m.def("survival_probability", &survival_probability, py::arg("d"), py::arg("t"), py::arg("x"));
  m.def("rn_derivative", &rn_derivative, py::arg("dh"), py::arg("dhbar"), py::arg("x0"), py::arg("xT"));
  m.def("normalization_residual", &normalization_residual, py::arg("d"), py::arg("s"), py::arg("t"), py::arg("x"));
  py::class_<HitLaw>(m, "HitLaw")
      .def(py::init<const DensityEval&, PlanarPoint>(), py::arg("d"), py::arg("x0"))
      .def_property_readonly("survive_prob", &HitLaw::survive_prob)
      .def("density", &HitLaw::density, py::arg("t"))
      .def("cdf", &HitLaw::cdf, py::arg("t"))
      .def("quantile", &HitLaw::quantile, py::arg("u"))
      .def("total_mass", &HitLaw::total_mass, py::arg("rel_tol") = 1e-12);

  // ------------------------------------------------------------------- hmap
  py::class_<HEval>(m, "HEval").def(py::init<const FamilySpec&>(), py::arg("family"));
  m.def("h_map", &h_map, py::arg("e"), py::arg("t"), py::arg("x"));
  m.def("h_map_inverse", &h_map_inverse, py::arg("e"), py::arg("t"), py::arg("y"));
  m.def("jacobian_eigs", [](const HEval& e, double t, PlanarPoint x) {
    const auto j = jacobian_eigs(e, t, x);
    return std::make_pair(j.lambda_radial, j.lambda_tangential);
  }, py::arg("e"), py::arg("t"), py::arg("x"), "(radial, tangential) eigenvalues of DH_t(x).");

  // ---------------------------------------------------------------- sampler
  m.def("sample_transitions",
        [](const DensityEval& d, double s, double t, PlanarPoint x, long n, std::uint64_t seed, int workers) {
          std::vector<PlanarPoint> pts;
          {
            py::gil_scoped_release release;
            pts = sample_transitions(d, s, t, x, n, seed, workers);
          }
          return to_array(pts);
        },
        py::arg("d"), py::arg("s"), py::arg("t"), py::arg("x"), py::arg("n"), py::arg("seed"),
        py::arg("workers") = 1, "n x 2 array of draws from d_{s,t}(x, .).");
  m.def("sample_path",
        [](const DensityEval& d, PlanarPoint x0, const std::vector<double>& grid, std::uint64_t seed,
           std::uint64_t index, bool conditional) {
          Rng rng(seed, index);
          const auto p = conditional ? sample_conditional_path(d, x0, grid, rng) : sample_path_marginal(d, x0, grid, rng);
          return to_array(p.points);
        },
        py::arg("d"), py::arg("x0"), py::arg("grid"), py::arg("seed"), py::arg("index") = 0,
        py::arg("conditional") = false, "Positions at the grid times; grid[0] must be 0.");
  m.def("sample_hit_times",
        [](const HitLaw& law, long n, std::uint64_t seed) {
          py::array_t<double> out(static_cast<py::ssize_t>(n));
          auto view = out.mutable_unchecked<1>();
          for (long i = 0; i < n; ++i) {
            Rng rng(seed, static_cast<std::uint64_t>(i));
            view(i) = sample_hit_time(law, rng).value_or(std::numeric_limits<double>::quiet_NaN());
          }
          return out;
        },
        py::arg("law"), py::arg("n"), py::arg("seed"), "Hit times; NaN marks paths that survive to T.");
  m.def("submartingale_probe",
        [](const DensityEval& d, PlanarPoint x0, const std::vector<double>& grid, long n, std::uint64_t seed,
           int workers) {
          std::vector<McEstimate> rows;
          {
            py::gil_scoped_release release;
            rows = submartingale_probe(d, x0, grid, n, seed, workers);
          }
          std::vector<std::pair<double, double>> out;
          for (const auto& r : rows) out.emplace_back(r.mean, r.std_error);
          return out;
        },
        py::arg("d"), py::arg("x0"), py::arg("grid"), py::arg("n_paths"), py::arg("seed"), py::arg("workers") = 1,
        "(mean, std_error) of p_{T-t}(X_t) at each grid time.");
  m.def("radial_chi_square_p",
        [](const DensityEval& d, double s, double t, PlanarPoint x, const std::vector<double>& radii, int bins) {
          return radial_chi_square(RadialTransitionLaw(d, s, t, x.norm()), radii, bins).p_value;
        },
        py::arg("d"), py::arg("s"), py::arg("t"), py::arg("x"), py::arg("radii"), py::arg("bins") = 20);
}
