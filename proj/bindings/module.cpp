#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "anosovlab/manifolds.hpp"
#include "anosovlab/map_spec.hpp"
#include "anosovlab/regularity.hpp"
#include "anosovlab/splitting2.hpp"
#include "anosovlab/splitting_nd.hpp"

namespace py = pybind11;
using namespace anosovlab;

namespace {

TorusPoint as_point(const Eigen::VectorXd& v) { return TorusPoint(v); }

std::pair<double, double> dir_pair(const Direction2& d) { return {d.u1, d.u2}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "hyperbolic splitting laboratory (C++ core)";

  py::register_exception<Error>(m, "AnosovError");

  py::class_<MapSpec>(m, "MapSpec")
      .def_static("from_json", &map_spec_from_json_text, py::arg("text"))
      .def("to_json", &map_spec_to_json_text)
      .def_property_readonly("dim", &MapSpec::dim);

  m.def("apply_map", [](const MapSpec& s, const Eigen::VectorXd& x) {
    return apply_map(s, as_point(x)).coords;
  });
  m.def("apply_inverse", [](const MapSpec& s, const Eigen::VectorXd& x) {
    return apply_inverse(s, as_point(x)).coords;
  });
  m.def("jacobian", [](const MapSpec& s, const Eigen::VectorXd& x) {
    return Mat(jacobian(s, as_point(x)));
  });
  m.def("cocycle",
        [](const MapSpec& s, const Eigen::VectorXd& x, int n, double cap) {
          return Mat(cocycle(s, as_point(x), n, cap));
        },
        py::arg("spec"), py::arg("x"), py::arg("n"),
        py::arg("entry_cap") = kDefaultEntryCap);
  m.def("orbit",
        [](const MapSpec& s, const Eigen::VectorXd& x, int n, bool forward) {
          auto pts = orbit(s, as_point(x), n,
                           forward ? OrbitDirection::forward
                                   : OrbitDirection::backward);
          std::vector<Eigen::VectorXd> out;
          for (const auto& p : pts) out.push_back(p.coords);
          return out;
        },
        py::arg("spec"), py::arg("x"), py::arg("n"), py::arg("forward") = true);
  m.def("volume_defect", [](const MapSpec& s, const Eigen::VectorXd& x) {
    return volume_defect(s, as_point(x));
  });

  m.def("unstable_direction",
        [](const MapSpec& s, const Eigen::VectorXd& x, int n) {
          return dir_pair(unstable_direction(s, as_point(x), n));
        },
        py::arg("spec"), py::arg("x"), py::arg("n") = 60);
  m.def("stable_direction",
        [](const MapSpec& s, const Eigen::VectorXd& x, int n) {
          return dir_pair(stable_direction(s, as_point(x), n));
        },
        py::arg("spec"), py::arg("x"), py::arg("n") = 60);
  m.def("slope_of", [](double u1, double u2) {
    return slope_of(Direction2::of(u1, u2));
  });

  py::class_<HyperbolicityEstimate>(m, "HyperbolicityEstimate")
      .def_readonly("kappa_hat", &HyperbolicityEstimate::kappa_hat)
      .def_readonly("lambda_hat", &HyperbolicityEstimate::lambda_hat)
      .def_readonly("big_c_hat", &HyperbolicityEstimate::big_c_hat)
      .def_readonly("distortion_l_hat", &HyperbolicityEstimate::distortion_l_hat)
      .def_readonly("alpha_max", &HyperbolicityEstimate::alpha_max)
      .def_readonly("horizon_n", &HyperbolicityEstimate::horizon_n);

  m.def("finite_time_rates",
        [](const MapSpec& s, int samples, int n) {
          return finite_time_rates(s, low_discrepancy_points(s.dim(), samples), n);
        },
        py::arg("spec"), py::arg("samples") = 256, py::arg("n") = 40);

  m.def("grow_manifold",
        [](const MapSpec& s, const Eigen::VectorXd& base, const std::string& kind,
           double half_length, double step, int depth) {
          ManifoldRequest req;
          req.base = as_point(base);
          req.kind = kind == "stable" ? ManifoldKind::stable
                                      : ManifoldKind::unstable;
          req.half_length = half_length;
          req.step = step;
          req.depth = depth;
          Polyline p = grow_manifold(s, req);
          std::vector<std::array<double, 3>> rows;
          for (std::size_t i = 0; i < p.lift.size(); ++i)
            rows.push_back({p.arclength[i], p.lift[i].x(), p.lift[i].y()});
          return rows;  // (t, x, y) with the continuous lift
        },
        py::arg("spec"), py::arg("base"), py::arg("kind") = "unstable",
        py::arg("half_length") = 0.2, py::arg("step") = 0.01, py::arg("depth") = 18);

  py::class_<HolderReport>(m, "HolderReport")
      .def_readonly("exponent", &HolderReport::exponent)
      .def_readonly("constant", &HolderReport::constant)
      .def_readonly("fit_range", &HolderReport::fit_range)
      .def_readonly("r_squared", &HolderReport::r_squared)
      .def_readonly("n_samples", &HolderReport::n_samples);

  m.def("fit_holder",
        [](const std::vector<std::pair<double, double>>& samples, double floor) {
          std::vector<HolderSample> hs;
          for (auto [t, dev] : samples) hs.push_back({t, dev});
          return fit_holder(hs, floor);
        },
        py::arg("samples"), py::arg("floor") = 1e-12);
  m.def("second_difference", &second_difference, py::arg("f_plus"),
        py::arg("f_base"), py::arg("f_minus"), py::arg("h1"), py::arg("h2"));
  m.def("stable_transversal_samples",
        [](const MapSpec& s, const Eigen::VectorXd& x,
           const std::vector<double>& scales) {
          std::vector<std::pair<double, double>> out;
          for (const auto& smp : stable_transversal_samples(s, as_point(x), scales))
            out.emplace_back(smp.t, smp.deviation);
          return out;
        },
        py::arg("spec"), py::arg("x"), py::arg("scales"));

  m.def("graph_transform",
        [](const Eigen::MatrixXd& j, int d_u, const Eigen::MatrixXd& t) {
          return graph_transform(BlockJacobian::split(j, d_u), GraphMap{t}).matrix;
        },
        py::arg("jacobian"), py::arg("d_u"), py::arg("t"));
  m.def("unstable_graph",
        [](const MapSpec& s, const Eigen::VectorXd& x, int n, int d_u) {
          return unstable_graph(s, as_point(x), n, d_u).matrix;
        },
        py::arg("spec"), py::arg("x"), py::arg("n") = 60, py::arg("d_u") = 1);
  m.def("subspace_angle",
        [](const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
          return subspace_angle(GraphMap{p}, GraphMap{q});
        });
}
