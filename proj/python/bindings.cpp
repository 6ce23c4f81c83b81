#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "resolvent_lab/calculus.hpp"
#include "resolvent_lab/classify.hpp"
#include "resolvent_lab/error.hpp"
#include "resolvent_lab/quadrature.hpp"
#include "resolvent_lab/scaling.hpp"
#include "resolvent_lab/serialize.hpp"
#include "resolvent_lab/verify.hpp"

namespace py = pybind11;
using namespace rlab;

namespace {

Vec to_vec(const std::vector<double>& v) {
  if (v.empty() || int(v.size()) > kMaxDim) throw Error(ErrorCode::InvalidArgument, "vector length must be 1..4");
  Vec x(int(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x[Eigen::Index(i)] = v[i];
  return x;
}

std::vector<double> from_vec(const Vec& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

McConfig config(std::uint64_t samples, std::uint64_t seed, int workers, bool record_time) {
  McConfig c;
  c.samples = samples;
  c.seed = seed;
  c.workers = workers;
  c.record_time = record_time;
  return c;
}

std::string crossing(const DispersionModel& m, std::vector<double> alpha, double beta, std::vector<double> k0,
                     std::uint64_t samples, std::uint64_t seed, int workers, bool record_time) {
  if (alpha.size() != 3) throw Error(ErrorCode::InvalidArgument, "alpha needs three values");
  ResolventQuery q;
  q.alpha = {alpha[0], alpha[1], alpha[2]};
  q.beta = beta;
  q.k0 = k0.empty() ? Vec(Vec::Zero(m.dim())) : to_vec(k0);
  validate(q, m.dim());
  auto e = crossing_integral(m, q, config(samples, seed, workers, record_time));
  return dump(artifact("integrate", Json{{"model", m.name()}, {"query", to_json(q)}, {"estimate", to_json(e)}}));
}

std::string f_omega_json(const DispersionModel& m, double s, std::uint64_t samples, std::uint64_t seed, int workers,
                         bool record_time) {
  auto e = f_omega(m, s, config(samples, seed, workers, record_time));
  return dump(artifact("f_omega", Json{{"model", m.name()}, {"s", s}, {"estimate", to_json(e)}}));
}

std::string classify_json(const DispersionModel& m, bool fit, std::uint64_t samples, std::uint64_t seed, int workers,
                          int n_max, bool record_time) {
  ClassifyOptions o;
  o.fit_f_omega = fit;
  o.f_omega_config = config(samples, seed, workers, record_time);
  o.probe.n_max = n_max;
  o.probe.workers = workers;
  o.hyperplanes.seed = seed;
  return dump(artifact("classification", to_json(classify(m, o))));
}

std::string sweep_json(const DispersionModel& m, std::vector<double> betas, std::uint64_t samples, std::uint64_t seed,
                       int workers, int alpha_points, int k0_per_axis, int top_k, std::uint64_t final_samples,
                       bool record_time) {
  ScanOptions so;
  so.config = config(samples, seed, workers, record_time);
  so.top_k = top_k;
  so.final_samples = final_samples;
  auto r = beta_sweep(m, betas.empty() ? default_beta_grid() : betas, default_scan_grid(m, alpha_points, k0_per_axis), so);
  return dump(artifact("sweep", Json{{"model", m.name()}, {"sweep", to_json(r)}}));
}

std::string trace_json(const DispersionModel& m, std::vector<double> x0v, std::vector<double> vv, double lambda,
                       double extent, int points, int n_max) {
  Vec x0 = to_vec(x0v), v = to_vec(vv);
  if (x0.size() != m.dim() || v.size() != m.dim()) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  if (lambda <= 0) lambda = max_chart_radius(m, x0);
  auto chart = build_level_chart(m, x0, lambda);
  v -= v.dot(chart.u0()) * chart.u0();
  if (v.norm() < 1e-12) throw Error(ErrorCode::InvalidArgument, "v is parallel to grad omega(x0)");
  v /= v.norm();
  auto c = trace_level_curve(chart, Vec::Zero(m.dim()), v, linspace(-extent * lambda, extent * lambda, points));
  Json j{{"model", m.name()}, {"x0", to_json(x0)}, {"v", to_json(v)}, {"lambda", lambda}, {"curve", to_json(c)}};
  if (m.is_trig()) j["gtilde"] = to_json(gtilde_sequence(m, x0, v, n_max));
  return dump(artifact("trace", j));
}

std::string probe_json(const DispersionModel& m, int n_max, int grid, int workers) {
  ProbeOptions po;
  po.n_max = n_max;
  po.grid_per_axis = grid;
  po.workers = workers;
  return dump(artifact("probe", Json{{"model", m.name()}, {"probe", to_json(curvature_probe(m, po))}}));
}

std::string verify_json(const std::string& profile, std::uint64_t seed, int workers, bool record_time) {
  VerifyOptions o;
  o.profile = parse_profile(profile);
  o.seed = seed;
  o.workers = workers;
  o.record_time = record_time;
  return dump(to_json(run_all(o)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "resolvent_lab native core";
  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<DispersionModel>(m, "DispersionModel")
      .def_property_readonly("name", &DispersionModel::name)
      .def_property_readonly("dim", &DispersionModel::dim)
      .def_property_readonly("kind", [](const DispersionModel& d) { return std::string(to_string(d.kind())); })
      .def("eval", [](const DispersionModel& d, std::vector<double> x) { return d.eval(to_vec(x)); })
      .def("gradient", [](const DispersionModel& d, std::vector<double> x) { return from_vec(d.gradient(to_vec(x))); })
      .def("hessian",
           [](const DispersionModel& d, std::vector<double> x) {
             Mat h = d.hessian(to_vec(x));
             std::vector<std::vector<double>> out(h.rows(), std::vector<double>(h.cols()));
             for (Eigen::Index i = 0; i < h.rows(); ++i)
               for (Eigen::Index j = 0; j < h.cols(); ++j) out[i][j] = h(i, j);
             return out;
           })
      .def("to_dsl", [](const DispersionModel& d) { return to_dsl(d); })
      .def("__repr__", [](const DispersionModel& d) { return "<DispersionModel " + d.name() + ">"; });

  m.def("builtin_names", &builtin_names);
  m.def("builtin_model", [](const std::string& n) { return builtin_model(n); });
  m.def("resolve_model", [](const std::string& n) { return resolve_model(n); });
  m.def("parse_model", [](const std::string& text, const std::string& name) { return parse_dispersion_dsl(text, name); },
        py::arg("text"), py::arg("name") = "custom");

  auto nogil = py::call_guard<py::gil_scoped_release>();
  m.def("crossing_integral", &crossing, py::arg("model"), py::arg("alpha"), py::arg("beta"),
        py::arg("k0") = std::vector<double>{}, py::arg("samples") = 100000, py::arg("seed") = 1, py::arg("workers") = 0,
        py::arg("record_time") = true, nogil);
  m.def("f_omega", &f_omega_json, py::arg("model"), py::arg("s"), py::arg("samples") = 100000, py::arg("seed") = 1,
        py::arg("workers") = 0, py::arg("record_time") = true, nogil);
  m.def("classify", &classify_json, py::arg("model"), py::arg("fit_f_omega") = true, py::arg("samples") = 1000000,
        py::arg("seed") = 1, py::arg("workers") = 0, py::arg("n_max") = 4, py::arg("record_time") = true, nogil);
  m.def("sweep", &sweep_json, py::arg("model"), py::arg("betas") = std::vector<double>{}, py::arg("samples") = 100000,
        py::arg("seed") = 1, py::arg("workers") = 0, py::arg("alpha_points") = 5, py::arg("k0_per_axis") = 2,
        py::arg("top_k") = 8, py::arg("final_samples") = 0, py::arg("record_time") = true, nogil);
  m.def("trace", &trace_json, py::arg("model"), py::arg("x0"), py::arg("v"), py::arg("lambda_") = 0.0,
        py::arg("extent") = 1.5, py::arg("points") = 31, py::arg("n_max") = 4, nogil);
  m.def("probe", &probe_json, py::arg("model"), py::arg("n_max") = 4, py::arg("grid") = 0, py::arg("workers") = 0, nogil);
  m.def("verify", &verify_json, py::arg("profile") = "smoke", py::arg("seed") = 20240601, py::arg("workers") = 0,
        py::arg("record_time") = true, nogil);
  m.def("gtilde", [](const DispersionModel& d, std::vector<double> x0, std::vector<double> v, int N) {
    return gtilde_sequence(d, to_vec(x0), to_vec(v), N).g;
  });
  m.def("select_nu", &select_nu, py::arg("n"), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("eps_prime"));
  m.attr("schema_version") = kSchemaVersion;
}
