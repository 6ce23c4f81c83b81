#include "resolvent_lab/serialize.hpp"

#include <cmath>

namespace rlab {

namespace {

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

Json ivec(const IVec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Json to_json(const QuadratureEstimate& e) {
  return Json{{"value", num(e.value)},
              {"standard_error", num(e.standard_error)},
              {"median_of_means", num(e.median_of_means)},
              {"samples", e.samples},
              {"strata", e.strata},
              {"seed", e.seed},
              {"wall_time", num(e.wall_time)}};
}

Json to_json(const ResolventQuery& q) {
  return Json{{"alpha", {num(q.alpha[0]), num(q.alpha[1]), num(q.alpha[2])}}, {"beta", num(q.beta)}, {"k0", to_json(q.k0)}};
}

Json to_json(const HyperplaneCertificate& c) {
  return Json{{"u", to_json(c.u)},
              {"w", ivec(c.w)},
              {"r0", num(c.r0)},
              {"value", num(c.value)},
              {"max_deviation", num(c.max_deviation)},
              {"all_offsets", c.all_offsets}};
}

Json to_json(const CriticalPointTable& t) {
  Json pts = Json::array();
  for (const auto& p : t.points)
    pts.push_back(Json{{"location", to_json(p.location)},
                       {"value", num(p.value)},
                       {"hessian_det", num(p.hessian_det)},
                       {"index", p.index},
                       {"gradient_residual", num(p.gradient_residual)}});
  return Json{{"count", t.points.size()},
              {"is_morse", t.is_morse},
              {"isolated", t.isolated},
              {"diverged", t.diverged},
              {"grid_per_axis", t.grid_per_axis},
              {"points", pts}};
}

Json to_json(const CurvatureProbe& p) {
  return Json{{"n_max", p.n_max},
              {"n0_hat", p.n0_hat},
              {"eps0_hat", num(p.eps0_hat)},
              {"k_min", to_json(p.k_min)},
              {"u_min", to_json(p.u_min)},
              {"min_by_order", nums(p.min_by_order)},
              {"evaluations", p.evaluations}};
}

Json to_json(const SuppressionConstants& c) {
  return Json{{"n0", c.n0},
              {"eps0", num(c.eps0)},
              {"M", nums(c.M)},
              {"a0", num(c.a0)},
              {"mu", num(c.mu)},
              {"gamma", Json{{"num", c.gamma_num}, {"den", c.gamma_den}, {"value", num(c.gamma)}}},
              {"c_tilde", num(c.c_tilde)},
              {"log_beta0", num(c.log_beta0)},
              {"beta0", num(c.beta0)}};
}

Json to_json(const FOmegaFit& f) {
  Json pts = Json::array();
  for (std::size_t i = 0; i < f.s.size(); ++i) pts.push_back(Json{{"s", num(f.s[i])}, {"estimate", to_json(f.estimates[i])}});
  return Json{{"points", pts},
              {"slope", num(f.slope)},
              {"intercept", num(f.intercept)},
              {"r2", num(f.r2)},
              {"p0_estimate", num(f.p0_estimate)},
              {"pass", f.pass}};
}

Json to_json(const ClassificationReport& r) {
  Json certs = Json::array();
  for (const auto& c : r.certificates) certs.push_back(to_json(c));
  Json j{{"model", r.model_name},
         {"verdict", std::string(to_string(r.verdict))},
         {"reason", r.reason},
         {"certificates", certs},
         {"critical_points", to_json(r.critical_points)},
         {"eps0_threshold", num(r.eps0_threshold)},
         {"fit_r2_threshold", num(r.fit_r2_threshold)}};
  j["probe"] = r.probe ? to_json(*r.probe) : Json(nullptr);
  j["constants"] = r.constants ? to_json(*r.constants) : Json(nullptr);
  j["f_omega"] = r.f_omega ? to_json(*r.f_omega) : Json(nullptr);
  return j;
}

Json to_json(const ScanResult& r, bool all_cells) {
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    if (!all_cells && !c.refined) continue;
    Json cj{{"query", to_json(c.query)}, {"cheap", to_json(c.cheap)}};
    cj["refined"] = c.refined ? to_json(*c.refined) : Json(nullptr);
    cells.push_back(cj);
  }
  return Json{{"beta", num(r.beta)},
              {"best", to_json(r.best)},
              {"estimate", to_json(r.estimate)},
              {"cells_scanned", r.cells.size()},
              {"cells", cells}};
}

Json to_json(const PowerLawFit& f) {
  return Json{{"log_c", num(f.log_c)}, {"rho", num(f.rho)}, {"rho_se", num(f.rho_se)}, {"q", num(f.q)},
              {"r2", num(f.r2)},       {"points", f.points}, {"q_clamped", f.q_clamped}};
}

Json to_json(const SweepResult& r) {
  Json pts = Json::array();
  for (const auto& p : r.points) pts.push_back(to_json(p));
  Json j{{"betas", nums(r.betas)}, {"points", pts}};
  j["fit"] = r.fit ? to_json(*r.fit) : Json(nullptr);
  return j;
}

Json to_json(const SlabBound& b) {
  Json vols = Json::array();
  for (std::size_t i = 0; i < b.deltas.size(); ++i)
    vols.push_back(Json{{"delta", num(b.deltas[i])}, {"volume", to_json(b.volumes[i])}});
  return Json{{"certificate", to_json(b.certificate)},
              {"c_prime", num(b.c_prime)},
              {"C", num(b.C)},
              {"C_nominal", num(b.C_nominal)},
              {"c", num(b.c)},
              {"volumes", vols}};
}

Json to_json(const LevelCurve& c) {
  Json pts = Json::array();
  for (std::size_t i = 0; i < c.t.size(); ++i)
    pts.push_back(Json{{"t", num(c.t[i])},
                       {"gamma", to_json(c.gamma[i])},
                       {"Gamma", to_json(c.Gamma[i])},
                       {"omega", num(c.omega[i])}});
  return Json{{"points", pts}, {"steps", c.steps}, {"rejected", c.rejected}};
}

Json to_json(const CurvatureSequence& s) {
  return Json{{"x0", to_json(s.x0)}, {"v", to_json(s.v)}, {"u0", to_json(s.u0)}, {"N", s.N}, {"g", nums(s.g)}};
}

Json to_json(const CheckRecord& r) {
  return Json{{"id", r.id},
              {"anchor", r.anchor},
              {"status", std::string(to_string(r.status))},
              {"draws", r.draws},
              {"violations", r.violations},
              {"worst_margin", num(r.worst_margin)},
              {"seed", r.seed},
              {"wall_time", num(r.wall_time)},
              {"detail", r.detail}};
}

Json to_json(const VerifyReport& r) {
  Json crit = Json::object();
  for (const auto& [k, v] : r.criteria) crit[k] = v;
  Json recs = Json::array();
  std::size_t pass = 0;
  for (const auto& c : r.records) {
    recs.push_back(to_json(c));
    pass += c.status == CheckStatus::Pass;
  }
  return Json{{"schema_version", r.schema_version},
              {"kind", "verify_report"},
              {"profile", std::string(to_string(r.profile))},
              {"seed", r.seed},
              {"criteria", crit},
              {"summary", Json{{"records", r.records.size()}, {"pass", pass}, {"fail", r.records.size() - pass}}},
              {"records", recs}};
}

Json artifact(std::string kind, Json payload) {
  Json j{{"schema_version", kSchemaVersion}, {"kind", std::move(kind)}};
  for (auto& [k, v] : payload.items()) j[k] = v;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace rlab
