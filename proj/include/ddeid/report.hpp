#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddeid/analysis.hpp"
#include "ddeid/simulate.hpp"
#include "ddeid/version.hpp"

namespace ddeid {

using Json = nlohmann::ordered_json;

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json to_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

inline Json to_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

inline Json to_json(const EquilibriumPoint& e, const ModelSpec& spec) {
  Json j;
  j["x_e"] = to_json(e.x_e);
  j["y_e"] = to_json(Vector(spec.output_map * e.x_e));
  j["residual_norm"] = e.residual_norm;
  j["converged"] = e.converged;
  return j;
}

inline Json to_json(const LinearDelayModel& m) {
  Json j;
  auto list = [](const std::vector<TaggedMatrix>& v) {
    Json a = Json::array();
    for (const auto& t : v) a.push_back(Json{{"delay", t.delay}, {"matrix", to_json(t.m)}});
    return a;
  };
  j["A"] = list(m.A);
  j["B"] = list(m.B);
  j["u_bar"] = to_json(m.u_bar);
  return j;
}

inline Json to_json(const RankVerdict& v) {
  Json j;
  j["n"] = v.n;
  j["rel_tol"] = v.rel_tol;
  j["identifiable"] = v.identifiable;
  j["z_witness"] = v.z_witness ? to_json(*v.z_witness) : Json(nullptr);
  Json per = Json::array();
  for (const auto& s : v.per_z) {
    per.push_back(Json{{"z", to_json(s.z)},
                       {"rank", s.rank},
                       {"singular_values", to_json(s.singular_values)},
                       {"threshold", s.threshold}});
  }
  j["per_z"] = per;
  j["notes"] = v.notes;
  return j;
}

inline Json to_json(const CoeffMapReport& r, const std::vector<std::string>& params) {
  Json j;
  j["map_dim"] = Json{{"rows", r.rows}, {"cols", r.cols}};
  j["jacobian_rank"] = r.jacobian_rank;
  j["rel_tol"] = r.rel_tol;
  j["threshold"] = r.threshold;
  j["singular_values"] = to_json(r.singular_values);
  j["locally_injective"] = r.locally_injective;
  Json sens = Json::object();
  for (std::size_t c = 0; c < r.sensitive_coeffs.size() && c < params.size(); ++c)
    sens[params[c]] = r.sensitive_coeffs[c];
  j["sensitive_coeffs"] = sens;
  j["entangled"] = r.entangled;
  j["notes"] = r.notes;
  return j;
}

inline Json to_json(const ScalingReport& s) {
  Json j;
  j["T"] = s.T;
  j["h"] = s.h;
  j["input_norm"] = s.input_norm;
  Json pts = Json::array();
  for (const auto& p : s.points) {
    pts.push_back(Json{{"eps", p.eps},
                       {"max_deviation", p.max_deviation},
                       {"max_remainder", p.max_remainder}});
  }
  j["points"] = pts;
  j["dropped_eps"] = s.dropped_eps;
  j["slope_deviation"] = std::isfinite(s.slope_deviation) ? Json(s.slope_deviation) : Json(nullptr);
  j["slope_remainder"] = std::isfinite(s.slope_remainder) ? Json(s.slope_remainder) : Json(nullptr);
  j["notes"] = s.notes;
  return j;
}

inline Json to_json(const ParameterPoint& p, const ModelSpec& spec) {
  Json j;
  auto named = [](const std::vector<std::string>& names, const Vector& v) {
    Json o = Json::object();
    for (std::size_t i = 0; i < names.size() && i < static_cast<std::size_t>(v.size()); ++i)
      o[names[i]] = v[static_cast<Eigen::Index>(i)];
    return o;
  };
  j["params"] = named(spec.param_names, p.p_s);
  j["state_delays"] = named(spec.state_delay_names, p.tau);
  j["input_delays"] = named(spec.input_delay_names, p.nu);
  j["u_bar"] = named(spec.input_names, p.u_bar);
  return j;
}

inline Json to_json(const AnalysisConfig& c) {
  Json j;
  j["run"] = Json{{"seed", c.seed}, {"samples", c.parameter_samples}};
  j["solver"] = Json{{"tol", c.solver.tol_residual},
                     {"max_iters", c.solver.max_iters},
                     {"starts", c.solver.n_starts},
                     {"box", Json::array({c.solver.box_lo, c.solver.box_hi})},
                     {"damping", c.solver.damping},
                     {"max_backtracks", c.solver.max_backtracks}};
  Json extra = Json::array();
  for (const auto& z : c.extra_z) extra.push_back(to_json(z));
  j["rank"] = Json{{"rel_tol", c.rank_tol}, {"random_z", c.random_z}, {"z", extra}};
  j["injectivity"] = Json{{"rel_tol", c.injectivity_tol}, {"step", c.fd_step}};
  j["simulation"] = Json{{"scaling", c.scaling},
                         {"T", c.T},
                         {"h", c.h},
                         {"amplitude", c.amplitude},
                         {"eps", c.eps}};
  return j;
}

inline std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline Json to_json(const AnalysisReport& r, const ModelSpec& spec,
                    const std::string& timestamp = utc_timestamp()) {
  Json j;
  j["tool"] = Json{{"name", "ddeid"}, {"version", kVersion}};
  j["timestamp"] = timestamp;
  j["model"] = Json{{"source_fnv1a64", r.digest.source_hash},
                    {"n", r.digest.n},
                    {"k", r.digest.k},
                    {"p", r.digest.p},
                    {"l", r.digest.l},
                    {"r", r.digest.r},
                    {"states", spec.state_names},
                    {"inputs", spec.input_names},
                    {"params", spec.param_names},
                    {"state_delays", spec.state_delay_names},
                    {"input_delays", spec.input_delay_names}};
  j["config"] = to_json(r.config);
  j["seeds"] = Json{{"master", r.config.seed},
                    {"solver", r.config.solver_seed()},
                    {"z_samples", r.config.z_seed()},
                    {"parameter_draws", r.config.draw_seed()}};
  Json zs = Json::array();
  for (const auto& z : r.z_samples) zs.push_back(to_json(z));
  j["z_samples"] = zs;
  Json viol = Json::array();
  for (const auto& v : r.violations) viol.push_back(Json{{"code", v.code}, {"message", v.message}});
  j["violations"] = viol;

  Json samples = Json::array();
  for (const auto& s : r.samples) {
    Json sj;
    sj["index"] = s.index;
    sj["point"] = to_json(s.point, spec);
    Json starts = Json::array();
    for (const auto& st : s.search.starts) {
      starts.push_back(Json{{"start", to_json(st.start)},
                            {"converged", st.result.converged},
                            {"iterations", st.result.iterations},
                            {"gradient_steps", st.result.gradient_steps},
                            {"residual", std::isfinite(st.result.residual)
                                             ? Json(st.result.residual)
                                             : Json(nullptr)},
                            {"failure", st.result.failure}});
    }
    sj["starts"] = starts;
    Json blocks = Json::array();
    for (const auto& b : s.blocks) {
      Json bj;
      bj["equilibrium"] = to_json(b.equilibrium, spec);
      bj["verdict"] = to_string(block_verdict(b, spec.p()));
      if (b.linear) bj["linear_model"] = to_json(*b.linear);
      if (b.rank) bj["rank"] = to_json(*b.rank);
      if (b.injectivity) bj["injectivity"] = to_json(*b.injectivity, spec.param_names);
      if (b.scaling) bj["scaling"] = to_json(*b.scaling);
      bj["notes"] = b.notes;
      blocks.push_back(bj);
    }
    sj["equilibria"] = blocks;
    sj["notes"] = s.notes;
    samples.push_back(sj);
  }
  j["samples"] = samples;
  j["verdict"] = to_string(r.verdict);
  j["notes"] = r.notes;
  return j;
}

/// CSV with header t, states..., inputs... at the grid points.
inline std::string trajectory_csv(const Trajectory& tr, const ModelSpec& spec) {
  std::string out = "t";
  for (const auto& s : spec.state_names) out += "," + s;
  for (const auto& u : spec.input_names) out += "," + u;
  out += "\n";
  char buf[40];
  for (std::size_t i = 0; i < tr.x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g", tr.t[i]);
    out += buf;
    for (Eigen::Index c = 0; c < tr.x[i].size(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", tr.x[i][c]);
      out += buf;
    }
    for (Eigen::Index c = 0; c < tr.u[i].size(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", tr.u[i][c]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace ddeid
