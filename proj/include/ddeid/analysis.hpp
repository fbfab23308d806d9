#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ddeid/config.hpp"
#include "ddeid/equilibrium.hpp"
#include "ddeid/experiments.hpp"
#include "ddeid/injectivity.hpp"
#include "ddeid/linearize.hpp"
#include "ddeid/parser.hpp"
#include "ddeid/rank.hpp"

namespace ddeid {

enum class Verdict { Identifiable, LocallyIdentifiable, Inconclusive, Unsupported };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Identifiable: return "identifiable (structural, sampled)";
    case Verdict::LocallyIdentifiable: return "locally identifiable";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Unsupported: return "unsupported";
  }
  return "";
}

inline const char* sufficiency_note() {
  return "the rank condition is sufficient only: failing it at every sampled z "
         "does not imply the model is unidentifiable";
}

inline const char* local_downgrade_note() {
  return "parameter injectivity is checked numerically through the local rank "
         "of the coefficient map; this certifies local identifiability only, "
         "global identifiability would need a symbolic argument";
}

inline const char* input_heuristic_note() {
  return "the identifying input is a square pulse with incommensurable switch "
         "times; this is a heuristic for rich discontinuities, not a verified "
         "rank condition on them";
}

/// Results for one equilibrium of one parameter point.
struct EquilibriumBlock {
  EquilibriumPoint equilibrium;
  std::optional<LinearDelayModel> linear;
  std::optional<RankVerdict> rank;
  std::optional<CoeffMapReport> injectivity;
  std::optional<ScalingReport> scaling;
  std::vector<std::string> notes;
};

struct SampleResult {
  int index = 0;  // 0 = nominal point
  ParameterPoint point;
  EquilibriumSearch search;
  std::vector<EquilibriumBlock> blocks;
  std::vector<std::string> notes;
};

struct ModelDigest {
  std::string source_hash;
  int n = 0, k = 0, p = 0, l = 0, r = 0;
};

struct AnalysisReport {
  ModelDigest digest;
  AnalysisConfig config;
  std::vector<Complex> z_samples;
  std::vector<Violation> violations;
  std::vector<SampleResult> samples;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::string> notes;
};

/// 64-bit FNV-1a of the text, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xF];
    h >>= 4;
  }
  return out;
}

/// Per-equilibrium verdict.
inline Verdict block_verdict(const EquilibriumBlock& b, int p) {
  if (!b.rank || !b.rank->identifiable) return Verdict::Inconclusive;
  if (p == 0) return Verdict::Identifiable;
  if (b.injectivity && b.injectivity->locally_injective)
    return Verdict::LocallyIdentifiable;
  return Verdict::Inconclusive;
}

/// Composite verdict over every sampled parameter point. Pure function of
/// the component results.
inline Verdict composite_verdict(const std::vector<SampleResult>& samples,
                                 int p, bool supported,
                                 std::vector<std::string>* notes = nullptr) {
  auto note = [&](const std::string& s) {
    if (notes) notes->push_back(s);
  };
  if (!supported) return Verdict::Unsupported;
  if (samples.empty()) {
    note("no parameter point could be analyzed");
    return Verdict::Inconclusive;
  }
  bool rank_all = true;
  bool inj_all = true;
  for (const auto& s : samples) {
    if (s.blocks.empty()) {
      note("sample " + std::to_string(s.index) + ": no equilibrium found");
      rank_all = false;
    }
    for (const auto& b : s.blocks) {
      if (!b.rank || !b.rank->identifiable) rank_all = false;
      if (p > 0 && !(b.injectivity && b.injectivity->locally_injective))
        inj_all = false;
    }
  }
  if (!rank_all) {
    note(sufficiency_note());
    return Verdict::Inconclusive;
  }
  if (p == 0) return Verdict::Identifiable;
  if (inj_all) {
    note(local_downgrade_note());
    return Verdict::LocallyIdentifiable;
  }
  note("coefficient map is not locally injective at some sampled point");
  return Verdict::Inconclusive;
}

/// Draws a point from the box (entries without a box keep their nominal
/// value). Redraws until delays are ordered; nullopt after 1000 tries.
inline std::optional<ParameterPoint> draw_point(const ModelSpec& spec,
                                                const ParameterPoint& nominal,
                                                const ParameterBox& box,
                                                std::mt19937_64& rng) {
  auto draw_into = [&](Vector& v, const std::vector<std::optional<Interval>>& b) {
    for (std::size_t i = 0; i < b.size() && i < static_cast<std::size_t>(v.size()); ++i) {
      if (!b[i]) continue;
      std::uniform_real_distribution<double> d(b[i]->lo, b[i]->hi);
      v[static_cast<Eigen::Index>(i)] = d(rng);
    }
  };
  for (int attempt = 0; attempt < 1000; ++attempt) {
    ParameterPoint q = nominal;
    draw_into(q.p_s, box.p_s);
    draw_into(q.tau, box.tau);
    draw_into(q.nu, box.nu);
    if (validate(spec, q).empty()) return q;
  }
  return std::nullopt;
}

/// Equilibria -> linearization -> rank sweep -> injectivity (-> scaling) at
/// one parameter point.
inline SampleResult analyze_point(const ModelSpec& spec,
                                  const ParameterPoint& point, int index,
                                  const AnalysisConfig& cfg,
                                  const std::vector<Complex>& z_samples) {
  SampleResult s;
  s.index = index;
  s.point = point;
  SolverConfig solver = cfg.solver_config();
  s.search = find_equilibria(spec, point, solver);
  int fallbacks = 0;
  for (const auto& st : s.search.starts) fallbacks += st.result.gradient_steps;
  if (fallbacks > 0) {
    s.notes.push_back(std::to_string(fallbacks) +
                      " singular-Jacobian steps used gradient descent");
  }
  if (s.search.equilibria.empty()) {
    s.notes.push_back("no equilibrium found from " +
                      std::to_string(solver.n_starts) + " starts");
  }
  for (const auto& eq : s.search.equilibria) {
    EquilibriumBlock b;
    b.equilibrium = eq;
    try {
      b.linear = linearize(spec, point, eq);
    } catch (const DomainError& e) {
      b.notes.push_back("linearization failed: " + describe(e));
      s.blocks.push_back(std::move(b));
      continue;
    }
    b.rank = sweep_rank(*b.linear, z_samples, cfg.rank_tol);
    if (spec.p() > 0) {
      CoeffMapJacobian cj = coeff_map_jacobian(spec, point, eq, solver, cfg.fd_step);
      b.injectivity = injectivity_verdict(cj, spec.param_names, cfg.injectivity_tol);
    } else {
      b.injectivity = injectivity_verdict(CoeffMapJacobian{Matrix(0, 0), {}, {}, cfg.fd_step},
                                          spec.param_names, cfg.injectivity_tol);
    }
    if (cfg.scaling && spec.k() > 0) {
      InputSignal pulse = make_square_pulse(spec.k(), cfg.T, cfg.amplitude);
      try {
        b.scaling = scaling_experiment(spec, point, eq, *b.linear, pulse,
                                       cfg.eps, cfg.T, cfg.h);
      } catch (const std::exception& e) {
        b.notes.push_back(std::string("scaling experiment failed: ") + e.what());
      }
    }
    s.blocks.push_back(std::move(b));
  }
  return s;
}

/// Full pipeline over the nominal point and `cfg.parameter_samples` random
/// points drawn from the model's box.
inline AnalysisReport analyze(const ModelFile& file, const AnalysisConfig& cfg) {
  cfg.check();
  AnalysisReport rep;
  const ModelSpec& spec = file.spec;
  rep.config = cfg;
  rep.digest = {fnv1a_hex(file.source), spec.n(), spec.k(), spec.p(), spec.l(), spec.r()};
  rep.z_samples = default_z_samples(cfg.z_sampling());
  rep.violations = validate(spec, file.nominal);
  if (!rep.violations.empty()) {
    rep.verdict = Verdict::Unsupported;
    for (const auto& v : rep.violations) rep.notes.push_back(v.message);
    return rep;
  }
  rep.samples.push_back(analyze_point(spec, file.nominal, 0, cfg, rep.z_samples));
  if (file.box.any()) {
    std::mt19937_64 rng(cfg.draw_seed());
    for (int i = 1; i <= cfg.parameter_samples; ++i) {
      auto q = draw_point(spec, file.nominal, file.box, rng);
      if (!q) {
        rep.notes.push_back("could not draw an ordered parameter point for sample " +
                            std::to_string(i));
        continue;
      }
      rep.samples.push_back(analyze_point(spec, *q, i, cfg, rep.z_samples));
    }
  } else if (cfg.parameter_samples > 0) {
    rep.notes.push_back("model declares no sampling box; only the nominal point was analyzed");
  }
  rep.verdict = composite_verdict(rep.samples, spec.p(), true, &rep.notes);
  if (spec.k() > 0) rep.notes.push_back(input_heuristic_note());
  return rep;
}

}  // namespace ddeid
