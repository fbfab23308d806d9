#pragma once

#include <cctype>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddeid/equilibrium.hpp"
#include "ddeid/experiments.hpp"
#include "ddeid/rank.hpp"

namespace ddeid {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every knob of an analysis run. Defaults are the documented ones and are
/// echoed into each report.
struct AnalysisConfig {
  std::uint64_t seed = 1;
  int parameter_samples = 5;  // random points drawn from the box, besides the nominal one

  SolverConfig solver;

  double rank_tol = 1e-10;
  int random_z = 14;
  std::vector<Complex> extra_z;

  double injectivity_tol = 1e-7;
  double fd_step = 1e-6;

  bool scaling = false;
  double T = 10.0;
  double h = 1e-3;
  double amplitude = 1.0;
  std::vector<double> eps = default_eps_list();

  std::uint64_t solver_seed() const { return seed; }
  std::uint64_t z_seed() const { return seed + 1; }
  std::uint64_t draw_seed() const { return seed + 2; }

  ZSampling z_sampling() const {
    ZSampling z;
    z.random_count = random_z;
    z.seed = z_seed();
    z.extra = extra_z;
    return z;
  }

  SolverConfig solver_config() const {
    SolverConfig s = solver;
    s.seed = solver_seed();
    return s;
  }

  /// Throws ConfigError listing every schema violation.
  void check() const {
    std::vector<std::string> bad = solver.problems();
    if (parameter_samples < 0) bad.push_back("run.samples must be >= 0");
    if (!(rank_tol > 0.0 && rank_tol < 1.0)) bad.push_back("rank.rel_tol must lie in (0, 1)");
    if (random_z < 0) bad.push_back("rank.random_z must be >= 0");
    for (const auto& z : extra_z)
      if (on_branch_cut(z)) bad.push_back("rank.z value lies on the branch cut");
    if (!(injectivity_tol > 0.0 && injectivity_tol < 1.0))
      bad.push_back("injectivity.rel_tol must lie in (0, 1)");
    if (!(fd_step > 0.0)) bad.push_back("injectivity.step must be > 0");
    if (!(T > 0.0)) bad.push_back("simulation.T must be > 0");
    if (!(h > 0.0)) bad.push_back("simulation.h must be > 0");
    if (h > 0.0 && T > 0.0 && h > T) bad.push_back("simulation.h must not exceed T");
    if (eps.size() < 3) bad.push_back("simulation.eps needs at least 3 values");
    for (std::size_t i = 0; i < eps.size(); ++i) {
      if (!(eps[i] > 0.0) || (i > 0 && !(eps[i] < eps[i - 1]))) {
        bad.push_back("simulation.eps must be positive and decreasing");
        break;
      }
    }
    if (!bad.empty()) {
      std::string msg = "invalid configuration:";
      for (const auto& b : bad) msg += "\n  " + b;
      throw ConfigError(msg);
    }
  }
};

inline double parse_real(const std::string& s, const std::string& key) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (end == begin || (end && *end)) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
  return v;
}

inline long parse_integer(const std::string& s, const std::string& key) {
  double v = parse_real(s, key);
  if (v != static_cast<double>(static_cast<long>(v)))
    throw ConfigError(key + ": expected an integer, got '" + s + "'");
  return static_cast<long>(v);
}

/// Accepts "2", "-0.5", "1+1i", "1+i", "0.5-2i", "3i" (j works as i too).
inline Complex parse_complex(std::string s) {
  std::string t;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty()) throw ConfigError("empty complex value");
  char last = t.back();
  if (last != 'i' && last != 'j') return {parse_real(t, "z"), 0.0};
  t.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t i = t.size(); i-- > 1;) {
    if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  std::string re = split == std::string::npos ? "0" : t.substr(0, split);
  std::string im = split == std::string::npos ? t : t.substr(split);
  if (im.empty() || im == "+") im = "1";
  if (im == "-") im = "-1";
  return {parse_real(re, "z"), parse_real(im, "z")};
}

inline std::vector<double> parse_real_list(const std::string& s,
                                           const std::string& key) {
  std::vector<double> out;
  std::string item;
  for (char c : s + ",") {
    if (c == ',') {
      std::size_t b = item.find_first_not_of(" \t[");
      std::size_t e = item.find_last_not_of(" \t]");
      if (b != std::string::npos) out.push_back(parse_real(item.substr(b, e - b + 1), key));
      item.clear();
    } else {
      item += c;
    }
  }
  return out;
}

inline bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

/// Applies `[section]` / `key = value` text (same layout as model files) on
/// top of `cfg`. Unknown sections or keys are errors.
inline void apply_config_text(const std::string& text, AnalysisConfig& cfg) {
  std::string section;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    std::string where = "config line " + std::to_string(line_no);
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      static const std::vector<std::string> known = {
          "run", "solver", "rank", "injectivity", "simulation"};
      bool ok = false;
      for (const auto& k : known) ok = ok || k == section;
      if (!ok) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos || section.empty())
      throw ConfigError(where + ": expected key = value inside a section");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    std::string full = section + "." + key;
    if (full == "run.seed") {
      long v = parse_integer(value, full);
      if (v < 0) throw ConfigError(full + " must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(v);
    } else if (full == "run.samples") {
      cfg.parameter_samples = static_cast<int>(parse_integer(value, full));
    } else if (full == "solver.tol") {
      cfg.solver.tol_residual = parse_real(value, full);
    } else if (full == "solver.max_iters") {
      cfg.solver.max_iters = static_cast<int>(parse_integer(value, full));
    } else if (full == "solver.starts") {
      cfg.solver.n_starts = static_cast<int>(parse_integer(value, full));
    } else if (full == "solver.box") {
      auto v = parse_real_list(value, full);
      if (v.size() != 2) throw ConfigError(full + ": expected [lo, hi]");
      cfg.solver.box_lo = v[0];
      cfg.solver.box_hi = v[1];
    } else if (full == "solver.damping") {
      cfg.solver.damping = parse_real(value, full);
    } else if (full == "solver.max_backtracks") {
      cfg.solver.max_backtracks = static_cast<int>(parse_integer(value, full));
    } else if (full == "rank.rel_tol") {
      cfg.rank_tol = parse_real(value, full);
    } else if (full == "rank.random_z") {
      cfg.random_z = static_cast<int>(parse_integer(value, full));
    } else if (full == "rank.z") {
      cfg.extra_z.push_back(parse_complex(value));
    } else if (full == "injectivity.rel_tol") {
      cfg.injectivity_tol = parse_real(value, full);
    } else if (full == "injectivity.step") {
      cfg.fd_step = parse_real(value, full);
    } else if (full == "simulation.T") {
      cfg.T = parse_real(value, full);
    } else if (full == "simulation.h") {
      cfg.h = parse_real(value, full);
    } else if (full == "simulation.amplitude") {
      cfg.amplitude = parse_real(value, full);
    } else if (full == "simulation.eps") {
      cfg.eps = parse_real_list(value, full);
    } else if (full == "simulation.scaling") {
      cfg.scaling = parse_bool(value, full);
    } else {
      throw ConfigError(where + ": unknown key '" + full + "'");
    }
  }
}

}  // namespace ddeid
