// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ddeid.hpp"
#include "random_models.hpp"
#include "rank_oracle.hpp"

using namespace ddeid;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o, double seconds) {
  std::printf("%s [%d] %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), seconds,
              o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void run(int id, const std::string& name, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, name, o, s);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string models_dir() { return DDEID_MODELS_DIR; }

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("ddeid-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct CliRun {
  int status = -1;
  double seconds = 0.0;
  std::string report;
};

CliRun cli_analyze(const std::string& model, const std::string& extra, const std::string& out) {
  fs::path report = scratch() / out;
  std::string cmd = std::string("\"") + DDEID_CLI_PATH + "\" analyze \"" + model + "\" " + extra +
                    " --report \"" + report.string() + "\" > /dev/null 2>&1";
  CliRun r;
  auto t0 = std::chrono::steady_clock::now();
  r.status = std::system(cmd.c_str());
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.report = read_file(report);
  return r;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ModelFile load(const std::string& path) {
  ParseResult pr = parse_model(read_file(path));
  if (!pr.ok()) throw std::runtime_error("cannot parse " + path);
  return *pr.model;
}

using Pattern = std::vector<std::pair<int, int>>;

Pattern pattern_of(const Json& m) {
  Pattern p;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j)
      if (std::abs(m[i][j].get<double>()) > 1e-12)
        p.push_back({static_cast<int>(i) + 1, static_cast<int>(j) + 1});
  return p;
}

std::string show(const Pattern& p) {
  std::string s = "{";
  for (const auto& [i, j] : p) s += "(" + std::to_string(i) + "," + std::to_string(j) + ")";
  return s + "}";
}

Outcome criterion_four_state() {
  const std::string model = models_dir() + "/eq16.model";
  CliRun r = cli_analyze(model, "--timestamp 1970-01-01T00:00:00Z", "eq16.json");
  if (r.status != 0) return {false, "CLI exit status " + std::to_string(r.status)};
  Json j = Json::parse(r.report);
  const Json& s0 = j["samples"][0];
  if (s0["equilibria"].empty()) return {false, "no equilibrium"};
  const Json& blk = s0["equilibria"][0];
  const Json& xe = blk["equilibrium"]["x_e"];
  const double x = xe[0], y = xe[1], v = xe[2], w = xe[3];
  const double u1 = s0["point"]["u_bar"]["u1"], u2 = s0["point"]["u_bar"]["u2"];
  const double s2 = std::sin(x) * std::sin(x);
  const double y_formula = (x - x * x) / (1 + s2);
  const double v_formula = -x * y - (1 + s2) * u1 - y;
  const double x_relation = -x * u1 + (2 + std::sin(x)) * u2;

  std::vector<std::string> bad;
  if (!(std::abs(w) <= 1e-12)) bad.push_back("w_e = " + fmt(w));
  if (!(std::abs(y - y_formula) <= 1e-10)) bad.push_back("y_e off by " + fmt(std::abs(y - y_formula)));
  if (!(std::abs(v - v_formula) <= 1e-10)) bad.push_back("v_e off by " + fmt(std::abs(v - v_formula)));
  if (!(std::abs(x_relation) <= 1e-10)) bad.push_back("x_e relation residual " + fmt(x_relation));

  const Json& lin = blk["linear_model"];
  const std::vector<Pattern> want_a = {{{1, 1}}, {{2, 2}}, {{3, 3}}, {{4, 4}}};
  for (int i = 1; i <= 4; ++i) {
    Pattern got = pattern_of(lin["A"][i]["matrix"]);
    if (got != want_a[i - 1]) bad.push_back("A" + std::to_string(i) + " pattern " + show(got));
  }
  Pattern b0 = pattern_of(lin["B"][0]["matrix"]);
  if (b0 != Pattern{{2, 1}, {4, 1}, {4, 2}}) bad.push_back("B0 pattern " + show(b0));

  int rank_2 = -1, rank_1i = -1;
  for (const auto& pz : blk["rank"]["per_z"]) {
    Complex z(pz["z"]["re"].get<double>(), pz["z"]["im"].get<double>());
    if (z == Complex(2, 0)) rank_2 = pz["rank"];
    if (z == Complex(1, 1)) rank_1i = pz["rank"];
  }
  if (rank_2 != 4) bad.push_back("rank at z=2 is " + std::to_string(rank_2));
  if (rank_1i != 4) bad.push_back("rank at z=1+i is " + std::to_string(rank_1i));
  if (!(r.seconds < 5.0)) bad.push_back("CLI runtime " + fmt(r.seconds) + " s");

  std::string d = "x_e=(" + fmt(x) + "," + fmt(y) + "," + fmt(v) + "," + fmt(w) +
                  "), rank(z=2)=" + std::to_string(rank_2) +
                  ", rank(z=1+i)=" + std::to_string(rank_1i) + ", CLI " + fmt(r.seconds) + " s";
  for (const auto& b : bad) d += "; " + b;
  return {bad.empty(), d};
}

// Sensitivity of the coefficient vector to each parameter, built here with
// its own step, its own Newton tracking and a QR rank.
int oracle_rank(const ModelSpec& spec, const ParameterPoint& point, const Vector& x_e) {
  const double h = 1e-5;
  Vector base = coefficient_vector(linearize(spec, point, EquilibriumPoint{x_e, 0.0, true}));
  Matrix S(base.size(), spec.p());
  for (int c = 0; c < spec.p(); ++c) {
    Vector side[2];
    for (int s = 0; s < 2; ++s) {
      ParameterPoint q = point;
      q.p_s[c] += s == 0 ? h : -h;
      Vector x = x_e;
      for (int it = 0; it < 50; ++it) {
        Vector r = eval_tied(spec, x, q.u_bar, q.p_s);
        if (r.lpNorm<Eigen::Infinity>() < 1e-13) break;
        x -= jacobian_tied(spec, x, q.u_bar, q.p_s).fullPivLu().solve(r);
      }
      side[s] = coefficient_vector(linearize(spec, q, EquilibriumPoint{x, 0.0, true}));
    }
    S.col(c) = (side[0] - side[1]) / (2 * h);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(S);
  qr.setThreshold(1e-6);
  return static_cast<int>(qr.rank());
}

Outcome criterion_parameterized() {
  const std::string model = models_dir() + "/eq17.model";
  CliRun r = cli_analyze(model, "--timestamp 1970-01-01T00:00:00Z", "eq17.json");
  if (r.status != 0) return {false, "CLI exit status " + std::to_string(r.status)};
  Json j = Json::parse(r.report);
  std::vector<std::string> bad;
  if (j["verdict"] != "locally identifiable") bad.push_back("verdict " + j["verdict"].dump());
  bool downgrade = false;
  for (const auto& n : j["notes"]) downgrade = downgrade || n == local_downgrade_note();
  if (!downgrade) bad.push_back("downgrade note missing");

  ModelFile f = load(model);
  AnalysisReport rep = analyze(f, AnalysisConfig{});
  int random_points = 0;
  for (const auto& s : rep.samples) {
    for (std::size_t b = 0; b < s.blocks.size(); ++b) {
      const EquilibriumBlock& blk = s.blocks[b];
      std::string tag = "sample " + std::to_string(s.index);
      if (!(std::abs(blk.equilibrium.x_e[0]) > 1e-6)) {
        bad.push_back(tag + ": x_e = 0");
        continue;
      }
      if (!blk.rank || !blk.rank->identifiable) bad.push_back(tag + ": rank test failed");
      int got = blk.injectivity ? blk.injectivity->jacobian_rank : -1;
      int cli = j["samples"][s.index]["equilibria"][b]["injectivity"]["jacobian_rank"];
      int want = oracle_rank(f.spec, s.point, blk.equilibrium.x_e);
      if (got != 13 || want != 13 || cli != got)
        bad.push_back(tag + ": rank " + std::to_string(got) + ", CLI " + std::to_string(cli) +
                      ", oracle " + std::to_string(want));
      if (s.index > 0) ++random_points;
    }
  }
  if (random_points == 0) bad.push_back("no random parameter point analyzed");
  if (!(r.seconds < 30.0)) bad.push_back("CLI runtime " + fmt(r.seconds) + " s");
  std::string d = "verdict " + j["verdict"].get<std::string>() + ", coefficient-map rank 13 = oracle at " +
                  std::to_string(random_points) + " random points, CLI " + fmt(r.seconds) + " s";
  if (!bad.empty()) d = "";
  for (const auto& b : bad) d += (d.empty() ? "" : "; ") + b;
  return {bad.empty(), d};
}

Outcome criterion_scaling() {
  ModelFile f = load(models_dir() + "/eq16.model");
  auto t0 = std::chrono::steady_clock::now();
  auto eq = find_equilibria(f.spec, f.nominal, SolverConfig{}).equilibria.at(0);
  LinearDelayModel m = linearize(f.spec, f.nominal, eq);
  ScalingReport r = scaling_experiment(f.spec, f.nominal, eq, m, make_square_pulse(2, 10.0, 1.0),
                                       {1e-1, 3e-2, 1e-2, 3e-3}, 10.0, 1e-3);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = r.points.size() == 4 && r.slope_deviation >= 0.9 && r.slope_deviation <= 1.1 &&
            r.slope_remainder >= 1.8 && r.slope_remainder <= 2.2 && secs < 60.0;
  return {ok, "slope(max|x_d|) = " + fmt(r.slope_deviation) + " in [0.9, 1.1], slope(max|x_d - xi|) = " +
                  fmt(r.slope_remainder) + " in [1.8, 2.2], " + std::to_string(r.points.size()) +
                  " eps values, " + fmt(secs) + " s"};
}

// x' = -x(t - 1), x = 1 on [-1, 0]:
//   x(t) = sum_{j=0}^{floor(t)+1} (-1)^j (t - j + 1)^j / j!
double delayed_decay_exact(double t) {
  double sum = 0.0, fact = 1.0;
  const int top = static_cast<int>(std::floor(t)) + 1;
  for (int j = 0; j <= top; ++j) {
    if (j > 0) fact *= j;
    double base = t - j + 1;
    if (base < 0) break;
    sum += (j % 2 ? -1.0 : 1.0) * std::pow(base, j) / fact;
  }
  return sum;
}

double delayed_decay_error(double T, double h) {
  DelaySystem sys;
  sys.n = 1;
  sys.state_delays = {1.0};
  sys.rhs = [](const std::vector<Vector>& z, const std::vector<Vector>&) { return Vector(-z[1]); };
  Trajectory tr = integrate(sys, constant_history(Vector::Ones(1)),
                            InputSignal(SignalKind::Constant, {}), T, h);
  double err = 0.0;
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    err = std::max(err, std::abs(tr.x[i][0] - delayed_decay_exact(tr.t[i])));
  return err;
}

Outcome criterion_simulator() {
  const double err3 = delayed_decay_error(3.0, 1e-3);
  std::vector<double> hs = {0.1, 0.05, 0.025};
  std::vector<double> errs;
  for (double h : hs) errs.push_back(delayed_decay_error(1.0, h));
  std::vector<double> orders;
  bool orders_ok = true;
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    double o = std::log2(errs[i] / errs[i + 1]);
    orders.push_back(o);
    orders_ok = orders_ok && std::isfinite(o) && o >= 3.5 && o <= 4.5;
  }
  std::string d = "max error on [0,3] at h=1e-3: " + fmt(err3) + " (<= 1e-8); step-halving on [0,1]: errors";
  for (double e : errs) d += " " + fmt(e);
  d += ", orders";
  for (double o : orders) d += " " + fmt(o);
  d += " (need [3.5, 4.5])";
  if (!orders_ok)
    d += "; the exact solution is linear on [0,1] and the scheme reproduces it to round-off, so no order is observable there";

  std::vector<double> long_errs;
  for (double h : {0.04, 0.02, 0.01}) long_errs.push_back(delayed_decay_error(8.0, h));
  std::printf("INFO [4] supplementary step-halving on [0,8] (not the criterion): errors %s %s %s, orders %s %s\n",
              fmt(long_errs[0]).c_str(), fmt(long_errs[1]).c_str(), fmt(long_errs[2]).c_str(),
              fmt(std::log2(long_errs[0] / long_errs[1])).c_str(),
              fmt(std::log2(long_errs[1] / long_errs[2])).c_str());
  return {err3 <= 1e-8 && orders_ok, d};
}

Outcome criterion_jacobians() {
  testing::RandomModelGen gen(20240611);
  int models = 0, entries = 0, skipped = 0;
  double worst = -1.0;
  std::vector<std::string> bad;
  while (models < 100) {
    auto rm = gen.next();
    if (rm.file.spec.equations.empty()) {
      if (++skipped > 100) return {false, "generator keeps producing unparsable models"};
      continue;
    }
    ++models;
    auto cmp = testing::compare_slot_jacobians(rm.file, rm.x, 1e-6, 1e-5, 1e-8);
    entries += cmp.entries;
    worst = std::max(worst, cmp.worst_excess);
    if (cmp.worst_excess > 0.0) bad.push_back("model " + std::to_string(models));
  }
  std::string d = std::to_string(models) + " models, " + std::to_string(entries) +
                  " entries, |ad - fd| <= 1e-5 |ad| + 1e-8 (worst margin " + fmt(worst) + ")";
  for (const auto& b : bad) d += "; " + b + " exceeds";
  return {bad.empty(), d};
}

Outcome criterion_rank_oracle() {
  std::mt19937_64 rng(4242);
  int correct = 0;
  std::string first_bad;
  for (int i = 0; i < 200; ++i) {
    testing::KnownRank k = testing::known_rank_matrix(rng);
    int got = numerical_rank(k.m, 1e-10).rank;
    if (got == k.rank) {
      ++correct;
    } else if (first_bad.empty()) {
      first_bad = "; case " + std::to_string(i) + ": got " + std::to_string(got) + ", want " +
                  std::to_string(k.rank);
    }
  }
  return {correct == 200, std::to_string(correct) + "/200 correct at rel_tol 1e-10" + first_bad};
}

Outcome criterion_negative_controls() {
  const char* unexcited =
      "[states]\nx y\n[inputs]\nu = 1\n[equations]\ndx = -x + 0*u\ndy = x - y\n";
  const char* product =
      "[states]\nx\n[inputs]\nu = 1\n[params]\np1 = 2\np2 = -0.5\n[equations]\ndx = (p1*p2)*x + u\n";
  std::vector<std::string> bad;

  ParseResult a = parse_model(unexcited);
  if (!a.ok()) return {false, "B = 0 model does not parse"};
  AnalysisReport ra = analyze(*a.model, AnalysisConfig{});
  std::string va = to_json(ra, a.model->spec, "X")["verdict"];
  if (va != "inconclusive") bad.push_back("B = 0 verdict " + va);

  ParseResult b = parse_model(product);
  if (!b.ok()) return {false, "product model does not parse"};
  AnalysisReport rb = analyze(*b.model, AnalysisConfig{});
  bool injective = true;
  std::vector<std::string> entangled;
  if (!rb.samples.empty() && !rb.samples[0].blocks.empty() &&
      rb.samples[0].blocks[0].injectivity) {
    injective = rb.samples[0].blocks[0].injectivity->locally_injective;
    entangled = rb.samples[0].blocks[0].injectivity->entangled;
  }
  if (injective) bad.push_back("product model reported locally injective");
  if (entangled != std::vector<std::string>{"p1", "p2"}) bad.push_back("entangled set is not {p1, p2}");
  std::string d = "B = 0 verdict '" + va + "'; product model locally_injective=" +
                  (injective ? "true" : "false") + ", entangled {";
  for (std::size_t i = 0; i < entangled.size(); ++i) d += (i ? ", " : "") + entangled[i];
  d += "}";
  for (const auto& x : bad) d += "; " + x;
  return {bad.empty(), d};
}

std::string strip_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("\"timestamp\"") == std::string::npos) out += line + "\n";
  return out;
}

Outcome criterion_determinism() {
  const std::string model = models_dir() + "/eq17.model";
  CliRun a = cli_analyze(model, "--seed 11", "det_a.json");
  CliRun b = cli_analyze(model, "--seed 11", "det_b.json");
  if (a.status != 0 || b.status != 0) return {false, "CLI failed"};
  std::string sa = strip_timestamp(a.report), sb = strip_timestamp(b.report);
  bool same = !sa.empty() && sa == sb;
  return {same, std::to_string(sa.size()) + " bytes, " +
                    (same ? "identical" : "different") + " after removing the timestamp line"};
}

}  // namespace

int main() {
  std::printf("ddeid %s acceptance\n", kVersion);
  run(1, "four-state example", criterion_four_state);
  run(2, "thirteen-parameter example", criterion_parameterized);
  run(3, "eps-scaling exponents", criterion_scaling);
  run(4, "simulator correctness", criterion_simulator);
  run(5, "autodiff vs finite differences", criterion_jacobians);
  run(6, "numerical rank oracle", criterion_rank_oracle);
  run(7, "negative controls", criterion_negative_controls);
  run(8, "determinism", criterion_determinism);
  std::error_code ec;
  fs::remove_all(scratch(), ec);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
