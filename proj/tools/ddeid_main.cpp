// ddeid command-line front end: analyze, simulate, linearize.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddeid.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitIo = 4;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

ddeid::ModelFile load_model(const std::string& path) {
  std::string src = read_file(path);
  ddeid::ParseResult pr = ddeid::parse_model(src);
  if (!pr.ok()) {
    std::ostringstream msg;
    for (const auto& d : pr.diagnostics) {
      msg << path << ":" << d.line << ":" << d.column << ": error: " << d.message
          << "\n";
    }
    throw ModelParseError(msg.str());
  }
  return std::move(*pr.model);
}

struct CommonOptions {
  std::string model;
  std::string config;
  std::vector<std::string> z;
  int samples = -1;
  long long seed = -1;
  double rank_tol = -1.0;
  std::string report;
  std::string timestamp;
};

ddeid::AnalysisConfig build_config(const CommonOptions& o) {
  ddeid::AnalysisConfig cfg;
  if (!o.config.empty()) ddeid::apply_config_text(read_file(o.config), cfg);
  for (const auto& z : o.z) cfg.extra_z.push_back(ddeid::parse_complex(z));
  if (o.samples >= 0) cfg.random_z = o.samples;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.rank_tol >= 0.0) cfg.rank_tol = o.rank_tol;
  return cfg;
}

int run_analyze(const CommonOptions& o, bool scaling) {
  ddeid::ModelFile file = load_model(o.model);
  ddeid::AnalysisConfig cfg = build_config(o);
  if (scaling) cfg.scaling = true;
  cfg.check();
  ddeid::AnalysisReport rep = ddeid::analyze(file, cfg);
  ddeid::Json j = o.timestamp.empty() ? ddeid::to_json(rep, file.spec)
                                      : ddeid::to_json(rep, file.spec, o.timestamp);
  write_output(o.report, j.dump(2) + "\n");
  if (!o.report.empty() && o.report != "-") {
    std::cerr << "verdict: " << ddeid::to_string(rep.verdict) << "\n";
  }
  return kExitOk;
}

// First converged equilibrium of the nominal point, if any.
std::optional<ddeid::EquilibriumPoint> nominal_equilibrium(
    const ddeid::ModelFile& file, const ddeid::AnalysisConfig& cfg) {
  auto search = ddeid::find_equilibria(file.spec, file.nominal, cfg.solver_config());
  if (search.equilibria.empty()) return std::nullopt;
  return search.equilibria.front();
}

int run_linearize(const CommonOptions& o) {
  ddeid::ModelFile file = load_model(o.model);
  ddeid::AnalysisConfig cfg = build_config(o);
  cfg.check();
  ddeid::Json j;
  j["tool"] = ddeid::Json{{"name", "ddeid"}, {"version", ddeid::kVersion}};
  j["model"] = ddeid::Json{{"source_fnv1a64", ddeid::fnv1a_hex(file.source)}};
  j["point"] = ddeid::to_json(file.nominal, file.spec);
  auto violations = ddeid::validate(file.spec, file.nominal);
  if (!violations.empty()) {
    j["outcome"] = "unsupported";
    ddeid::Json v = ddeid::Json::array();
    for (const auto& x : violations) v.push_back(x.message);
    j["violations"] = v;
    write_output(o.report, j.dump(2) + "\n");
    return kExitOk;
  }
  auto search = ddeid::find_equilibria(file.spec, file.nominal, cfg.solver_config());
  if (search.equilibria.empty()) {
    j["outcome"] = "no equilibrium found";
    j["starts"] = static_cast<int>(search.starts.size());
    write_output(o.report, j.dump(2) + "\n");
    return kExitOk;
  }
  ddeid::Json eqs = ddeid::Json::array();
  for (const auto& eq : search.equilibria) {
    ddeid::Json e;
    e["equilibrium"] = ddeid::to_json(eq, file.spec);
    try {
      e["linear_model"] = ddeid::to_json(ddeid::linearize(file.spec, file.nominal, eq));
    } catch (const ddeid::DomainError& err) {
      e["error"] = ddeid::describe(err);
    }
    eqs.push_back(e);
  }
  j["outcome"] = "linearized";
  j["equilibria"] = eqs;
  write_output(o.report, j.dump(2) + "\n");
  return kExitOk;
}

int run_simulate(const CommonOptions& o, const std::string& input_kind,
                 std::optional<double> T, std::optional<double> h,
                 std::optional<double> amplitude, bool eps_scaling,
                 const std::string& csv_path) {
  ddeid::ModelFile file = load_model(o.model);
  ddeid::AnalysisConfig cfg = build_config(o);
  if (T) cfg.T = *T;
  if (h) cfg.h = *h;
  if (amplitude) cfg.amplitude = *amplitude;
  cfg.check();
  const ddeid::ModelSpec& spec = file.spec;
  auto violations = ddeid::validate(spec, file.nominal);
  if (!violations.empty()) {
    std::string msg = "model cannot be simulated:";
    for (const auto& v : violations) msg += "\n  " + v.message;
    throw ddeid::ConfigError(msg);
  }
  for (double d : std::vector<double>(file.nominal.tau.data(),
                                      file.nominal.tau.data() + file.nominal.tau.size())) {
    if (d < cfg.h) throw ddeid::ConfigError("step h exceeds the smallest state delay");
  }

  ddeid::Json j;
  j["tool"] = ddeid::Json{{"name", "ddeid"}, {"version", ddeid::kVersion}};
  j["model"] = ddeid::Json{{"source_fnv1a64", ddeid::fnv1a_hex(file.source)}};
  j["config"] = ddeid::to_json(cfg);
  std::vector<std::string> notes;

  auto eq = nominal_equilibrium(file, cfg);
  ddeid::Vector x0 = eq ? eq->x_e : ddeid::Vector::Zero(spec.n());
  if (!eq) notes.push_back("no equilibrium found; simulation starts from zero history");
  if (eq) j["equilibrium"] = ddeid::to_json(*eq, spec);

  ddeid::InputSignal pulse = ddeid::make_square_pulse(spec.k(), cfg.T, cfg.amplitude);

  if (eps_scaling) {
    if (!eq) throw ddeid::ConfigError("ε-scaling needs an equilibrium; none was found");
    if (spec.k() == 0) throw ddeid::ConfigError("ε-scaling needs at least one input");
    ddeid::LinearDelayModel lin = ddeid::linearize(spec, file.nominal, *eq);
    ddeid::ScalingReport sr = ddeid::scaling_experiment(
        spec, file.nominal, *eq, lin, pulse, cfg.eps, cfg.T, cfg.h);
    j["scaling"] = ddeid::to_json(sr);
    j["notes"] = notes;
    write_output(o.report, j.dump(2) + "\n");
    return kExitOk;
  }

  ddeid::InputSignal u;
  if (input_kind == "constant") {
    u = ddeid::InputSignal::constant(file.nominal.u_bar);
  } else {
    u = pulse.affine(file.nominal.u_bar, 1.0);
    notes.push_back(ddeid::input_heuristic_note());
  }
  ddeid::Trajectory tr = ddeid::simulate_nonlinear(
      spec, file.nominal, ddeid::constant_history(x0), u, cfg.T, cfg.h);
  if (tr.truncated) notes.push_back(tr.diagnostic);
  std::string csv = ddeid::trajectory_csv(tr, spec);
  if (o.report.empty()) {
    write_output(csv_path, csv);
    return kExitOk;
  }
  if (!csv_path.empty()) write_output(csv_path, csv);
  ddeid::Json traj;
  traj["input"] = ddeid::to_string(u.kind());
  traj["steps"] = static_cast<int>(tr.steps());
  traj["T"] = tr.T;
  traj["h"] = tr.h;
  traj["truncated"] = tr.truncated;
  traj["snapped_switches"] = static_cast<int>(tr.input.snaps().size());
  ddeid::Json t = ddeid::Json::array(), x = ddeid::Json::array();
  for (std::size_t i = 0; i < tr.x.size(); ++i) {
    t.push_back(tr.t[i]);
    x.push_back(ddeid::to_json(tr.x[i]));
  }
  traj["t"] = t;
  traj["x"] = x;
  j["trajectory"] = traj;
  j["notes"] = notes;
  write_output(o.report, j.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identifiability analysis of nonlinear delayed-differential models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ddeid::kVersion);

  CommonOptions opts;
  bool analyze_scaling = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("model", opts.model, "Model file")->required();
    sub->add_option("--config", opts.config, "Configuration file");
    sub->add_option("--seed", opts.seed, "Master random seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--report", opts.report, "Write the JSON report here (default: stdout)");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "Run the identifiability pipeline");
  add_common(analyze);
  analyze->add_option("--z", opts.z, "Extra z sample, e.g. 2 or 1+1i (repeatable)");
  analyze->add_option("--samples", opts.samples, "Number of random z samples")
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--rank-tol", opts.rank_tol, "Relative rank tolerance");
  analyze->add_option("--timestamp", opts.timestamp, "Fixed timestamp for the report");
  analyze->add_flag("--scaling", analyze_scaling, "Also run the ε-scaling experiment");

  std::string input_kind = "square";
  std::optional<double> T, h, amplitude;
  bool eps_scaling = false;
  std::string csv_path;
  CLI::App* simulate = app.add_subcommand("simulate", "Simulate the model");
  simulate->set_help_flag("--help", "Print this help message and exit");
  add_common(simulate);
  simulate->add_option("--input", input_kind, "Input signal")
      ->check(CLI::IsMember({"square", "constant"}));
  simulate->add_option("--T", T, "Horizon");
  simulate->add_option("--h", h, "Step size");
  simulate->add_option("--amplitude", amplitude, "Pulse amplitude");
  simulate->add_flag("--eps-scaling", eps_scaling, "Run the ε-scaling experiment");
  simulate->add_option("--csv", csv_path, "Write the trajectory CSV here");

  CLI::App* linearize = app.add_subcommand("linearize", "Equilibria and linear matrices");
  add_common(linearize);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*analyze) return run_analyze(opts, analyze_scaling);
    if (*simulate)
      return run_simulate(opts, input_kind, T, h, amplitude, eps_scaling, csv_path);
    if (*linearize) return run_linearize(opts);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ModelParseError& e) {
    std::cerr << e.what();
    return kExitParse;
  } catch (const ddeid::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
