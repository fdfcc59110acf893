#include "sepeff/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>
#include <json.hpp>

#include "sepeff/bootstrap.hpp"
#include "sepeff/data.hpp"
#include "sepeff/error.hpp"
#include "sepeff/estimator.hpp"
#include "sepeff/experiment.hpp"
#include "sepeff/parallel.hpp"
#include "sepeff/pipeline.hpp"
#include "sepeff/pseudo_exposure.hpp"
#include "sepeff/sensitivity.hpp"
#include "sepeff/simulation.hpp"
#include "sepeff/textio.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "cli";
namespace fs = std::filesystem;
using nlohmann::json;

json interval_json(double est, const Interval& ci) { return json{{"est", est}, {"lo", ci.lower}, {"hi", ci.upper}}; }

void write_json(const fs::path& path, const json& j) {
  auto out = open_output(path, kModule);
  out << j.dump(2) << '\n';
  if (!out) throw IoError(kModule, "write failed for " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(kModule, "cannot read " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ValidationError(kModule, path.string() + " is not valid JSON: " + e.what());
  }
}

fs::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

struct Options {
  int threads = 0;
  std::uint64_t seed = 1;
  std::string out_dir;

  // estimate
  std::string data, schema;
  double t = std::numeric_limits<double>::quiet_NaN();
  int boot = 1000;
  std::string curve_grid;

  // sensitivity
  std::string effects;
  std::string kind = "gamma";
  std::string grid = "0.9:1.6:0.05";

  // simulate
  std::string config;
  int reps = -1;
  int boot_sim = -1;
  long long n = -1;
  std::string sample;

  // pseudo-assign
  std::string eligibility, hist;

  // verify
  bool frontdoor = false;
  int instances = 1000;
  long long verify_n = 200;
};

int cmd_estimate(const Options& o, std::ostream& out) {
  if (!std::isfinite(o.t) || o.t < 0) throw ValidationError(kModule, "--t must be a nonnegative number");
  const SchemaFile schema = load_schema(o.schema);
  const Dataset d = load_dataset(o.data, schema.mediators, schema.p);
  const Pipeline pipeline(d);
  const BootstrapResult boot = bootstrap_effects(pipeline, o.t, o.boot, o.seed);

  std::vector<double> grid;
  if (!o.curve_grid.empty()) {
    grid = parse_grid(o.curve_grid);
  } else {
    grid = o.t > 0 ? make_grid(0.0, o.t, o.t / 50.0) : std::vector<double>{0.0};
  }
  const std::vector<double> unit(d.size(), 1.0);
  const PipelineModels models = pipeline.fit(unit);
  const CurveSet curves = survival_curves(models.cox, models.base, models.med, d, grid, unit);

  const fs::path dir = resolve_out_dir(o.out_dir);
  json j{{"t", o.t},
         {"joint", interval_json(boot.point.joint, boot.joint_ci)},
         {"anesthesia", interval_json(boot.point.anesthesia, boot.anesthesia_ci)},
         {"surgery", interval_json(boot.point.surgery, boot.surgery_ci)},
         {"boot", {{"R", boot.R}, {"failed", boot.failed}, {"seed", boot.seed}}}};
  write_json(dir / "effects.json", j);
  {
    auto f = open_output(dir / "curves.csv", kModule);
    f << "t,S00,S01,S11\n";
    for (std::size_t i = 0; i < curves.grid.size(); ++i) {
      f << format_double(curves.grid[i]) << ',' << format_double(curves.s00[i]) << ','
        << format_double(curves.s01[i]) << ',' << format_double(curves.s11[i]) << '\n';
    }
  }
  write_replicates_csv(dir / "replicates.csv", boot);
  out << j.dump() << '\n';
  return 0;
}

int cmd_sensitivity(const Options& o, std::ostream& out) {
  const json j = read_json(o.effects);
  double est = 0.0;
  Interval ci;
  try {
    const auto& a = j.at("anesthesia");
    est = a.at("est").get<double>();
    ci = {a.at("lo").get<double>(), a.at("hi").get<double>()};
  } catch (const json::exception& e) {
    throw ValidationError(kModule, "effects file lacks anesthesia {est, lo, hi}: " + std::string(e.what()));
  }
  const SensitivityKind kind = parse_sensitivity_kind(o.kind);
  const std::vector<double> grid = parse_grid(o.grid);
  const SensitivityCurve curve = sensitivity_curve(est, ci, kind, grid);
  const CrossingPoints cp = crossing_points(est, ci.lower, ci.upper);

  const fs::path dir = resolve_out_dir(o.out_dir);
  write_curve_csv(dir / "sensitivity.csv", curve);
  const json c{{"kind", to_string(kind)},
               {"null_at_lower", cp.null_at_lower},
               {"null_at_point", cp.null_at_point},
               {"null_at_upper", cp.null_at_upper}};
  write_json(dir / "crossings.json", c);
  out << c.dump() << '\n';
  return 0;
}

int cmd_simulate(const Options& o, std::ostream& out, const CLI::App& sub) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_experiment_config(o.config);
  if (sub.count("--seed")) cfg.master_seed = o.seed;
  if (o.reps >= 0) cfg.reps = o.reps;
  if (o.boot_sim >= 0) cfg.boot_R = o.boot_sim;
  if (o.n >= 0) cfg.dgp.n = static_cast<std::size_t>(o.n);
  if (sub.count("--grid")) cfg.grid = parse_grid(o.grid);
  if (sub.count("--kind")) cfg.kind = parse_sensitivity_kind(o.kind);
  if (sub.count("--t")) cfg.t = o.t;
  const fs::path dir = resolve_out_dir(o.out_dir);

  if (!o.sample.empty()) {
    DgpConfig dgp = cfg.dgp;
    dgp.seed = cfg.master_seed;
    const SimulatedData sim = generate_dataset(dgp);
    write_dataset(dir / (o.sample + ".csv"), sim.observed);
    write_schema(dir / (o.sample + ".schema.json"), SchemaFile{sim.observed.schema(), sim.observed.p()});
    out << json{{"data", (dir / (o.sample + ".csv")).string()}, {"n", sim.observed.size()}}.dump() << '\n';
    return 0;
  }

  const ExperimentResult r = run_experiment(cfg);
  write_reps_csv(dir / "reps.csv", r);
  write_metrics_csv(dir / "metrics.csv", r);
  const json truth{{"t", r.truth.t},
                   {"joint", r.truth.joint},
                   {"anesthesia", r.truth.anesthesia},
                   {"surgery", r.truth.surgery},
                   {"gamma_true", r.truth.gamma_true},
                   {"eta_true", r.truth.eta_true},
                   {"mc_size", r.truth.mc_size},
                   {"se", {{"joint", r.truth.se_joint},
                           {"anesthesia", r.truth.se_anesthesia},
                           {"surgery", r.truth.se_surgery},
                           {"gamma", r.truth.se_gamma},
                           {"eta", r.truth.se_eta}}},
                   {"failed_reps", r.failed}};
  write_json(dir / "truth.json", truth);
  out << truth.dump() << '\n';
  return 0;
}

int cmd_pseudo_assign(const Options& o, std::ostream& out) {
  const EligibilityTable elig = load_eligibility(o.eligibility);
  const auto hist = load_exposed_hist(o.hist);
  const MonthAssignment a = assign_pseudo_months(hist, elig, o.seed);
  const fs::path dir = resolve_out_dir(o.out_dir);
  write_assignment(dir / "assigned.csv", dir / "excluded.csv", elig, a);
  json j{{"pool_size", a.pool_size}, {"excluded", a.excluded.size()}};
  for (int m = 0; m < kMonths; ++m) {
    j["months"].push_back({{"month", m}, {"expected", a.expected[m]}, {"assigned", a.assigned[m]}});
  }
  out << j.dump() << '\n';
  return 0;
}

int cmd_verify(const Options& o, std::ostream& out) {
  if (!o.frontdoor) throw ValidationError(kModule, "verify needs a check to run (--frontdoor)");
  if (o.instances < 1 || o.verify_n < 2) throw ValidationError(kModule, "--instances >= 1 and --n >= 2 required");
  double worst = 0.0;
  int checked = 0, skipped = 0;
  for (int i = 0; i < o.instances; ++i) {
    Engine rng = make_engine(o.seed, static_cast<std::uint64_t>(i));
    std::uniform_int_distribution<int> kdist(0, 3);
    const int k = kdist(rng);
    const int ell = std::uniform_int_distribution<int>(0, k)(rng);
    const Dataset d = random_discrete_dataset(static_cast<std::size_t>(o.verify_n), k, ell, rng);
    const double t = std::uniform_int_distribution<int>(1, 5)(rng);
    try {
      const FrontDoorRoutes r = frontdoor_routes(d, t);
      worst = std::max(worst, std::abs(r.direct - r.frontdoor));
      ++checked;
    } catch (const ValidationError&) {
      ++skipped;  // empty exposed cell for some mediator value
    }
  }
  const bool ok = worst <= 1e-10;
  out << json{{"check", "frontdoor"}, {"instances", checked}, {"skipped", skipped}, {"max_abs_diff", worst}, {"ok", ok}}
             .dump()
      << '\n';
  if (!ok) throw NumericError(kModule, "front-door routes disagree by " + std::to_string(worst));
  return 0;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return 2;
    case ErrorKind::numeric: return 3;
    case ErrorKind::io: return 4;
  }
  return 1;
}

void report(std::ostream& err, const std::string& kind, const std::string& module, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"module", module}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Separable-effects estimation toolkit"};
  app.require_subcommand(1);
  app.add_option("--threads", o.threads, "worker threads (output never depends on it)");

  auto common = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "seed for all randomness");
    s->add_option("--out", o.out_dir, std::string("output directory (default $") + kOutDirEnv + " or .)");
    s->add_option("--threads", o.threads, "worker threads");
  };

  CLI::App* est = app.add_subcommand("estimate", "effects with bootstrap CIs and survival curves");
  common(est);
  est->add_option("--data", o.data, "subject CSV")->required();
  est->add_option("--schema", o.schema, "schema JSON")->required();
  est->add_option("--t", o.t, "horizon")->required();
  est->add_option("--boot", o.boot, "bootstrap replicates");
  est->add_option("--curve-grid", o.curve_grid, "survival-curve grid lo:hi:step or list");

  CLI::App* sens = app.add_subcommand("sensitivity", "adjusted anesthesia effect over a parameter grid");
  common(sens);
  sens->add_option("--effects", o.effects, "effects.json from estimate")->required();
  sens->add_option("--kind", o.kind, "gamma or eta");
  sens->add_option("--grid", o.grid, "lo:hi:step or list");

  CLI::App* sim = app.add_subcommand("simulate", "simulation experiment (RMSE and coverage)");
  common(sim);
  sim->add_option("--config", o.config, "experiment JSON");
  sim->add_option("--reps", o.reps, "repetitions");
  sim->add_option("--boot", o.boot_sim, "bootstrap replicates per repetition");
  sim->add_option("--n", o.n, "sample size");
  sim->add_option("--grid", o.grid, "sensitivity grid");
  sim->add_option("--kind", o.kind, "gamma or eta");
  sim->add_option("--t", o.t, "horizon");
  sim->add_option("--sample", o.sample, "write one simulated data set with this file stem instead");

  CLI::App* pa = app.add_subcommand("pseudo-assign", "pseudo-procedure months for unexposed subjects");
  common(pa);
  pa->add_option("--eligibility", o.eligibility, "id,month_0..month_9 CSV")->required();
  pa->add_option("--hist", o.hist, "month,count CSV of exposed procedures")->required();

  CLI::App* ver = app.add_subcommand("verify", "numerical identity checks");
  common(ver);
  ver->add_flag("--frontdoor", o.frontdoor, "front-door vs direct route on random discrete data");
  ver->add_option("--n", o.verify_n, "rows per instance");
  ver->add_option("--instances", o.instances, "number of instances");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    report(err, "validation", kModule, e.what());
    return 2;
  }

  try {
    set_num_threads(o.threads);
    if (est->parsed()) return cmd_estimate(o, out);
    if (sens->parsed()) return cmd_sensitivity(o, out);
    if (sim->parsed()) return cmd_simulate(o, out, *sim);
    if (pa->parsed()) return cmd_pseudo_assign(o, out);
    if (ver->parsed()) return cmd_verify(o, out);
  } catch (const Error& e) {
    report(err, to_string(e.kind()), e.module(), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report(err, "internal", kModule, e.what());
    return 1;
  }
  return 2;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace sepeff
