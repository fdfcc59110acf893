#include "sepeff/experiment.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "sepeff/error.hpp"
#include "sepeff/parallel.hpp"
#include "sepeff/textio.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "simulation";

}  // namespace

double ExperimentResult::true_param() const {
  return config.kind == SensitivityKind::gamma ? truth.gamma_true : truth.eta_true;
}

std::size_t ExperimentResult::nearest_grid_index() const {
  const double target = true_param();
  std::size_t best = 0;
  for (std::size_t i = 1; i < config.grid.size(); ++i) {
    if (std::abs(config.grid[i] - target) < std::abs(config.grid[best] - target)) best = i;
  }
  return best;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.reps < 2) throw ValidationError(kModule, "an experiment needs reps >= 2");
  if (cfg.grid.empty()) throw ValidationError(kModule, "sensitivity grid is empty");
  for (double g : cfg.grid) {
    if (!(g > 0.0)) throw ValidationError(kModule, "sensitivity grid values must be positive");
  }
  cfg.dgp.check();

  ExperimentResult out;
  out.config = cfg;
  out.truth = oracle_truths(cfg.dgp, cfg.t, cfg.mc_n);
  out.reps.resize(static_cast<std::size_t>(cfg.reps));

  parallel_for(out.reps.size(), [&](std::size_t r) {
    RepResult& rep = out.reps[r];
    rep.rep = static_cast<int>(r);
    try {
      DgpConfig dgp = cfg.dgp;
      dgp.seed = derive_seed(cfg.master_seed, 2 * r);
      const SimulatedData sim = generate_dataset(dgp);
      const Pipeline pipeline(sim.observed);
      const BootstrapResult boot = bootstrap_effects(pipeline, cfg.t, cfg.boot_R, derive_seed(cfg.master_seed, 2 * r + 1));
      rep.point = boot.point;
      rep.joint_ci = boot.joint_ci;
      rep.anesthesia_ci = boot.anesthesia_ci;
      rep.surgery_ci = boot.surgery_ci;
      rep.boot_failed = boot.failed;
      rep.ok = true;
    } catch (const Error& err) {
      rep.ok = false;
      rep.error = std::string(err.module()) + ": " + err.what();
    }
  });

  for (const auto& rep : out.reps) out.failed += rep.ok ? 0 : 1;
  if (out.failed > 0.10 * cfg.reps) {
    std::string first;
    for (const auto& rep : out.reps) {
      if (!rep.ok) {
        first = "rep " + std::to_string(rep.rep) + ": " + rep.error;
        break;
      }
    }
    throw NumericError(kModule, std::to_string(out.failed) + " of " + std::to_string(cfg.reps) +
                                    " repetitions failed (first: " + first + ")");
  }

  const double truth = out.truth.anesthesia;
  for (double g : cfg.grid) {
    GridMetric m;
    m.param = g;
    double sq = 0.0, covered = 0.0, total = 0.0, used = 0.0;
    for (const auto& rep : out.reps) {
      if (!rep.ok) continue;
      const double est = adjusted_effect(rep.point.anesthesia, g);
      const double lo = adjusted_effect(rep.anesthesia_ci.lower, g);
      const double hi = adjusted_effect(rep.anesthesia_ci.upper, g);
      sq += (est - truth) * (est - truth);
      covered += (lo <= truth && truth <= hi) ? 1.0 : 0.0;
      total += est;
      used += 1.0;
    }
    m.rmse = std::sqrt(sq / used);
    m.coverage = covered / used;
    m.mean_adjusted = total / used;
    out.metrics.push_back(m);
  }
  return out;
}

void write_reps_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  auto out = open_output(path, kModule);
  out << "rep,ok,joint,joint_lo,joint_hi,anesthesia,anesthesia_lo,anesthesia_hi,surgery,surgery_lo,surgery_hi,"
         "boot_failed\n";
  for (const auto& rep : r.reps) {
    out << rep.rep << ',' << (rep.ok ? 1 : 0);
    if (rep.ok) {
      for (double v : {rep.point.joint, rep.joint_ci.lower, rep.joint_ci.upper, rep.point.anesthesia,
                       rep.anesthesia_ci.lower, rep.anesthesia_ci.upper, rep.point.surgery, rep.surgery_ci.lower,
                       rep.surgery_ci.upper}) {
        out << ',' << format_double(v);
      }
    } else {
      out << ",,,,,,,,,";
    }
    out << ',' << rep.boot_failed << '\n';
  }
  if (!out) throw IoError(kModule, "write failed for " + path.string());
}

void write_metrics_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  auto out = open_output(path, kModule);
  out << "param,kind,rmse,coverage,mean_adjusted,truth,true_param\n";
  for (const auto& m : r.metrics) {
    out << format_double(m.param) << ',' << to_string(r.config.kind) << ',' << format_double(m.rmse) << ','
        << format_double(m.coverage) << ',' << format_double(m.mean_adjusted) << ','
        << format_double(r.truth.anesthesia) << ',' << format_double(r.true_param()) << '\n';
  }
  if (!out) throw IoError(kModule, "write failed for " + path.string());
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(kModule, "cannot read config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(kModule, "config is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ValidationError(kModule, "config must be a JSON object");

  ExperimentConfig cfg;
  try {
    DgpConfig& d = cfg.dgp;
    auto num = [&](const char* key, double& field) {
      if (j.contains(key)) field = j.at(key).get<double>();
    };
    if (j.contains("n")) d.n = j.at("n").get<std::size_t>();
    num("zeta", d.zeta);
    num("xi", d.xi);
    if (j.contains("tau")) d.tau = j.at("tau").get<double>();
    if (j.contains("seed")) d.seed = j.at("seed").get<std::uint64_t>();
    num("a_intercept", d.a_intercept);
    num("a_cov", d.a_cov);
    num("m1_intercept", d.m1_intercept);
    num("m1_n", d.m1_n);
    num("m2_intercept", d.m2_intercept);
    num("m2_n", d.m2_n);
    num("y_cov", d.y_cov);
    num("y_m1", d.y_m1);
    num("y_m2", d.y_m2);
    num("y_o", d.y_o);
    num("shape", d.shape);
    num("scale", d.scale);
    num("dropout_rate", d.dropout_rate);
    num("admin_cutoff", d.admin_cutoff);
    if (j.contains("reps")) cfg.reps = j.at("reps").get<int>();
    num("t", cfg.t);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      cfg.grid = g.is_string() ? parse_grid(g.get<std::string>()) : g.get<std::vector<double>>();
    }
    if (j.contains("boot_R")) cfg.boot_R = j.at("boot_R").get<int>();
    if (j.contains("kind")) cfg.kind = parse_sensitivity_kind(j.at("kind").get<std::string>());
    if (j.contains("mc_n")) cfg.mc_n = j.at("mc_n").get<std::size_t>();
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(kModule, "bad config field: " + std::string(e.what()));
  }
  cfg.dgp.check();
  return cfg;
}

}  // namespace sepeff
