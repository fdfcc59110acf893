// Acceptance run: one PASS/FAIL line per criterion. Every tolerance and seed
// is fixed below. Arguments, if any, select a subset of criteria by number.
// Per-experiment tables are written under ./acceptance_artifacts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sepeff/bootstrap.hpp"
#include "sepeff/cli.hpp"
#include "sepeff/error.hpp"
#include "sepeff/estimator.hpp"
#include "sepeff/experiment.hpp"
#include "sepeff/parallel.hpp"
#include "sepeff/pipeline.hpp"
#include "sepeff/pseudo_exposure.hpp"
#include "sepeff/reference.hpp"
#include "sepeff/sensitivity.hpp"
#include "sepeff/simulation.hpp"
#include "test_util.hpp"

using namespace sepeff;
namespace fs = std::filesystem;

namespace {

// Study settings.
constexpr double kT = 5.0;
constexpr std::size_t kN = 5000;
constexpr int kReps = 100;
constexpr int kBootR = 200;
constexpr std::size_t kMcN = 1'000'000;
constexpr std::uint64_t kMasterSeed = 20240601;

// Criterion 1.
constexpr double kMeanSeMultiple = 3.0;
constexpr double kPaperAnchorTol = 0.05;
constexpr double kPaperJoint = 0.92, kPaperAnesthesia = 1.28, kPaperSurgery = 0.71;
constexpr double kRuntimeLimitSec = 20.0 * 60.0;
// Criterion 2.
constexpr double kCoverageLo = 0.92, kCoverageHi = 0.98;
// Criterion 4.
constexpr std::uint64_t kCrossingDataSeed = 1;
constexpr std::uint64_t kCrossingBootSeed = 1;
constexpr int kCrossingR = 1000;
constexpr double kCrossingTol = 0.05;
constexpr double kPaperCross[3] = {1.18, 1.28, 1.38};
// Criterion 5.
constexpr double kTelescopeTol = 1e-12;
constexpr double kAdjustTol = 1e-15;
constexpr double kFrontdoorTol = 1e-10;
constexpr int kFrontdoorInstances = 1000;
// Criterion 6.
constexpr double kPsiTol = 1e-12;
constexpr double kCoxTol = 1e-6;
// Criterion 7.
constexpr double kNormTol = 1e-10;
constexpr int kProbes = 10000;
// Criterion 9.
constexpr int kPseudoInstances = 300;

const fs::path kArtifacts = "acceptance_artifacts";

struct Outcome {
  bool pass = true;
  std::string summary;
};

void note(const char* fmt, double a = 0, double b = 0, double c = 0, double d = 0) {
  std::printf("    ");
  std::printf(fmt, a, b, c, d);
  std::printf("\n");
  std::fflush(stdout);
}

// Experiments are shared between criteria 1-3 and computed once.
std::map<std::string, ExperimentResult> g_experiments;
std::map<std::string, double> g_seconds;

const ExperimentResult& experiment(const std::string& key, double zeta, double xi, SensitivityKind kind,
                                   std::vector<double> grid) {
  auto it = g_experiments.find(key);
  if (it != g_experiments.end()) return it->second;
  ExperimentConfig cfg;
  cfg.dgp.n = kN;
  cfg.dgp.zeta = zeta;
  cfg.dgp.xi = xi;
  cfg.reps = kReps;
  cfg.t = kT;
  cfg.grid = std::move(grid);
  cfg.boot_R = kBootR;
  cfg.master_seed = kMasterSeed;
  cfg.kind = kind;
  cfg.mc_n = kMcN;
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult r = run_experiment(cfg);
  g_seconds[key] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fs::create_directories(kArtifacts / key);
  write_reps_csv(kArtifacts / key / "reps.csv", r);
  write_metrics_csv(kArtifacts / key / "metrics.csv", r);
  std::printf("    [experiment %s: %.0f s, %d failed reps]\n", key.c_str(), g_seconds[key], r.failed);
  std::fflush(stdout);
  return g_experiments.emplace(key, std::move(r)).first->second;
}

const ExperimentResult& null_experiment() {
  return experiment("zeta_0", 0.0, 0.0, SensitivityKind::gamma, {1.0});
}

Outcome criterion1() {
  const ExperimentResult& r = null_experiment();
  Outcome o;
  struct Row {
    const char* name;
    double EffectEstimates::*field;
    double truth, truth_se, paper;
  };
  const Row rows[] = {{"joint", &EffectEstimates::joint, r.truth.joint, r.truth.se_joint, kPaperJoint},
                      {"anesthesia", &EffectEstimates::anesthesia, r.truth.anesthesia, r.truth.se_anesthesia,
                       kPaperAnesthesia},
                      {"surgery", &EffectEstimates::surgery, r.truth.surgery, r.truth.se_surgery, kPaperSurgery}};
  std::ostringstream s;
  for (const Row& row : rows) {
    double sum = 0.0, ss = 0.0, n = 0.0;
    for (const auto& rep : r.reps) {
      if (!rep.ok) continue;
      sum += rep.point.*row.field;
      n += 1.0;
    }
    const double mean = sum / n;
    for (const auto& rep : r.reps) {
      if (rep.ok) ss += (rep.point.*row.field - mean) * (rep.point.*row.field - mean);
    }
    const double se = std::sqrt(ss / (n - 1.0) / n + row.truth_se * row.truth_se);
    const bool ok_mean = std::abs(mean - row.truth) <= kMeanSeMultiple * se;
    const bool ok_paper = std::abs(row.truth - row.paper) <= kPaperAnchorTol;
    o.pass = o.pass && ok_mean && ok_paper;
    std::printf("    %-10s mean %.4f truth %.4f (%.4f SE, z=%+.2f) paper %.2f\n", row.name, mean, row.truth, se,
                (mean - row.truth) / se, row.paper);
    s << row.name << " z=" << std::showpos << (mean - row.truth) / se << std::noshowpos << " ";
  }

  // Horizon scan: which t makes the oracle truths closest to the paper's?
  double best_t = 0.0, best_dist = 1e300;
  DgpConfig dgp;
  for (double t = 1.0; t <= 15.0; t += 1.0) {
    const TrueEffects te = oracle_truths(dgp, t, 200000);
    const double dist = std::max({std::abs(te.joint - kPaperJoint), std::abs(te.anesthesia - kPaperAnesthesia),
                                  std::abs(te.surgery - kPaperSurgery)});
    if (dist < best_dist) {
      best_dist = dist;
      best_t = t;
    }
  }
  note("horizon scan over t = 1..15: best match at t = %.0f (max abs gap %.3f); chosen t = %.0f", best_t, best_dist,
       kT);
  const double secs = g_seconds["zeta_0"];
  const bool fast = secs <= kRuntimeLimitSec;
  note("100 x (n=5000, R=200) replications took %.0f s (limit %.0f s)", secs, kRuntimeLimitSec);
  o.pass = o.pass && fast;
  s << "runtime " << static_cast<int>(secs) << "s";
  o.summary = s.str();
  return o;
}

Outcome criterion2() {
  const ExperimentResult& r = null_experiment();
  const double cov = r.metrics.at(0).coverage;
  Outcome o;
  o.pass = cov >= kCoverageLo && cov <= kCoverageHi;
  o.summary = "anesthesia coverage " + std::to_string(cov) + " over " + std::to_string(kReps - r.failed) + " reps";
  return o;
}

Outcome criterion3() {
  const std::vector<double> grid = make_grid(0.9, 1.6, 0.05);
  struct Case {
    const char* key;
    double zeta, xi;
    SensitivityKind kind;
  };
  const Case cases[] = {{"zeta_0.25", 0.25, 0.0, SensitivityKind::gamma},
                        {"zeta_0.5", 0.5, 0.0, SensitivityKind::gamma},
                        {"zeta_0.75", 0.75, 0.0, SensitivityKind::gamma},
                        {"xi_0.25", 0.0, 0.25, SensitivityKind::eta},
                        {"xi_0.5", 0.0, 0.5, SensitivityKind::eta},
                        {"xi_0.75", 0.0, 0.75, SensitivityKind::eta}};
  Outcome o;
  std::ostringstream s;
  for (const Case& c : cases) {
    const ExperimentResult& r = experiment(c.key, c.zeta, c.xi, c.kind, grid);
    const std::size_t nearest = r.nearest_grid_index();
    std::size_t argmin = 0;
    double best_cov = -1.0;
    for (std::size_t i = 0; i < r.metrics.size(); ++i) {
      if (r.metrics[i].rmse < r.metrics[argmin].rmse) argmin = i;
      best_cov = std::max(best_cov, r.metrics[i].coverage);
    }
    const bool ok_rmse = argmin == nearest;
    const bool ok_cov = r.metrics[nearest].coverage >= best_cov;
    o.pass = o.pass && ok_rmse && ok_cov;
    std::printf("    %-9s true %s %.4f -> nearest %.2f | RMSE argmin %.2f %s | coverage there %.2f, max %.2f %s\n",
                c.key, to_string(c.kind), r.true_param(), grid[nearest], grid[argmin], ok_rmse ? "ok" : "MISS",
                r.metrics[nearest].coverage, best_cov, ok_cov ? "ok" : "MISS");
    std::printf("              rmse:");
    for (const auto& m : r.metrics) std::printf(" %.3f", m.rmse);
    std::printf("\n              cov: ");
    for (const auto& m : r.metrics) std::printf(" %.2f ", m.coverage);
    std::printf("\n");
    s << c.key << (ok_rmse && ok_cov ? " ok " : " miss ");
  }
  o.summary = s.str();
  return o;
}

Outcome criterion4() {
  DgpConfig cfg;
  cfg.n = kN;
  cfg.seed = kCrossingDataSeed;
  const SimulatedData sim = generate_dataset(cfg);
  const BootstrapResult b = bootstrap_effects(sim.observed, kT, kCrossingR, kCrossingBootSeed);
  const CrossingPoints c = crossing_points(b.point.anesthesia, b.anesthesia_ci.lower, b.anesthesia_ci.upper);
  const double got[3] = {c.null_at_lower, c.null_at_point, c.null_at_upper};
  Outcome o;
  for (int i = 0; i < 3; ++i) o.pass = o.pass && std::abs(got[i] - kPaperCross[i]) <= kCrossingTol;
  char buf[200];
  std::snprintf(buf, sizeof buf, "crossings (%.3f, %.3f, %.3f) vs (1.18, 1.28, 1.38) +/- %.2f, %d failed reps",
                got[0], got[1], got[2], kCrossingTol, b.failed);
  o.summary = buf;
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> risk(1e-6, 1.0), pos(0.05, 5.0);
  double worst_tel = 0.0, worst_adj = 0.0;
  for (int i = 0; i < 1'000'000; ++i) {
    const EffectEstimates e = effect_ratios({0, 0, 1, risk(rng)}, {0, 1, 1, risk(rng)}, {1, 1, 1, risk(rng)});
    worst_tel = std::max(worst_tel, std::abs(e.joint - e.anesthesia * e.surgery) / e.joint);
    const double x = pos(rng), g = pos(rng);
    worst_adj = std::max(worst_adj, std::abs(adjusted_effect(x, g) * g - x));
  }
  // Estimates produced by the full pipeline too.
  for (const auto& [key, r] : g_experiments) {
    for (const auto& rep : r.reps) {
      if (rep.ok) worst_tel = std::max(worst_tel, std::abs(rep.point.joint - rep.point.anesthesia * rep.point.surgery) /
                                                      rep.point.joint);
    }
  }
  double worst_fd = 0.0;
  int checked = 0, skipped = 0;
  for (std::uint64_t s = 0; checked < kFrontdoorInstances; ++s) {
    Engine e = make_engine(55, s);
    const int k = 1 + static_cast<int>(s % 4);
    const int ell = std::uniform_int_distribution<int>(0, k)(e);
    const Dataset d = random_discrete_dataset(200, k, ell, e);
    try {
      const FrontDoorRoutes r = frontdoor_routes(d, 1.0 + static_cast<double>(s % 5));
      worst_fd = std::max(worst_fd, std::abs(r.direct - r.frontdoor));
      ++checked;
    } catch (const ValidationError&) {
      ++skipped;
    }
  }
  o.pass = worst_tel <= kTelescopeTol && worst_adj <= kAdjustTol && worst_fd <= kFrontdoorTol;
  char buf[300];
  std::snprintf(buf, sizeof buf,
                "telescoping rel err %.2e, adjust err %.2e, front-door max diff %.2e on %d instances (%d with empty "
                "cells redrawn)",
                worst_tel, worst_adj, worst_fd, checked, skipped);
  o.summary = buf;
  return o;
}

Outcome criterion6() {
  Outcome o;
  // estimate_psi vs. the literal double sum.
  double worst_psi = 0.0;
  unsigned seed = 0;
  std::normal_distribution<double> normal(0.0, 0.7);
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  for (int k = 0; k <= 3; ++k) {
    for (int ell = 0; ell <= k; ++ell) {
      for (std::size_t n : {std::size_t{5}, std::size_t{20}, std::size_t{50}}) {
        std::mt19937_64 rng(++seed);
        const Dataset d = testutil::random_dataset(n, 2, k, ell, seed);
        std::vector<std::vector<double>> betas;
        const MediatorJointModel med = testutil::random_model(k, ell, 2, rng, &betas);
        CoxFit cox;
        cox.theta = Eigen::VectorXd(DesignSpec::for_dataset(d).n_columns());
        std::vector<double> theta;
        for (Eigen::Index j = 0; j < cox.theta.size(); ++j) theta.push_back(cox.theta(j) = normal(rng));
        const StepFunction base{{0.5, 1.5, 3.0}, {0.1, 0.4, 1.1}};
        std::vector<double> w(n);
        for (double& v : w) v = unif(rng);
        for (double t : {1.0, 2.0, 4.0}) {
          for (auto [a, as] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
            const double got = estimate_psi(cox, base, med, d, a, as, t, w).risk;
            const double ref = oracle::psi_double_sum(d, theta, betas, cumhaz_at(base, t), a, as, w);
            worst_psi = std::max(worst_psi, std::abs(got - ref));
          }
        }
      }
    }
  }
  // Two-coefficient Cox toys vs. the grid search.
  double worst_cox = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::mt19937_64 rng(600 + trial);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 12 + 3 * trial;
    Eigen::MatrixXd x(n, 2);
    std::vector<std::vector<double>> xs(n);
    std::vector<double> time(n), w(n);
    std::vector<int> event(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = z(rng);
      x(i, 1) = u(rng) < 0.5 ? 1.0 : 0.0;
      xs[i] = {x(i, 0), x(i, 1)};
      time[i] = trial % 2 ? std::ceil(6.0 * u(rng)) : 0.1 + 5.0 * u(rng);
      event[i] = u(rng) < 0.8 ? 1 : 0;
      w[i] = trial % 3 ? 0.3 + u(rng) : 1.0;
    }
    event[0] = event[1] = 1;
    try {
      const CoxFit fit = CoxProblem(x, time, event).fit(w);
      const auto best = oracle::zoom_maximize(
          [&](const std::vector<double>& b) { return oracle::cox_loglik(xs, time, event, w, b); }, {0.0, 0.0}, 0.5,
          1e-9);
      worst_cox = std::max({worst_cox, std::abs(fit.theta(0) - best[0]), std::abs(fit.theta(1) - best[1])});
    } catch (const Error& e) {
      note("cox toy %.0f raised an error", trial);
      worst_cox = 1e300;
    }
  }
  // Breslow on uncensored n <= 5 data vs. hand-computed Nelson-Aalen.
  bool breslow_exact = true;
  const std::vector<std::vector<double>> cases{{1, 2, 3}, {2, 1, 2, 4}, {3, 3, 1, 5, 2}, {1, 1, 1, 2, 2}, {4, 2}};
  for (const auto& time : cases) {
    const std::size_t n = time.size();
    const std::vector<int> event(n, 1);
    const CoxProblem prob(Eigen::MatrixXd(static_cast<Eigen::Index>(n), 0), time, event);
    CoxFit fit;
    fit.theta = Eigen::VectorXd(0);
    const StepFunction s = prob.baseline(fit, std::vector<double>(n, 1.0));
    // By hand: increment d_j / r_j at each distinct time.
    std::vector<double> sorted(time);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    double cum = 0.0;
    if (s.times != sorted) breslow_exact = false;
    for (std::size_t j = 0; j < sorted.size() && breslow_exact; ++j) {
      const double dj = static_cast<double>(std::count(time.begin(), time.end(), sorted[j]));
      const double rj = static_cast<double>(std::count_if(time.begin(), time.end(), [&](double v) { return v >= sorted[j]; }));
      cum += dj / rj;
      breslow_exact = breslow_exact && s.values[j] == cum;
    }
  }
  o.pass = worst_psi <= kPsiTol && worst_cox <= kCoxTol && breslow_exact;
  char buf[200];
  std::snprintf(buf, sizeof buf, "psi max diff %.2e, cox max diff %.2e, Breslow exact %s", worst_psi, worst_cox,
                breslow_exact ? "yes" : "no");
  o.summary = buf;
  return o;
}

Outcome criterion7() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.5);
  std::uniform_int_distribution<int> coin(0, 1);
  double worst_norm = 0.0;
  long forbidden_mass_nonzero = 0;
  int probes = 0;
  // Fitted models as well as random ones.
  std::vector<MediatorJointModel> models;
  for (int k = 1; k <= 5; ++k) {
    for (int ell = 0; ell <= k; ++ell) models.push_back(testutil::random_model(k, ell, 3, rng));
  }
  {
    const Dataset d = testutil::random_dataset(2000, 3, 3, 2, 70);
    models.push_back(fit_mediator_model(d, std::vector<double>(d.size(), 1.0)));
  }
  for (; probes < kProbes; ++probes) {
    const MediatorJointModel& mdl = models[static_cast<std::size_t>(probes) % models.size()];
    const int a = coin(rng);
    const std::vector<double> c{normal(rng), normal(rng), normal(rng)};
    const auto p = mdl.enumerate_joint(a, c);
    double total = 0.0;
    for (std::size_t idx = 0; idx < p.size(); ++idx) {
      total += p[idx];
      if (a == 0) {
        const auto m = mediator_vector(idx, mdl.k());
        bool forbidden = false;
        for (int j = 0; j < mdl.schema().ell; ++j) forbidden = forbidden || m[j] == 1;
        if (forbidden && p[idx] != 0.0) ++forbidden_mass_nonzero;
      }
    }
    worst_norm = std::max(worst_norm, std::abs(total - 1.0));
  }
  Outcome o;
  o.pass = worst_norm <= kNormTol && forbidden_mass_nonzero == 0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d probes: max |sum - 1| %.2e, forbidden cells with mass %ld", probes, worst_norm,
                forbidden_mass_nonzero);
  o.summary = buf;
  return o;
}

std::string text_of(const fs::path& p) { return testutil::read_text(p); }

Outcome criterion8() {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  const int saved = num_threads();
  testutil::TempDir dir;

  DgpConfig cfg;
  cfg.n = 1500;
  cfg.seed = 8;
  cfg.zeta = 0.3;
  cfg.xi = 0.2;
  write_dataset(dir / "g1.csv", generate_dataset(cfg).observed);
  write_dataset(dir / "g2.csv", generate_dataset(cfg).observed);
  expect(text_of(dir / "g1.csv") == text_of(dir / "g2.csv"), "generate_dataset");

  Engine e1 = make_engine(3, 4), e2 = make_engine(3, 4);
  expect(draw_weights(1000, e1) == draw_weights(1000, e2), "draw_weights");

  {
    Engine r1 = make_engine(9, 1), r2 = make_engine(9, 1);
    write_dataset(dir / "d1.csv", random_discrete_dataset(100, 2, 1, r1));
    write_dataset(dir / "d2.csv", random_discrete_dataset(100, 2, 1, r2));
    expect(text_of(dir / "d1.csv") == text_of(dir / "d2.csv"), "random_discrete_dataset");
  }

  const TrueEffects t1 = oracle_truths(cfg, kT, 100000), t2 = oracle_truths(cfg, kT, 100000);
  expect(t1.joint == t2.joint && t1.gamma_true == t2.gamma_true && t1.eta_true == t2.eta_true, "oracle_truths");

  const Dataset d = generate_dataset(cfg).observed;
  const PipelineModels m = Pipeline(d).fit(std::vector<double>(d.size(), 1.0));
  std::vector<double> cumhaz;
  for (double t = 1.0; t <= 10.0; t += 1.0) cumhaz.push_back(cumhaz_at(m.base, t));
  std::vector<double> w(d.size());
  Engine we = make_engine(10, 0);
  w = draw_weights(d.size(), we);
  const auto serial_risk = reference::substitution_risks_serial(m.cox.theta, m.med, d, 0, 1, cumhaz, w);
  std::string boot_text;
  {
    write_replicates_csv(dir / "bs.csv", reference::bootstrap_effects_serial(d, kT, 12, 44));
    boot_text = text_of(dir / "bs.csv");
  }
  for (int threads : {1, 2, 3, 4, 8}) {
    set_num_threads(threads);
    const std::string tag = " (" + std::to_string(threads) + " threads)";
    expect(substitution_risks(m.cox.theta, m.med, d, 0, 1, cumhaz, w) == serial_risk, "substitution_risks" + tag);
    write_replicates_csv(dir / "bp.csv", bootstrap_effects(d, kT, 12, 44));
    expect(text_of(dir / "bp.csv") == boot_text, "bootstrap_effects" + tag);
  }

  {
    ExperimentConfig ec;
    ec.dgp.n = 500;
    ec.reps = 4;
    ec.boot_R = 5;
    ec.mc_n = 100000;
    ec.grid = {0.9, 1.0, 1.1};
    ec.master_seed = 12;
    std::string reps_text, metrics_text;
    for (int threads : {1, 4}) {
      set_num_threads(threads);
      const ExperimentResult r = run_experiment(ec);
      write_reps_csv(dir / "er.csv", r);
      write_metrics_csv(dir / "em.csv", r);
      if (threads == 1) {
        reps_text = text_of(dir / "er.csv");
        metrics_text = text_of(dir / "em.csv");
      } else {
        expect(text_of(dir / "er.csv") == reps_text && text_of(dir / "em.csv") == metrics_text, "run_experiment");
      }
    }
  }

  {
    std::mt19937_64 rng(80);
    EligibilityTable elig;
    for (int i = 0; i < 300; ++i) {
      elig.ids.push_back("id" + std::to_string(i));
      std::array<bool, kMonths> row{};
      const int lo = std::uniform_int_distribution<int>(0, 2)(rng);
      const int hi = i % 7 == 0 ? 0 : kMonths - 1;
      for (int mth = lo; mth <= hi; ++mth) row[static_cast<std::size_t>(mth)] = true;
      row[0] = row[0] || hi == 0;
      elig.eligible.push_back(row);
    }
    std::array<double, kMonths> hist{};
    hist.fill(1.0);
    expect(assign_pseudo_months(hist, elig, 5).month == assign_pseudo_months(hist, elig, 5).month,
           "assign_pseudo_months");
  }

  // End to end through the command line.
  const std::string root = dir.path().string();
  auto cli = [&](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return std::make_pair(code, out.str());
  };
  cli({"simulate", "--sample", "s", "--n", "1200", "--seed", "6", "--out", root});
  for (const char* sub : {"a", "b"}) {
    const std::string threads = sub[0] == 'a' ? "1" : "4";
    const std::string out = root + "/" + sub;
    const auto est = cli({"estimate", "--data", root + "/s.csv", "--schema", root + "/s.schema.json", "--t", "5",
                          "--boot", "10", "--seed", "3", "--threads", threads, "--out", out});
    const auto sens = cli({"sensitivity", "--effects", out + "/effects.json", "--out", out});
    const auto sim = cli({"simulate", "--n", "400", "--reps", "2", "--boot", "4", "--seed", "2", "--threads", threads,
                          "--out", out + "/sim"});
    const auto ver = cli({"verify", "--frontdoor", "--n", "200", "--seed", "3", "--instances", "50", "--out", out});
    expect(est.first == 0 && sens.first == 0 && sim.first == 0 && ver.first == 0, std::string("cli exit codes ") + sub);
  }
  for (const char* f : {"effects.json", "curves.csv", "replicates.csv", "sensitivity.csv", "crossings.json",
                        "sim/reps.csv", "sim/metrics.csv", "sim/truth.json"}) {
    expect(text_of(dir / (std::string("a/") + f)) == text_of(dir / (std::string("b/") + f)), std::string("cli ") + f);
  }
  set_num_threads(saved);

  Outcome o;
  o.pass = failures.empty();
  if (o.pass) {
    o.summary = "generator, weights, oracle, kernels, bootstrap, experiment, pseudo-assign and CLI outputs identical "
                "across runs and 1-8 threads";
  } else {
    o.summary = "differences in:";
    for (const auto& f : failures) o.summary += " " + f + ";";
  }
  return o;
}

Outcome criterion9() {
  std::mt19937_64 rng(9);
  int solved = 0, pool_errors = 0, overflowed = 0, mismatched = 0, ineligible = 0;
  long max_dev = 0;
  for (int trial = 0; trial < kPseudoInstances; ++trial) {
    const int n = 50 + 50 * (trial % 8);
    EligibilityTable elig;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      elig.ids.push_back(std::to_string(i));
      std::array<bool, kMonths> row{};
      // 15% delivery month only, 5% one other month, 20% a window missing
      // month 0, the rest month 0 up to a random earliest month.
      int lo = 0, hi = std::uniform_int_distribution<int>(6, kMonths - 1)(rng);
      const double v = u(rng);
      if (v < 0.15) {
        hi = 0;
      } else if (v < 0.20) {
        lo = hi = std::uniform_int_distribution<int>(1, kMonths - 1)(rng);
      } else if (v < 0.40) {
        lo = std::uniform_int_distribution<int>(1, 3)(rng);
      }
      for (int mth = lo; mth <= hi; ++mth) row[static_cast<std::size_t>(mth)] = true;
      elig.eligible.push_back(row);
    }
    std::array<double, kMonths> hist{};
    for (auto& h : hist) h = std::uniform_int_distribution<int>(1, 50)(rng);
    MonthAssignment a;
    try {
      a = assign_pseudo_months(hist, elig, static_cast<std::uint64_t>(trial));
    } catch (const ValidationError&) {
      ++pool_errors;
      continue;
    }
    ++solved;
    // Post-hoc check from the raw assignment alone.
    long pool = 0;
    std::array<long, kMonths> counts{}, single{};
    for (int i = 0; i < n; ++i) {
      const auto& row = elig.eligible[static_cast<std::size_t>(i)];
      const int months = static_cast<int>(std::count(row.begin(), row.end(), true));
      if (!(row[0] && months == 1)) ++pool;
      if (months == 1) ++single[static_cast<std::size_t>(std::find(row.begin(), row.end(), true) - row.begin())];
      const int mth = a.month[static_cast<std::size_t>(i)];
      if (mth >= 0) {
        ++counts[static_cast<std::size_t>(mth)];
        if (!row[static_cast<std::size_t>(mth)]) ++ineligible;
      }
    }
    // Subjects eligible in a single month m >= 1 must go there, so a month
    // whose singletons outnumber its quota holds exactly the singletons.
    const auto expected = expected_counts(hist, pool);
    bool same = true, over = false;
    for (int mth = 0; mth < kMonths; ++mth) {
      long target = expected[mth];
      if (mth > 0 && single[mth] > target) {
        target = single[mth];
        over = true;
      }
      max_dev = std::max(max_dev, std::abs(counts[mth] - target));
      same = same && counts[mth] == target;
    }
    if (over) ++overflowed;
    if (!same) ++mismatched;
  }
  Outcome o;
  o.pass = solved > 0 && mismatched == 0 && ineligible == 0;
  char buf[300];
  std::snprintf(buf, sizeof buf,
                "%d instances solved (%d rejected for an exhausted pool, %d with single-month overflow): "
                "%d with counts off target (max dev %ld), %d ineligible assignments",
                solved, pool_errors, overflowed, mismatched, max_dev, ineligible);
  o.summary = buf;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  const char* names[] = {"",
                         "oracle consistency",
                         "bootstrap coverage",
                         "sensitivity recovery",
                         "crossing values",
                         "algebraic identities",
                         "small-instance oracles",
                         "structural zeros and normalization",
                         "determinism",
                         "pseudo-exposure matching"};
  fs::create_directories(kArtifacts);
  std::vector<std::string> lines;
  bool all = true;
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    std::printf("criterion %d: %s\n", id, names[id]);
    std::fflush(stdout);
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("error: ") + e.what();
    }
    all = all && o.pass;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s criterion %d (%s): ", o.pass ? "PASS" : "FAIL", id, names[id]);
    lines.push_back(buf + o.summary);
    std::printf("%s\n", lines.back().c_str());
    std::fflush(stdout);
  }
  std::printf("\nsummary\n");
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  return all ? 0 : 1;
}
