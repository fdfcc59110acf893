#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sepeff/bootstrap.hpp"
#include "sepeff/sensitivity.hpp"
#include "sepeff/simulation.hpp"

namespace sepeff {

struct ExperimentConfig {
  DgpConfig dgp;
  int reps = 100;
  double t = 5.0;
  std::vector<double> grid{1.0};
  int boot_R = 200;
  std::uint64_t master_seed = 1;
  SensitivityKind kind = SensitivityKind::gamma;
  std::size_t mc_n = 1'000'000;
};

struct RepResult {
  int rep = 0;
  bool ok = false;
  std::string error;
  EffectEstimates point;
  Interval joint_ci, anesthesia_ci, surgery_ci;
  int boot_failed = 0;
};

struct GridMetric {
  double param = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;
  double mean_adjusted = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  TrueEffects truth;
  std::vector<RepResult> reps;
  std::vector<GridMetric> metrics;  // anesthesia, against truth.anesthesia
  int failed = 0;

  /// gamma_true or eta_true depending on config.kind.
  double true_param() const;
  /// Index of the grid value nearest true_param() (earlier value on ties).
  std::size_t nearest_grid_index() const;
};

/// Rep r simulates with seed derive_seed(master_seed, 2r) and bootstraps
/// with seed derive_seed(master_seed, 2r+1). Reps run in parallel; the
/// result depends only on the config. Aborts when more than 10% of reps fail.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// `rep,ok,joint,joint_lo,joint_hi,anesthesia,anesthesia_lo,anesthesia_hi,surgery,surgery_lo,surgery_hi,boot_failed`
void write_reps_csv(const std::filesystem::path& path, const ExperimentResult& r);
/// `param,kind,rmse,coverage,mean_adjusted,truth,true_param`
void write_metrics_csv(const std::filesystem::path& path, const ExperimentResult& r);

/// JSON object with DgpConfig fields plus reps, t, grid ("lo:hi:step" or a
/// list), boot_R, kind, mc_n, master_seed. Missing fields keep defaults.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace sepeff
