#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sepeff/data.hpp"
#include "sepeff/estimator.hpp"
#include "sepeff/parallel.hpp"
#include "sepeff/pipeline.hpp"

namespace sepeff {

/// n unit-rate exponential draws rescaled to sum to n (n times a flat
/// Dirichlet draw).
std::vector<double> draw_weights(std::size_t n, Engine& rng);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct ReplicateRow {
  int rep = 0;
  double joint = 0.0;
  double anesthesia = 0.0;
  double surgery = 0.0;
  bool converged = false;
  std::string error;  // empty when converged
};

struct BootstrapResult {
  std::vector<ReplicateRow> replicates;  // all R rows in replicate order
  EffectEstimates point;                 // unit weights
  Interval joint_ci, anesthesia_ci, surgery_ci;
  std::uint64_t seed = 0;
  int R = 0;
  int failed = 0;
  double level = 0.95;
};

struct BootstrapOptions {
  double level = 0.95;
  double max_failure_fraction = 0.10;
};

/// Type-7 (linear interpolation) sample quantile. Sorts a copy.
double percentile(std::vector<double> xs, double q);

/// Replicate r refits the whole pipeline with draw_weights(n, make_engine(seed, r)).
/// Replicates run in parallel; output is independent of the thread count.
BootstrapResult bootstrap_effects(const Pipeline& pipeline, double t, int R, std::uint64_t seed,
                                  const BootstrapOptions& opts = {});
BootstrapResult bootstrap_effects(const Dataset& d, double t, int R, std::uint64_t seed,
                                  const BootstrapOptions& opts = {});

namespace detail {
BootstrapResult run_bootstrap(const Pipeline& pipeline, double t, int R, std::uint64_t seed,
                              const BootstrapOptions& opts, bool parallel);
}  // namespace detail

/// `rep,joint,anesthesia,surgery,converged`
void write_replicates_csv(const std::filesystem::path& path, const BootstrapResult& b);

}  // namespace sepeff
