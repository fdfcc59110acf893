#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sepeff/data.hpp"
#include "sepeff/parallel.hpp"

namespace sepeff {

/// Generator of the simulation study. With S = C_1 + ... + C_4:
///   A      ~ Bernoulli(expit(a_intercept + a_cov * S))
///   M1(n,o) = n * I(V1 < expit(m1_intercept + S + m1_n * n + xi * o))
///   M2(n,o) =     I(V2 < expit(m2_intercept + S + m2_n * n + tau * o))
///   Y(n,o)  = (scale * -log U / exp(y_cov * S + y_m1 M1 + y_m2 M2 + y_o o + zeta n))^shape
/// V1, V2 and U are shared by all four (n, o) arms of a subject.
/// Observed time is min(Y(A,A), S1, admin_cutoff) with S1 ~ Exp(dropout_rate).
struct DgpConfig {
  std::size_t n = 5000;
  double zeta = 0.0;
  double xi = 0.0;
  std::optional<double> tau;  // defaults to xi
  std::uint64_t seed = 1;

  double a_intercept = -2.0;
  double a_cov = 1.0;
  double m1_intercept = -2.0;
  double m1_n = 1.0;
  double m2_intercept = -2.0;
  double m2_n = 1.0;
  double y_cov = 0.25;
  double y_m1 = -1.5;
  double y_m2 = -1.5;
  double y_o = 0.5;
  double shape = 2.0;
  double scale = 2.0;
  double dropout_rate = 0.5;
  double admin_cutoff = 15.0;

  double tau_value() const { return tau.value_or(xi); }
  void check() const;
};

/// Counterfactuals of one subject, indexed [n][o].
struct LatentSubject {
  std::array<std::array<double, 2>, 2> y{};
  std::array<std::array<int, 2>, 2> m1{};
  std::array<std::array<int, 2>, 2> m2{};
  double dropout = 0.0;
};

struct SimulatedData {
  Dataset observed;  // k = 2, ell = 1, p = 4
  std::vector<LatentSubject> latent;
};

SimulatedData generate_dataset(const DgpConfig& cfg);

/// Pr{Y <= t} for the generator's outcome law given its linear predictor.
double outcome_cdf(const DgpConfig& cfg, double t, double lp);

struct TrueEffects {
  double t = 0.0;
  double joint = 0.0;
  double anesthesia = 0.0;
  double surgery = 0.0;
  double gamma_true = 0.0;
  double eta_true = 0.0;
  std::size_t mc_size = 0;
  double se_joint = 0.0, se_anesthesia = 0.0, se_surgery = 0.0, se_gamma = 0.0, se_eta = 0.0;
  double risk00 = 0.0, risk01 = 0.0, risk11 = 0.0;
};

/// Monte Carlo truths from mc_n simulated subjects (seeded by cfg.seed).
///   joint = Pr{Y(1,1) <= t} / Pr{Y(0,0) <= t}, and so on;
///   gamma_true = Pr{Y(1,1,M(0,0)) <= t} / Pr{Y(0,1,M(0,0)) <= t};
///   eta_true   = Pr{Y(0,1,M(0,0)) <= t} / Pr{Y(0,1,M(0,1)) <= t}.
/// Standard errors use the delta method on the paired indicators.
TrueEffects oracle_truths(const DgpConfig& cfg, double t, std::size_t mc_n = 1'000'000);

/// Random uncensored data with no covariates, for the front-door check:
/// A, M and Y depend on each other through random cell probabilities, the
/// first `ell` mediators are structural zeros and every row has event = 1.
/// Times are drawn from {1, ..., 5}.
Dataset random_discrete_dataset(std::size_t n, int k, int ell, Engine& rng);

}  // namespace sepeff
