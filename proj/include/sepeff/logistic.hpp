#pragma once

#include <span>

#include <Eigen/Dense>

namespace sepeff {

struct LogisticOptions {
  double tol = 1e-8;       // on the norm of the weight-normalized score
  int max_iter = 100;
  double divergence = 30.0;  // |beta_j| beyond this while still improving => separation
};

/// Weighted logistic regression fit. `beta` holds the intercept first.
struct LogisticFit {
  Eigen::VectorXd beta;
  bool converged = false;
  int iterations = 0;
  /// Euclidean norm of sum_i w_i (y_i - p_i) (1, x_i) / sum_i w_i at `beta`.
  double gradient_norm = 0.0;
};

/// Newton-Raphson (IRLS) with step halving on the weighted Bernoulli
/// log-likelihood. `x` excludes the intercept column, which is added here.
/// Throws ValidationError for bad shapes, weights or a rank-deficient design
/// and NumericError for separation or non-convergence. `start` optionally
/// replaces the zero starting point.
LogisticFit fit_weighted_logistic(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& y,
                                  std::span<const double> w,
                                  const LogisticOptions& opts = {},
                                  const Eigen::VectorXd* start = nullptr);

double inv_logit(double eta) noexcept;

/// logit^{-1}(beta . (1, x)).
double predict_prob(const LogisticFit& fit, std::span<const double> x);

}  // namespace sepeff
