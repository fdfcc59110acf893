#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sepeff/data.hpp"

namespace sepeff {

/// Outcome-model column layout:
///   [a] ++ [m_1..m_k] ++ [a*m_j for j > ell] ++ [c_1..c_p].
/// No product column exists for j <= ell: a structural-zero mediator is only
/// ever 1 when a=1, so a*m_j equals m_j there and the extra column would
/// duplicate the main effect.
struct DesignSpec {
  MediatorSchema schema;
  int p = 0;

  int n_columns() const { return 1 + schema.k + (schema.k - schema.ell) + p; }
  void fill_row(int a, std::span<const int> m, std::span<const double> c, std::span<double> out) const;
  double linear_predictor(const Eigen::VectorXd& theta, int a, std::span<const int> m,
                          std::span<const double> c) const;
  std::vector<std::string> column_names() const;

  static DesignSpec for_dataset(const Dataset& d) { return {d.schema(), d.p()}; }
};

struct CoxOptions {
  double tol = 1e-8;  // on the norm of the score divided by the total weight
  int max_iter = 100;
  double divergence = 25.0;
};

struct CoxFit {
  Eigen::VectorXd theta;
  double loglik = 0.0;  // weighted Breslow partial log-likelihood at theta
  bool converged = false;
  int iterations = 0;
  double score_norm = 0.0;  // ||score|| / sum(w)
  Eigen::MatrixXd information;  // observed information at theta
};

/// Right-continuous step function, 0 before the first knot.
struct StepFunction {
  std::vector<double> times;   // strictly increasing
  std::vector<double> values;  // nondecreasing, nonnegative
};

/// Largest knot value with knot <= t, or 0 when t precedes every knot.
double cumhaz_at(const StepFunction& s, double t);

/// A Cox regression problem with rows pre-sorted by time, so repeated fits
/// under different weight vectors (the bootstrap) skip the sort.
class CoxProblem {
 public:
  CoxProblem(Eigen::MatrixXd x, std::vector<double> time, std::vector<int> event);
  CoxProblem(const Dataset& d, const DesignSpec& spec);

  std::size_t size() const noexcept { return time_.size(); }
  Eigen::Index n_coef() const noexcept { return x_.cols(); }

  /// Newton-Raphson with step halving on the Breslow partial likelihood.
  /// `w` is indexed in the original (unsorted) row order. `start`, when
  /// given, replaces the zero starting point.
  CoxFit fit(std::span<const double> w, const CoxOptions& opts = {},
             const Eigen::VectorXd* start = nullptr) const;

  /// Breslow/Nelson-Aalen cumulative baseline hazard at `fit.theta`.
  StepFunction baseline(const CoxFit& fit, std::span<const double> w) const;

  /// Weighted partial log-likelihood, score and information at theta.
  double loglik(const Eigen::VectorXd& theta, std::span<const double> w,
                Eigen::VectorXd* score = nullptr, Eigen::MatrixXd* information = nullptr) const;

 private:
  void check_weights(std::span<const double> w) const;

  Eigen::MatrixXd x_;               // sorted rows, descending time
  std::vector<double> time_;        // sorted, descending
  std::vector<int> event_;
  std::vector<std::size_t> order_;  // sorted position -> original row
  std::vector<std::size_t> group_end_;  // end (exclusive) of each tie group
};

CoxFit fit_weighted_cox(const Dataset& d, const DesignSpec& spec, std::span<const double> w,
                        const CoxOptions& opts = {});
StepFunction breslow_baseline(const CoxFit& fit, const Dataset& d, const DesignSpec& spec,
                              std::span<const double> w);

}  // namespace sepeff
