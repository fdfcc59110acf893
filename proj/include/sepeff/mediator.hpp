#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sepeff/data.hpp"
#include "sepeff/logistic.hpp"

namespace sepeff {

/// Largest mediator count enumerate_joint accepts.
inline constexpr int kEnumerationCap = 20;

/// Factorized Pr(m | a, c) = prod_j Pr(m_j | m_1..m_{j-1}, a, c).
///
/// Regressors of factor j (0-based, intercept excluded):
///   j <  ell: c, m_0..m_{j-1}          (fit on exposed rows only)
///   j >= ell: a, c, a*m_0..a*m_{ell-1}, m_ell..m_{j-1}
/// For structural mediators a*m_i equals m_i on every row with positive
/// probability; the single product column is kept.
class MediatorJointModel {
 public:
  MediatorJointModel(MediatorSchema schema, int p, std::vector<LogisticFit> fits);

  const MediatorSchema& schema() const noexcept { return schema_; }
  int p() const noexcept { return p_; }
  int k() const noexcept { return schema_.k; }
  const std::vector<LogisticFit>& fits() const noexcept { return fits_; }

  static int n_regressors(const MediatorSchema& schema, int p, int j);
  static void regressors(const MediatorSchema& schema, int p, int j, int a, std::span<const int> m,
                         std::span<const double> c, std::span<double> out);

  /// Pr(M_j = 1 | earlier mediators, a, c). Structural factors under a=0
  /// return 0 without evaluating the model.
  double factor_prob(int j, int a, std::span<const int> m, std::span<const double> c) const;

  double joint_prob(std::span<const int> m, int a, std::span<const double> c) const;

  /// Probabilities of all 2^k vectors; index sum_j m_j 2^(k-1-j), so m_1 is
  /// the most significant bit.
  std::vector<double> enumerate_joint(int a, std::span<const double> c) const;
  void enumerate_joint(int a, std::span<const double> c, std::span<double> out) const;

 private:
  void check_args(int a, std::span<const double> c) const;

  MediatorSchema schema_;
  int p_;
  std::vector<LogisticFit> fits_;
};

double joint_prob(const MediatorJointModel& mdl, std::span<const int> m, int a, std::span<const double> c);
std::vector<double> enumerate_joint(const MediatorJointModel& mdl, int a, std::span<const double> c);

/// Mediator vector for index `idx` of enumerate_joint.
std::vector<int> mediator_vector(std::size_t idx, int k);

/// Factor designs built once so repeated fits (the bootstrap) only change
/// weights.
class MediatorProblem {
 public:
  explicit MediatorProblem(const Dataset& d);

  MediatorJointModel fit(std::span<const double> w, const LogisticOptions& opts = {},
                         const MediatorJointModel* start = nullptr) const;

 private:
  struct Factor {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::size_t> rows;  // dataset rows used by this factor
  };

  MediatorSchema schema_;
  int p_;
  std::size_t n_;
  std::vector<Factor> factors_;
};

/// Throws ValidationError when a mediator is constant within its fitting
/// subsample; GLM errors propagate.
MediatorJointModel fit_mediator_model(const Dataset& d, std::span<const double> w,
                                      const LogisticOptions& opts = {});

}  // namespace sepeff
