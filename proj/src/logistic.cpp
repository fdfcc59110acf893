#include "sepeff/logistic.hpp"

#include <cmath>
#include <string>

#include "sepeff/error.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "glm_logistic";
constexpr double kStepTol = 1e-4;

// y*eta - log(1 + e^eta), evaluated without overflow.
double bernoulli_loglik(double y, double eta) {
  if (eta > 0) return (y - 1.0) * eta - std::log1p(std::exp(-eta));
  return y * eta - std::log1p(std::exp(eta));
}

struct Evaluation {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
};

Evaluation evaluate(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                    const Eigen::VectorXd& beta, bool with_information) {
  const Eigen::VectorXd eta = z * beta;
  Eigen::VectorXd resid(z.rows()), curv(z.rows());
  double ll = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double p = inv_logit(eta[i]);
    ll += w[i] * bernoulli_loglik(y[i], eta[i]);
    resid[i] = w[i] * (y[i] - p);
    curv[i] = w[i] * p * (1.0 - p);
  }
  Evaluation ev;
  ev.loglik = ll;
  ev.score = z.transpose() * resid;
  if (with_information) ev.information = z.transpose() * curv.asDiagonal() * z;
  return ev;
}

}  // namespace

double inv_logit(double eta) noexcept {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double predict_prob(const LogisticFit& fit, std::span<const double> x) {
  if (static_cast<Eigen::Index>(x.size()) + 1 != fit.beta.size()) {
    throw ValidationError(kModule, "predict_prob: covariate row has " + std::to_string(x.size()) +
                                       " entries for " + std::to_string(fit.beta.size()) +
                                       " coefficients");
  }
  double eta = fit.beta[0];
  for (std::size_t j = 0; j < x.size(); ++j) eta += fit.beta[static_cast<Eigen::Index>(j) + 1] * x[j];
  return inv_logit(eta);
}

LogisticFit fit_weighted_logistic(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& y,
                                  std::span<const double> w, const LogisticOptions& opts,
                                  const Eigen::VectorXd* start) {
  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols() + 1;
  if (y.size() != n || static_cast<Eigen::Index>(w.size()) != n) {
    throw ValidationError(kModule, "design, response and weights disagree in length");
  }
  if (n < q) throw ValidationError(kModule, "fewer rows than coefficients");

  Eigen::VectorXd wv(n);
  double wsum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) throw ValidationError(kModule, "weights must be finite and nonnegative");
    if (y[i] != 0.0 && y[i] != 1.0) throw ValidationError(kModule, "response must be binary");
    wv[i] = w[i];
    wsum += w[i];
  }
  if (!(wsum > 0.0)) throw ValidationError(kModule, "weights sum to zero");

  Eigen::MatrixXd z(n, q);
  z.col(0).setOnes();
  z.rightCols(q - 1) = x;
  for (Eigen::Index j = 1; j < q; ++j) {
    if ((z.col(j).array().abs() * wv.array()).maxCoeff() == 0.0) {
      throw ValidationError(kModule, "design column " + std::to_string(j) + " is identically zero");
    }
  }
  {
    const Eigen::MatrixXd zw = wv.array().sqrt().matrix().asDiagonal() * z;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(zw);
    qr.setThreshold(1e-10);
    if (qr.rank() < q) throw ValidationError(kModule, "rank-deficient design");
  }

  LogisticFit fit;
  fit.beta = Eigen::VectorXd::Zero(q);
  if (start && start->size() == q && start->allFinite()) fit.beta = *start;
  Evaluation cur = evaluate(z, y, wv, fit.beta, true);
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    fit.gradient_norm = cur.score.norm() / wsum;
    fit.iterations = iter;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cur.information);
    const bool pd = ldlt.info() == Eigen::Success && ldlt.isPositive();
    const Eigen::VectorXd step = pd ? Eigen::VectorXd(ldlt.solve(cur.score)) : Eigen::VectorXd();
    // A vanishing score with a large Newton step means the likelihood is
    // still rising along a flat direction: separation, not convergence.
    if (fit.gradient_norm <= opts.tol && (!pd || step.cwiseAbs().maxCoeff() <= kStepTol)) {
      fit.converged = true;
      return fit;
    }
    if (!pd) throw NumericError(kModule, "information matrix not positive definite (separation?)");
    double scale = 1.0;
    bool improved = false;
    Evaluation next;
    Eigen::VectorXd trial;
    for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
      trial = fit.beta + scale * step;
      next = evaluate(z, y, wv, trial, false);
      if (std::isfinite(next.loglik) &&
          next.loglik >= cur.loglik - 1e-13 * (1.0 + std::abs(cur.loglik))) {
        improved = true;
        break;
      }
    }
    if (!improved) {
      throw NumericError(kModule, "step halving failed to improve the likelihood");
    }
    if (trial.cwiseAbs().maxCoeff() > opts.divergence && next.loglik > cur.loglik) {
      throw NumericError(kModule, "coefficients diverging (complete or quasi-complete separation)");
    }
    fit.beta = trial;
    cur = evaluate(z, y, wv, fit.beta, true);
  }
  fit.gradient_norm = cur.score.norm() / wsum;
  fit.iterations = opts.max_iter;
  if (fit.gradient_norm <= opts.tol) {
    fit.converged = true;
    return fit;
  }
  throw NumericError(kModule, "no convergence after " + std::to_string(opts.max_iter) +
                                  " iterations (gradient norm " + std::to_string(fit.gradient_norm) + ")");
}

}  // namespace sepeff
