#include "sepeff/cox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sepeff/error.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "cox_survival";
constexpr double kStepTol = 1e-4;

}  // namespace

void DesignSpec::fill_row(int a, std::span<const int> m, std::span<const double> c,
                          std::span<double> out) const {
  if (static_cast<int>(m.size()) != schema.k || static_cast<int>(c.size()) != p ||
      static_cast<int>(out.size()) != n_columns()) {
    throw ValidationError(kModule, "design row dimension mismatch");
  }
  std::size_t col = 0;
  out[col++] = a;
  for (int j = 0; j < schema.k; ++j) out[col++] = m[j];
  for (int j = schema.ell; j < schema.k; ++j) out[col++] = a * m[j];
  for (int j = 0; j < p; ++j) out[col++] = c[j];
}

double DesignSpec::linear_predictor(const Eigen::VectorXd& theta, int a, std::span<const int> m,
                                    std::span<const double> c) const {
  if (theta.size() != n_columns() || static_cast<int>(m.size()) != schema.k ||
      static_cast<int>(c.size()) != p) {
    throw ValidationError(kModule, "linear predictor dimension mismatch");
  }
  Eigen::Index col = 0;
  double lp = theta[col++] * a;
  for (int j = 0; j < schema.k; ++j) lp += theta[col++] * m[j];
  for (int j = schema.ell; j < schema.k; ++j) lp += theta[col++] * (a * m[j]);
  for (int j = 0; j < p; ++j) lp += theta[col++] * c[j];
  return lp;
}

std::vector<std::string> DesignSpec::column_names() const {
  std::vector<std::string> out{"a"};
  auto name = [&](int j) {
    return j < static_cast<int>(schema.names.size()) ? schema.names[j] : "m_" + std::to_string(j + 1);
  };
  for (int j = 0; j < schema.k; ++j) out.push_back(name(j));
  for (int j = schema.ell; j < schema.k; ++j) out.push_back("a*" + name(j));
  for (int j = 0; j < p; ++j) out.push_back("c_" + std::to_string(j + 1));
  return out;
}

double cumhaz_at(const StepFunction& s, double t) {
  auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
  if (it == s.times.begin()) return 0.0;
  return s.values[static_cast<std::size_t>(it - s.times.begin()) - 1];
}

CoxProblem::CoxProblem(Eigen::MatrixXd x, std::vector<double> time, std::vector<int> event) {
  const std::size_t n = time.size();
  if (static_cast<std::size_t>(x.rows()) != n || event.size() != n) {
    throw ValidationError(kModule, "design, times and events disagree in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(time[i] > 0.0) || !std::isfinite(time[i])) throw ValidationError(kModule, "times must be positive and finite");
    if (event[i] != 0 && event[i] != 1) throw ValidationError(kModule, "event flags must be 0 or 1");
  }
  if (!x.allFinite()) throw ValidationError(kModule, "design contains non-finite values");

  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t i, std::size_t j) { return time[i] > time[j]; });
  x_.resize(x.rows(), x.cols());
  time_.resize(n);
  event_.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    x_.row(static_cast<Eigen::Index>(s)) = x.row(static_cast<Eigen::Index>(order_[s]));
    time_[s] = time[order_[s]];
    event_[s] = event[order_[s]];
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (s + 1 == n || time_[s + 1] != time_[s]) group_end_.push_back(s + 1);
  }
}

namespace {

Eigen::MatrixXd design_matrix(const Dataset& d, const DesignSpec& spec) {
  if (spec.schema.k != d.k() || spec.schema.ell != d.ell() || spec.p != d.p()) {
    throw ValidationError(kModule, "design spec does not match the dataset schema");
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d.size()), spec.n_columns());
  std::vector<double> row(static_cast<std::size_t>(spec.n_columns()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    spec.fill_row(d[i].a, d[i].m, d[i].c, row);
    for (std::size_t j = 0; j < row.size(); ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return x;
}

std::vector<double> times_of(const Dataset& d) {
  std::vector<double> t(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) t[i] = d[i].time;
  return t;
}

std::vector<int> events_of(const Dataset& d) {
  std::vector<int> e(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) e[i] = d[i].event;
  return e;
}

}  // namespace

CoxProblem::CoxProblem(const Dataset& d, const DesignSpec& spec)
    : CoxProblem(design_matrix(d, spec), times_of(d), events_of(d)) {}

void CoxProblem::check_weights(std::span<const double> w) const {
  if (w.size() != size()) throw ValidationError(kModule, "weight vector length does not match the data");
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(kModule, "weights must be finite and nonnegative");
  }
}

double CoxProblem::loglik(const Eigen::VectorXd& theta, std::span<const double> w,
                          Eigen::VectorXd* score, Eigen::MatrixXd* information) const {
  const Eigen::Index q = x_.cols();
  const Eigen::VectorXd eta = x_ * theta;
  // Shift by the largest linear predictor so exp never overflows; the shift
  // cancels in every ratio below and is added back to the log terms.
  const double shift = eta.size() > 0 ? eta.maxCoeff() : 0.0;

  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(q);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(q, q);
  if (score) score->setZero(q);
  if (information) information->setZero(q, q);
  double ll = 0.0;

  Eigen::VectorXd xw(q), mean(q);
  std::size_t begin = 0;
  for (std::size_t end : group_end_) {
    double dw = 0.0;
    xw.setZero();
    for (std::size_t s = begin; s < end; ++s) {
      const double wi = w[order_[s]];
      if (wi == 0.0) continue;
      const auto row = x_.row(static_cast<Eigen::Index>(s));
      const double r = wi * std::exp(eta[static_cast<Eigen::Index>(s)] - shift);
      s0 += r;
      s1.noalias() += r * row.transpose();
      if (information) s2.noalias() += r * row.transpose() * row;
      if (event_[s]) {
        dw += wi;
        ll += wi * eta[static_cast<Eigen::Index>(s)];
        xw.noalias() += wi * row.transpose();
      }
    }
    if (dw > 0.0) {
      ll -= dw * (std::log(s0) + shift);
      mean = s1 / s0;
      if (score) score->noalias() += xw - dw * mean;
      if (information) information->noalias() += dw * (s2 / s0 - mean * mean.transpose());
    }
    begin = end;
  }
  return ll;
}

CoxFit CoxProblem::fit(std::span<const double> w, const CoxOptions& opts,
                       const Eigen::VectorXd* start) const {
  check_weights(w);
  const Eigen::Index q = x_.cols();
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(wsum > 0.0)) throw ValidationError(kModule, "weights sum to zero");

  int distinct_event_times = 0;
  {
    std::size_t begin = 0;
    for (std::size_t end : group_end_) {
      for (std::size_t s = begin; s < end; ++s) {
        if (event_[s] && w[order_[s]] > 0.0) {
          ++distinct_event_times;
          break;
        }
      }
      begin = end;
    }
  }
  if (distinct_event_times < 2) throw ValidationError(kModule, "fewer than two distinct event times");

  if (q > 0) {
    // Collinearity check on the weighted, column-centered design. Centering
    // removes the constant direction, which the partial likelihood cannot see.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(q);
    for (std::size_t s = 0; s < size(); ++s) mean += w[order_[s]] * x_.row(static_cast<Eigen::Index>(s)).transpose();
    mean /= wsum;
    Eigen::MatrixXd z(x_.rows(), q);
    for (Eigen::Index s = 0; s < x_.rows(); ++s) {
      z.row(s) = std::sqrt(w[order_[static_cast<std::size_t>(s)]]) * (x_.row(s) - mean.transpose());
    }
    Eigen::VectorXd scale = z.colwise().norm();
    for (Eigen::Index j = 0; j < q; ++j) {
      if (scale[j] == 0.0) {
        throw ValidationError(kModule, "collinear design: column " + std::to_string(j + 1) + " is constant");
      }
      z.col(j) /= scale[j];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
    qr.setThreshold(1e-10);
    if (qr.rank() < q) throw ValidationError(kModule, "collinear design");
  }

  CoxFit out;
  out.theta = Eigen::VectorXd::Zero(q);
  if (start && start->size() == q && start->allFinite()) out.theta = *start;
  Eigen::VectorXd score;
  Eigen::MatrixXd info;
  double ll = loglik(out.theta, w, &score, &info);

  for (int iter = 0;; ++iter) {
    out.iterations = iter;
    out.score_norm = score.norm() / wsum;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) step = ldlt.solve(score);
    // Under a monotone likelihood the score vanishes while Newton keeps
    // taking unit-sized steps; only a small step counts as converged.
    if (out.score_norm <= opts.tol && (q == 0 || step.size() != q || step.cwiseAbs().maxCoeff() <= kStepTol)) {
      out.converged = true;
      break;
    }
    if (iter >= opts.max_iter) break;

    if (step.size() != q || !step.allFinite()) step = score / wsum;

    bool accepted = false;
    Eigen::VectorXd next;
    double next_ll = ll;
    for (int h = 0; h < 40; ++h) {
      next = out.theta + step;
      next_ll = loglik(next, w);
      if (std::isfinite(next_ll) && next_ll >= ll - 1e-13 * (1.0 + std::abs(ll))) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double gain = next_ll - ll;
    out.theta = next;
    ll = loglik(out.theta, w, &score, &info);
    if (out.theta.cwiseAbs().maxCoeff() > opts.divergence && gain > 0.0) {
      throw NumericError(kModule, "monotone likelihood: coefficient diverging (risk-set separation)");
    }
  }
  out.loglik = ll;
  out.information = info;
  if (!out.converged) {
    throw NumericError(kModule, "Newton iterations did not converge (score norm " +
                                    std::to_string(out.score_norm) + ")");
  }
  return out;
}

StepFunction CoxProblem::baseline(const CoxFit& fit, std::span<const double> w) const {
  check_weights(w);
  if (fit.theta.size() != x_.cols()) throw ValidationError(kModule, "fit does not match the design");
  const Eigen::VectorXd eta = x_ * fit.theta;

  std::vector<double> knot_times, increments;
  double s0 = 0.0;
  std::size_t begin = 0;
  for (std::size_t end : group_end_) {
    double dw = 0.0;
    bool has_event = false;
    for (std::size_t s = begin; s < end; ++s) {
      const double wi = w[order_[s]];
      s0 += wi * std::exp(eta[static_cast<Eigen::Index>(s)]);
      if (event_[s]) {
        has_event = true;
        dw += wi;
      }
    }
    if (has_event) {
      if (!(s0 > 0.0)) {
        if (dw > 0.0) throw NumericError(kModule, "empty risk set at an event time");
      } else {
        knot_times.push_back(time_[begin]);
        increments.push_back(dw / s0);
      }
    }
    begin = end;
  }

  StepFunction out;
  out.times.assign(knot_times.rbegin(), knot_times.rend());
  out.values.resize(out.times.size());
  double cum = 0.0;
  for (std::size_t j = 0; j < out.times.size(); ++j) {
    cum += increments[increments.size() - 1 - j];
    out.values[j] = cum;
  }
  return out;
}

CoxFit fit_weighted_cox(const Dataset& d, const DesignSpec& spec, std::span<const double> w,
                        const CoxOptions& opts) {
  return CoxProblem(d, spec).fit(w, opts);
}

StepFunction breslow_baseline(const CoxFit& fit, const Dataset& d, const DesignSpec& spec,
                              std::span<const double> w) {
  return CoxProblem(d, spec).baseline(fit, w);
}

}  // namespace sepeff
