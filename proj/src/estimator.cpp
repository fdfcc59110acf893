#include "sepeff/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sepeff/error.hpp"
#include "sepeff/parallel.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "counterfactual_estimator";

double weight_total(std::span<const double> w, std::size_t n) {
  if (w.size() != n) throw ValidationError(kModule, "weight vector length does not match the data");
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(kModule, "weights must be finite and nonnegative");
  }
  const double total = pairwise_sum(w);
  if (!(total > 0.0)) throw ValidationError(kModule, "weights sum to zero");
  return total;
}

}  // namespace

void check_arms(int a, int a_star) {
  if ((a != 0 && a != 1) || (a_star != 0 && a_star != 1)) {
    throw ValidationError(kModule, "arms must be 0 or 1");
  }
  if (a == 1 && a_star == 0) {
    throw ValidationError(kModule,
                          "(a, a_star) = (1, 0) is not identified: surgery without anesthesia would need "
                          "Pr(Y | A=0, m) on mediator values with m_j = 1 for a structural-zero mediator, "
                          "where Pr(m | A=0) = 0");
  }
}

std::vector<double> substitution_risks(const Eigen::VectorXd& theta, const MediatorJointModel& med,
                                       const Dataset& d, int a, int a_star,
                                       std::span<const double> cumhaz, std::span<const double> w) {
  check_arms(a, a_star);
  const DesignSpec spec = DesignSpec::for_dataset(d);
  if (theta.size() != spec.n_columns()) throw ValidationError(kModule, "Cox fit does not match the dataset design");
  if (med.k() != d.k() || med.schema().ell != d.ell() || med.p() != d.p()) {
    throw ValidationError(kModule, "mediator model does not match the dataset schema");
  }
  if (d.k() > kEnumerationCap) throw ValidationError(kModule, "mediator count exceeds the enumeration cap");
  const double total = weight_total(w, d.size());
  const std::size_t n = d.size();
  const std::size_t g = cumhaz.size();
  const std::size_t nm = std::size_t{1} << d.k();

  std::vector<std::vector<int>> mvecs(nm);
  for (std::size_t idx = 0; idx < nm; ++idx) mvecs[idx] = mediator_vector(idx, d.k());

  // terms[col * n + i] = w_i * risk_i at cumhaz[col]
  std::vector<double> terms(n * g);
  parallel_for(n, [&](std::size_t i) {
    const SubjectRecord& rec = d[i];
    std::vector<double> probs(nm);
    med.enumerate_joint(a, rec.c, probs);
    std::vector<double> hr(nm);
    for (std::size_t idx = 0; idx < nm; ++idx) {
      hr[idx] = probs[idx] > 0.0 ? std::exp(spec.linear_predictor(theta, a_star, mvecs[idx], rec.c)) : 0.0;
    }
    for (std::size_t col = 0; col < g; ++col) {
      double r = 0.0;
      for (std::size_t idx = 0; idx < nm; ++idx) {
        if (probs[idx] > 0.0) r -= probs[idx] * std::expm1(-cumhaz[col] * hr[idx]);
      }
      terms[col * n + i] = w[i] * r;
    }
  });

  std::vector<double> out(g);
  for (std::size_t col = 0; col < g; ++col) {
    out[col] = pairwise_sum(std::span<const double>(terms.data() + col * n, n)) / total;
    out[col] = std::clamp(out[col], 0.0, 1.0);
  }
  return out;
}

CounterfactualRisk estimate_psi(const CoxFit& cox, const StepFunction& base, const MediatorJointModel& med,
                                const Dataset& d, int a, int a_star, double t, std::span<const double> w) {
  check_arms(a, a_star);
  if (!(t >= 0.0)) throw ValidationError(kModule, "t must be nonnegative");
  const double lambda = cumhaz_at(base, t);
  const double risk = substitution_risks(cox.theta, med, d, a, a_star, std::span<const double>(&lambda, 1), w)[0];
  return {a, a_star, t, risk};
}

CurveSet survival_curves(const CoxFit& cox, const StepFunction& base, const MediatorJointModel& med,
                         const Dataset& d, std::span<const double> grid, std::span<const double> w) {
  if (grid.empty()) throw ValidationError(kModule, "time grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) throw ValidationError(kModule, "time grid must be sorted");
  if (!(grid.front() >= 0.0)) throw ValidationError(kModule, "time grid must be nonnegative");
  std::vector<double> lambda(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) lambda[i] = cumhaz_at(base, grid[i]);

  CurveSet out;
  out.grid.assign(grid.begin(), grid.end());
  auto survival = [&](int a, int a_star) {
    std::vector<double> r = substitution_risks(cox.theta, med, d, a, a_star, lambda, w);
    for (double& v : r) v = 1.0 - v;
    return r;
  };
  out.s00 = survival(0, 0);
  out.s01 = survival(0, 1);
  out.s11 = survival(1, 1);
  return out;
}

EffectEstimates effect_ratios(const CounterfactualRisk& r00, const CounterfactualRisk& r01,
                              const CounterfactualRisk& r11) {
  if (r00.a != 0 || r00.a_star != 0 || r01.a != 0 || r01.a_star != 1 || r11.a != 1 || r11.a_star != 1) {
    throw ValidationError(kModule, "effect_ratios expects the (0,0), (0,1) and (1,1) risks in that order");
  }
  if (r00.t != r01.t || r00.t != r11.t) throw ValidationError(kModule, "risks evaluated at different times");
  if (!(r00.risk > 0.0) || !(r01.risk > 0.0)) throw NumericError(kModule, "zero denominator risk");
  EffectEstimates e;
  e.t = r00.t;
  e.anesthesia = r01.risk / r00.risk;
  e.surgery = r11.risk / r01.risk;
  e.joint = e.anesthesia * e.surgery;
  return e;
}

}  // namespace sepeff
