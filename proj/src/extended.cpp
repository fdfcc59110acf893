#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sepeff/error.hpp"
#include "sepeff/estimator.hpp"
#include "sepeff/parallel.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "counterfactual_estimator";

}  // namespace

ExtendedModels fit_extended_models(const Dataset& d_ext, int k_l, std::span<const double> w) {
  if (k_l < 0 || k_l > d_ext.p()) throw ValidationError(kModule, "k_L must lie in [0, p]");
  const int p = d_ext.p() - k_l;
  std::vector<SubjectRecord> l_rows;
  l_rows.reserve(d_ext.size());
  for (std::size_t i = 0; i < d_ext.size(); ++i) {
    const SubjectRecord& r = d_ext[i];
    SubjectRecord lr;
    lr.c.assign(r.c.begin(), r.c.begin() + p);
    lr.a = r.a;
    for (int j = 0; j < k_l; ++j) {
      const double v = r.c[static_cast<std::size_t>(p + j)];
      if (v != 0.0 && v != 1.0) throw ValidationError(kModule, "L columns must be binary (row " + std::to_string(i) + ")");
      lr.m.push_back(static_cast<int>(v));
    }
    lr.time = r.time;
    lr.event = r.event;
    l_rows.push_back(std::move(lr));
  }
  const Dataset l_data(MediatorSchema::unnamed(k_l, 0), p, std::move(l_rows));

  const DesignSpec spec = DesignSpec::for_dataset(d_ext);
  const CoxProblem cox(d_ext, spec);
  CoxFit fit = cox.fit(w);
  StepFunction base = cox.baseline(fit, w);
  return ExtendedModels{std::move(fit), std::move(base), fit_mediator_model(d_ext, w), fit_mediator_model(l_data, w)};
}

double estimate_psi01_extended(const CoxFit& cox_l, const StepFunction& base_l, const MediatorJointModel& med_l,
                               const MediatorJointModel& l_model, const Dataset& d_ext, double t, int l_arm,
                               std::span<const double> w) {
  if (l_arm != 0 && l_arm != 1) throw ValidationError(kModule, "l_arm must be 0 or 1");
  if (!(t >= 0.0)) throw ValidationError(kModule, "t must be nonnegative");
  const int k_l = l_model.k();
  const int p = d_ext.p() - k_l;
  if (l_model.p() != p || l_model.schema().ell != 0) {
    throw ValidationError(kModule, "L model must have ell = 0 and the baseline covariates as regressors");
  }
  if (d_ext.k() + k_l > kEnumerationCap) throw ValidationError(kModule, "k + k_L exceeds the enumeration cap");
  const DesignSpec spec = DesignSpec::for_dataset(d_ext);
  if (cox_l.theta.size() != spec.n_columns() || med_l.p() != d_ext.p() || med_l.k() != d_ext.k()) {
    throw ValidationError(kModule, "models do not match the extended dataset");
  }
  if (w.size() != d_ext.size()) throw ValidationError(kModule, "weight vector length does not match the data");
  const double total = pairwise_sum(w);
  if (!(total > 0.0)) throw ValidationError(kModule, "weights sum to zero");

  const double lambda = cumhaz_at(base_l, t);
  const std::size_t nl = std::size_t{1} << k_l;
  const std::size_t nm = std::size_t{1} << d_ext.k();
  std::vector<std::vector<int>> mvecs(nm);
  for (std::size_t idx = 0; idx < nm; ++idx) mvecs[idx] = mediator_vector(idx, d_ext.k());

  std::vector<double> terms(d_ext.size());
  parallel_for(d_ext.size(), [&](std::size_t i) {
    const SubjectRecord& rec = d_ext[i];
    const std::span<const double> c0(rec.c.data(), static_cast<std::size_t>(p));
    const std::vector<double> pl = l_model.enumerate_joint(l_arm, c0);
    std::vector<double> cl(rec.c.begin(), rec.c.end());
    std::vector<double> pm(nm);
    double r = 0.0;
    for (std::size_t li = 0; li < nl; ++li) {
      if (pl[li] == 0.0) continue;
      const std::vector<int> l = mediator_vector(li, k_l);
      for (int j = 0; j < k_l; ++j) cl[static_cast<std::size_t>(p + j)] = l[static_cast<std::size_t>(j)];
      med_l.enumerate_joint(0, cl, pm);
      double inner = 0.0;
      for (std::size_t idx = 0; idx < nm; ++idx) {
        if (pm[idx] == 0.0) continue;
        const double hr = std::exp(spec.linear_predictor(cox_l.theta, 1, mvecs[idx], cl));
        inner -= pm[idx] * std::expm1(-lambda * hr);
      }
      r += pl[li] * inner;
    }
    terms[i] = w[i] * r;
  });
  return std::clamp(pairwise_sum(terms) / total, 0.0, 1.0);
}

}  // namespace sepeff
