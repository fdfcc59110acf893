#include "sepeff/reference.hpp"

#include <algorithm>
#include <cmath>

#include "sepeff/error.hpp"
#include "sepeff/parallel.hpp"

namespace sepeff::reference {

std::vector<double> substitution_risks_serial(const Eigen::VectorXd& theta, const MediatorJointModel& med,
                                              const Dataset& d, int a, int a_star, std::span<const double> cumhaz,
                                              std::span<const double> w) {
  check_arms(a, a_star);
  const DesignSpec spec = DesignSpec::for_dataset(d);
  const std::size_t n = d.size();
  const std::size_t nm = std::size_t{1} << d.k();
  if (w.size() != n) throw ValidationError("counterfactual_estimator", "weight vector length does not match the data");
  std::vector<double> out;
  for (double lambda : cumhaz) {
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> probs = med.enumerate_joint(a, d[i].c);
      double r = 0.0;
      for (std::size_t idx = 0; idx < nm; ++idx) {
        if (probs[idx] <= 0.0) continue;
        const double hr = std::exp(spec.linear_predictor(theta, a_star, mediator_vector(idx, d.k()), d[i].c));
        r -= probs[idx] * std::expm1(-lambda * hr);
      }
      terms[i] = w[i] * r;
    }
    out.push_back(std::clamp(pairwise_sum(terms) / pairwise_sum(w), 0.0, 1.0));
  }
  return out;
}

BootstrapResult bootstrap_effects_serial(const Dataset& d, double t, int R, std::uint64_t seed,
                                         const BootstrapOptions& opts) {
  const int saved = num_threads();
  set_num_threads(1);
  try {
    const Pipeline pipeline(d);
    BootstrapResult out = detail::run_bootstrap(pipeline, t, R, seed, opts, false);
    set_num_threads(saved);
    return out;
  } catch (...) {
    set_num_threads(saved);
    throw;
  }
}

}  // namespace sepeff::reference
