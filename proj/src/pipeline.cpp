#include "sepeff/pipeline.hpp"

namespace sepeff {

Pipeline::Pipeline(const Dataset& d) : d_(d), cox_(d, DesignSpec::for_dataset(d)), med_(d) {}

PipelineModels Pipeline::fit(std::span<const double> w, const PipelineModels* start) const {
  CoxFit cox = cox_.fit(w, {}, start ? &start->cox.theta : nullptr);
  StepFunction base = cox_.baseline(cox, w);
  MediatorJointModel med = med_.fit(w, {}, start ? &start->med : nullptr);
  return PipelineModels{std::move(cox), std::move(base), std::move(med)};
}

EffectEstimates Pipeline::effects(const PipelineModels& models, double t, std::span<const double> w) const {
  const CounterfactualRisk r00 = estimate_psi(models.cox, models.base, models.med, d_, 0, 0, t, w);
  const CounterfactualRisk r01 = estimate_psi(models.cox, models.base, models.med, d_, 0, 1, t, w);
  const CounterfactualRisk r11 = estimate_psi(models.cox, models.base, models.med, d_, 1, 1, t, w);
  return effect_ratios(r00, r01, r11);
}

EffectEstimates Pipeline::run(std::span<const double> w, double t, const PipelineModels* start) const {
  return effects(fit(w, start), t, w);
}

EffectEstimates estimate_effects(const Dataset& d, double t) {
  const std::vector<double> w(d.size(), 1.0);
  return Pipeline(d).run(w, t);
}

}  // namespace sepeff
