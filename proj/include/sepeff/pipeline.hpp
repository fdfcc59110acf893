#pragma once

#include <span>
#include <vector>

#include "sepeff/cox.hpp"
#include "sepeff/data.hpp"
#include "sepeff/estimator.hpp"
#include "sepeff/mediator.hpp"

namespace sepeff {

struct PipelineModels {
  CoxFit cox;
  StepFunction base;
  MediatorJointModel med;
};

/// Outcome model, baseline hazard, mediator model and the three risks for
/// one weight vector. Designs are built once at construction.
class Pipeline {
 public:
  explicit Pipeline(const Dataset& d);

  const Dataset& data() const noexcept { return d_; }

  /// `start` (typically the unit-weight fit) seeds every Newton solver.
  PipelineModels fit(std::span<const double> w, const PipelineModels* start = nullptr) const;
  EffectEstimates effects(const PipelineModels& models, double t, std::span<const double> w) const;
  EffectEstimates run(std::span<const double> w, double t, const PipelineModels* start = nullptr) const;

 private:
  const Dataset& d_;
  CoxProblem cox_;
  MediatorProblem med_;
};

/// Unit-weight point estimate.
EffectEstimates estimate_effects(const Dataset& d, double t);

}  // namespace sepeff
