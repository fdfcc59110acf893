#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sepeff/cox.hpp"
#include "sepeff/data.hpp"
#include "sepeff/mediator.hpp"

namespace sepeff {

/// Psi_{a,a*}(t) = sum_{m,c} Pr(Y<=t | m, A=a*, c) f(m | A=a, c) f(c):
/// `a` sets the mediator law (surgery arm), `a_star` the outcome model
/// (anesthesia arm). (0,1) is the risk under anesthesia without surgery.
struct CounterfactualRisk {
  int a = 0;
  int a_star = 0;
  double t = 0.0;
  double risk = 0.0;
};

struct EffectEstimates {
  double t = 0.0;
  double joint = 0.0;       // Psi11 / Psi00
  double anesthesia = 0.0;  // Psi01 / Psi00
  double surgery = 0.0;     // Psi11 / Psi01
};

struct CurveSet {
  std::vector<double> grid;
  std::vector<double> s00, s01, s11;
};

/// Throws ValidationError unless (a, a_star) is (0,0), (0,1) or (1,1).
void check_arms(int a, int a_star);

/// Weighted substitution risks at each cumulative-hazard level in `cumhaz`:
///   (sum w)^-1 sum_i w_i sum_m f(m | a, C_i) (1 - exp(-cumhaz * exp(lp(a*, m, C_i)))).
/// Rows are evaluated in parallel and summed in a fixed order.
std::vector<double> substitution_risks(const Eigen::VectorXd& theta, const MediatorJointModel& med,
                                       const Dataset& d, int a, int a_star,
                                       std::span<const double> cumhaz, std::span<const double> w);

CounterfactualRisk estimate_psi(const CoxFit& cox, const StepFunction& base, const MediatorJointModel& med,
                                const Dataset& d, int a, int a_star, double t, std::span<const double> w);

CurveSet survival_curves(const CoxFit& cox, const StepFunction& base, const MediatorJointModel& med,
                         const Dataset& d, std::span<const double> grid, std::span<const double> w);

EffectEstimates effect_ratios(const CounterfactualRisk& r00, const CounterfactualRisk& r01,
                              const CounterfactualRisk& r11);

/// Both empirical routes to Pr{Y(n=0,o=1) <= t} on uncensored data with no
/// covariates.
struct FrontDoorRoutes {
  double direct = 0.0;     // sum_m Pr(Y<=t | A=1, m) Pr(m | A=0)
  double frontdoor = 0.0;  // front-door value minus the A=0 back-door term, over Pr(A=1)
};

FrontDoorRoutes frontdoor_routes(const Dataset& d, double t);

/// Returns the direct route after checking |direct - frontdoor| <= 1e-10.
double frontdoor_psi01_empirical(const Dataset& d, double t);

/// Models for the extended graph with binary intermediate variables L.
/// The data set carries L as its last k_L covariates; `l_model` is a
/// MediatorJointModel for L given (a, c) with ell = 0 and p = p - k_L.
struct ExtendedModels {
  CoxFit cox;
  StepFunction base;
  MediatorJointModel med;
  MediatorJointModel l_model;
};

ExtendedModels fit_extended_models(const Dataset& d_ext, int k_l, std::span<const double> w);

/// sum_i w_i sum_l f(l | A=l_arm, C_i) sum_m f(m | A=0, C_i, l) Pr(Y<=t | A=1, m, C_i, l) / sum w.
double estimate_psi01_extended(const CoxFit& cox_l, const StepFunction& base_l, const MediatorJointModel& med_l,
                               const MediatorJointModel& l_model, const Dataset& d_ext, double t, int l_arm,
                               std::span<const double> w);

}  // namespace sepeff
