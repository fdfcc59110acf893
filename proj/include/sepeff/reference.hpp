#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sepeff/bootstrap.hpp"
#include "sepeff/estimator.hpp"

// Single-threaded versions of the parallel kernels. They compute the same
// per-item values and reduce them in the same order, so their output must be
// bit-identical to the parallel kernels at any thread count.
namespace sepeff::reference {

std::vector<double> substitution_risks_serial(const Eigen::VectorXd& theta, const MediatorJointModel& med,
                                              const Dataset& d, int a, int a_star, std::span<const double> cumhaz,
                                              std::span<const double> w);

BootstrapResult bootstrap_effects_serial(const Dataset& d, double t, int R, std::uint64_t seed,
                                         const BootstrapOptions& opts = {});

}  // namespace sepeff::reference
