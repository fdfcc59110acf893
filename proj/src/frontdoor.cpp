#include <cmath>
#include <string>
#include <vector>

#include "sepeff/error.hpp"
#include "sepeff/estimator.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "counterfactual_estimator";

std::size_t mediator_index(const std::vector<int>& m) {
  std::size_t idx = 0;
  for (int v : m) idx = (idx << 1) | static_cast<std::size_t>(v);
  return idx;
}

}  // namespace

FrontDoorRoutes frontdoor_routes(const Dataset& d, double t) {
  if (d.p() != 0) throw ValidationError(kModule, "front-door check requires p = 0");
  if (d.k() > kEnumerationCap) throw ValidationError(kModule, "mediator count exceeds the enumeration cap");
  if (d.size() == 0) throw ValidationError(kModule, "empty dataset");
  const std::size_t nm = std::size_t{1} << d.k();

  // Frequency tables: count[a][m] and cases[a][m] = #(time <= t).
  std::vector<double> count[2] = {std::vector<double>(nm, 0.0), std::vector<double>(nm, 0.0)};
  std::vector<double> cases[2] = {std::vector<double>(nm, 0.0), std::vector<double>(nm, 0.0)};
  double n_arm[2] = {0.0, 0.0};
  double cases_arm[2] = {0.0, 0.0};
  for (const SubjectRecord& r : d.records()) {
    if (r.event != 1) throw ValidationError(kModule, "front-door check requires uncensored data");
    if (r.a != 0 && r.a != 1) throw ValidationError(kModule, "exposure must be 0 or 1");
    const std::size_t idx = mediator_index(r.m);
    const double y = r.time <= t ? 1.0 : 0.0;
    count[r.a][idx] += 1.0;
    cases[r.a][idx] += y;
    n_arm[r.a] += 1.0;
    cases_arm[r.a] += y;
  }
  if (n_arm[0] == 0.0 || n_arm[1] == 0.0) throw ValidationError(kModule, "both exposure levels must be present");

  const double n = n_arm[0] + n_arm[1];
  const double pr_a[2] = {n_arm[0] / n, n_arm[1] / n};

  FrontDoorRoutes out;
  double fd = 0.0;
  for (std::size_t idx = 0; idx < nm; ++idx) {
    if (count[0][idx] == 0.0) continue;
    if (count[1][idx] == 0.0) {
      throw ValidationError(kModule, "empty cell: no exposed subjects with mediator index " + std::to_string(idx) +
                                         ", which has positive probability under A=0");
    }
    const double pm0 = count[0][idx] / n_arm[0];
    const double y1 = cases[1][idx] / count[1][idx];
    const double y0 = cases[0][idx] / count[0][idx];
    out.direct += y1 * pm0;
    fd += pm0 * (y1 * pr_a[1] + y0 * pr_a[0]);
  }
  out.frontdoor = (fd - cases_arm[0] / n_arm[0] * pr_a[0]) / pr_a[1];
  return out;
}

double frontdoor_psi01_empirical(const Dataset& d, double t) {
  const FrontDoorRoutes r = frontdoor_routes(d, t);
  if (!(std::abs(r.direct - r.frontdoor) <= 1e-10)) {
    throw NumericError(kModule, "front-door identity violated: |direct - frontdoor| = " +
                                    std::to_string(std::abs(r.direct - r.frontdoor)));
  }
  return r.direct;
}

}  // namespace sepeff
