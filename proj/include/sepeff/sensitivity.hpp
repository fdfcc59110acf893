#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sepeff/bootstrap.hpp"

namespace sepeff {

/// gamma: direct effect of surgery on the outcome; eta: effect of
/// anesthesia on the mediators. Both divide the identified ratio.
enum class SensitivityKind { gamma, eta };

const char* to_string(SensitivityKind kind) noexcept;
SensitivityKind parse_sensitivity_kind(const std::string& s);

struct SensitivityCurve {
  SensitivityKind kind = SensitivityKind::gamma;
  std::vector<double> grid;
  std::vector<double> adjusted;
  std::vector<Interval> ci;
};

/// Parameter values at which CI-lower, the point estimate and CI-upper reach 1.
struct CrossingPoints {
  double null_at_lower = 0.0;
  double null_at_point = 0.0;
  double null_at_upper = 0.0;
};

/// unadjusted / param.
double adjusted_effect(double unadjusted, double param);

/// The parameter solving x / param = 1 is x itself, so the triple comes back
/// as (lower, point, upper).
CrossingPoints crossing_points(double point, double lower, double upper);

/// Adjusts the anesthesia estimate and its percentile interval.
SensitivityCurve sensitivity_curve(const BootstrapResult& boot, SensitivityKind kind,
                                   std::span<const double> grid);
SensitivityCurve sensitivity_curve(double point, Interval ci, SensitivityKind kind,
                                   std::span<const double> grid);

/// `param,kind,estimate,lower,upper`
void write_curve_csv(const std::filesystem::path& path, const SensitivityCurve& curve);

/// Values lo, lo+step, ... up to hi (inclusive up to rounding), computed
/// as lo + i*step and rounded to 12 decimals so textual grids stay exact.
std::vector<double> make_grid(double lo, double hi, double step);

/// "lo:hi:step" or a comma-separated list of values.
std::vector<double> parse_grid(const std::string& text);

}  // namespace sepeff
