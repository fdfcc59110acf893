#include "sepeff/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>

#include "sepeff/error.hpp"
#include "sepeff/textio.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "sensitivity";

}  // namespace

const char* to_string(SensitivityKind kind) noexcept {
  return kind == SensitivityKind::gamma ? "gamma" : "eta";
}

SensitivityKind parse_sensitivity_kind(const std::string& s) {
  if (s == "gamma") return SensitivityKind::gamma;
  if (s == "eta") return SensitivityKind::eta;
  throw ValidationError(kModule, "unknown sensitivity kind '" + s + "' (expected gamma or eta)");
}

double adjusted_effect(double unadjusted, double param) {
  if (!(unadjusted > 0.0) || !std::isfinite(unadjusted)) throw ValidationError(kModule, "unadjusted ratio must be positive");
  if (!(param > 0.0) || !std::isfinite(param)) throw ValidationError(kModule, "sensitivity parameter must be positive");
  return unadjusted / param;
}

CrossingPoints crossing_points(double point, double lower, double upper) {
  if (!(lower > 0.0) || !(lower <= upper) || !(point > 0.0)) {
    throw ValidationError(kModule, "crossing points need 0 < lower <= upper and a positive point estimate");
  }
  return {lower, point, upper};
}

SensitivityCurve sensitivity_curve(double point, Interval ci, SensitivityKind kind, std::span<const double> grid) {
  if (grid.empty()) throw ValidationError(kModule, "sensitivity grid is empty");
  SensitivityCurve out;
  out.kind = kind;
  for (double g : grid) {
    out.grid.push_back(g);
    out.adjusted.push_back(adjusted_effect(point, g));
    out.ci.push_back({adjusted_effect(ci.lower, g), adjusted_effect(ci.upper, g)});
  }
  return out;
}

SensitivityCurve sensitivity_curve(const BootstrapResult& boot, SensitivityKind kind, std::span<const double> grid) {
  return sensitivity_curve(boot.point.anesthesia, boot.anesthesia_ci, kind, grid);
}

void write_curve_csv(const std::filesystem::path& path, const SensitivityCurve& curve) {
  auto out = open_output(path, kModule);
  out << "param,kind,estimate,lower,upper\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out << format_double(curve.grid[i]) << ',' << to_string(curve.kind) << ',' << format_double(curve.adjusted[i])
        << ',' << format_double(curve.ci[i].lower) << ',' << format_double(curve.ci[i].upper) << '\n';
  }
  if (!out) throw IoError(kModule, "write failed for " + path.string());
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ValidationError(kModule, "grid needs lo <= hi and step > 0");
  }
  std::vector<double> out;
  for (long i = 0;; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    if (v > hi + 1e-9 * step) break;
    out.push_back(std::round(v * 1e12) / 1e12);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](std::string_view field) {
    double v = 0.0;
    if (!parse_double(field, v)) throw ValidationError(kModule, "bad grid value '" + std::string(field) + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string_view> parts;
    std::string_view rest = text;
    for (std::size_t pos; (pos = rest.find(':')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
      parts.push_back(rest.substr(0, pos));
    }
    parts.push_back(rest);
    if (parts.size() != 3) throw ValidationError(kModule, "grid must look like lo:hi:step");
    return make_grid(number(parts[0]), number(parts[1]), number(parts[2]));
  }
  std::vector<double> out;
  for (std::string_view f : split_commas(text)) out.push_back(number(f));
  if (!std::is_sorted(out.begin(), out.end())) throw ValidationError(kModule, "grid values must be sorted");
  return out;
}

}  // namespace sepeff
