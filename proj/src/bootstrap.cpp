#include "sepeff/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sepeff/error.hpp"
#include "sepeff/textio.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "bootstrap";

Interval percentile_interval(const std::vector<ReplicateRow>& rows, double ReplicateRow::*field, double level) {
  std::vector<double> xs;
  for (const auto& r : rows) {
    if (r.converged) xs.push_back(r.*field);
  }
  const double tail = (1.0 - level) / 2.0;
  return {percentile(xs, tail), percentile(xs, 1.0 - tail)};
}

}  // namespace

std::vector<double> draw_weights(std::size_t n, Engine& rng) {
  if (n == 0) throw ValidationError(kModule, "draw_weights needs n >= 1");
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(n);
  for (double& v : w) {
    do {
      v = expo(rng);
    } while (!(v > 0.0));
  }
  const double total = pairwise_sum(w);
  const double dn = static_cast<double>(n);
  for (double& v : w) v = v / total * dn;
  return w;
}

double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) throw ValidationError(kModule, "percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError(kModule, "quantile level must lie in [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= xs.size()) return xs.back();
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[lo + 1] - xs[lo]);
}

namespace detail {

BootstrapResult run_bootstrap(const Pipeline& pipeline, double t, int R, std::uint64_t seed,
                              const BootstrapOptions& opts, bool parallel) {
  if (R < 2) throw ValidationError(kModule, "bootstrap needs R >= 2");
  if (!(opts.level > 0.0 && opts.level < 1.0)) throw ValidationError(kModule, "level must lie in (0, 1)");
  const std::size_t n = pipeline.data().size();
  const std::vector<double> unit(n, 1.0);
  const PipelineModels start = pipeline.fit(unit, nullptr);

  BootstrapResult out;
  out.point = pipeline.effects(start, t, unit);
  out.seed = seed;
  out.R = R;
  out.level = opts.level;
  out.replicates.resize(static_cast<std::size_t>(R));

  auto replicate = [&](std::size_t r) {
    ReplicateRow& row = out.replicates[r];
    row.rep = static_cast<int>(r);
    Engine rng = make_engine(seed, r);
    const std::vector<double> w = draw_weights(n, rng);
    try {
      const EffectEstimates e = pipeline.run(w, t, &start);
      row.joint = e.joint;
      row.anesthesia = e.anesthesia;
      row.surgery = e.surgery;
      row.converged = true;
    } catch (const Error& err) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.joint = row.anesthesia = row.surgery = nan;
      row.converged = false;
      row.error = std::string(err.module()) + ": " + err.what();
    }
  };
  if (parallel) {
    parallel_for(static_cast<std::size_t>(R), replicate);
  } else {
    for (std::size_t r = 0; r < static_cast<std::size_t>(R); ++r) replicate(r);
  }

  for (const auto& row : out.replicates) out.failed += row.converged ? 0 : 1;
  if (out.failed > opts.max_failure_fraction * R || out.failed > R - 2) {
    std::string first;
    for (const auto& row : out.replicates) {
      if (!row.converged) {
        first = "replicate " + std::to_string(row.rep) + ": " + row.error;
        break;
      }
    }
    throw NumericError(kModule, std::to_string(out.failed) + " of " + std::to_string(R) +
                                    " replicates failed (first: " + first + ")");
  }
  out.joint_ci = percentile_interval(out.replicates, &ReplicateRow::joint, opts.level);
  out.anesthesia_ci = percentile_interval(out.replicates, &ReplicateRow::anesthesia, opts.level);
  out.surgery_ci = percentile_interval(out.replicates, &ReplicateRow::surgery, opts.level);
  return out;
}

}  // namespace detail

BootstrapResult bootstrap_effects(const Pipeline& pipeline, double t, int R, std::uint64_t seed,
                                  const BootstrapOptions& opts) {
  return detail::run_bootstrap(pipeline, t, R, seed, opts, true);
}

BootstrapResult bootstrap_effects(const Dataset& d, double t, int R, std::uint64_t seed,
                                  const BootstrapOptions& opts) {
  const Pipeline pipeline(d);
  return bootstrap_effects(pipeline, t, R, seed, opts);
}

void write_replicates_csv(const std::filesystem::path& path, const BootstrapResult& b) {
  auto out = open_output(path, kModule);
  out << "rep,joint,anesthesia,surgery,converged\n";
  for (const auto& r : b.replicates) {
    if (r.converged) {
      out << r.rep << ',' << format_double(r.joint) << ',' << format_double(r.anesthesia) << ','
          << format_double(r.surgery) << ",1\n";
    } else {
      out << r.rep << ",,,,0\n";
    }
  }
  if (!out) throw IoError(kModule, "write failed for " + path.string());
}

}  // namespace sepeff
