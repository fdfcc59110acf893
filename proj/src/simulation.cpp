#include "sepeff/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sepeff/error.hpp"
#include "sepeff/logistic.hpp"
#include "sepeff/parallel.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "simulation";

struct Draw {
  std::array<double, 4> c{};
  double sum = 0.0;
  double a_u = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double e = 0.0;  // -log U
  double dropout = 0.0;
};

double open_uniform(Engine& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = 0.0;
  do {
    u = unif(rng);
  } while (!(u > 0.0));
  return u;
}

Draw draw_subject(const DgpConfig& cfg, Engine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> dropout(cfg.dropout_rate);
  Draw d;
  for (double& c : d.c) {
    c = normal(rng);
    d.sum += c;
  }
  d.a_u = open_uniform(rng);
  d.v1 = open_uniform(rng);
  d.v2 = open_uniform(rng);
  d.e = -std::log(open_uniform(rng));
  d.dropout = dropout(rng);
  return d;
}

int mediator1(const DgpConfig& cfg, const Draw& d, int n, int o) {
  if (n == 0) return 0;
  return d.v1 < inv_logit(cfg.m1_intercept + d.sum + cfg.m1_n * n + cfg.xi * o) ? 1 : 0;
}

int mediator2(const DgpConfig& cfg, const Draw& d, int n, int o) {
  return d.v2 < inv_logit(cfg.m2_intercept + d.sum + cfg.m2_n * n + cfg.tau_value() * o) ? 1 : 0;
}

double linear_predictor(const DgpConfig& cfg, double sum, int m1, int m2, int n, int o) {
  return cfg.y_cov * sum + cfg.y_m1 * m1 + cfg.y_m2 * m2 + cfg.y_o * o + cfg.zeta * n;
}

double outcome_time(const DgpConfig& cfg, const Draw& d, double lp) {
  return std::pow(cfg.scale * d.e / std::exp(lp), cfg.shape);
}

// Outcome under (n, o) with mediators taken from arm (mn, mo).
double outcome(const DgpConfig& cfg, const Draw& d, int n, int o, int mn, int mo) {
  return outcome_time(cfg, d, linear_predictor(cfg, d.sum, mediator1(cfg, d, mn, mo), mediator2(cfg, d, mn, mo), n, o));
}

}  // namespace

void DgpConfig::check() const {
  if (n < 1) throw ValidationError(kModule, "n must be at least 1");
  if (!(dropout_rate > 0.0) || !(admin_cutoff > 0.0) || !(shape > 0.0) || !(scale > 0.0)) {
    throw ValidationError(kModule, "dropout rate, cutoff, shape and scale must be positive");
  }
}

double outcome_cdf(const DgpConfig& cfg, double t, double lp) {
  if (!(t > 0.0)) return 0.0;
  return -std::expm1(-std::pow(t, 1.0 / cfg.shape) * std::exp(lp) / cfg.scale);
}

SimulatedData generate_dataset(const DgpConfig& cfg) {
  cfg.check();
  Engine rng = make_engine(cfg.seed, 0);
  std::vector<SubjectRecord> records;
  std::vector<LatentSubject> latent;
  records.reserve(cfg.n);
  latent.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const Draw d = draw_subject(cfg, rng);
    LatentSubject ls;
    for (int n = 0; n < 2; ++n) {
      for (int o = 0; o < 2; ++o) {
        ls.m1[n][o] = mediator1(cfg, d, n, o);
        ls.m2[n][o] = mediator2(cfg, d, n, o);
        ls.y[n][o] = outcome_time(cfg, d, linear_predictor(cfg, d.sum, ls.m1[n][o], ls.m2[n][o], n, o));
      }
    }
    ls.dropout = d.dropout;
    SubjectRecord r;
    r.c.assign(d.c.begin(), d.c.end());
    r.a = d.a_u < inv_logit(cfg.a_intercept + cfg.a_cov * d.sum) ? 1 : 0;
    r.m = {ls.m1[r.a][r.a], ls.m2[r.a][r.a]};
    const double y = ls.y[r.a][r.a];
    const double censor = std::min(d.dropout, cfg.admin_cutoff);
    r.event = y <= censor ? 1 : 0;
    r.time = std::min(y, censor);
    if (!(r.time > 0.0)) r.time = std::numeric_limits<double>::min();
    records.push_back(std::move(r));
    latent.push_back(ls);
  }
  return SimulatedData{Dataset(MediatorSchema{2, 1, {"m_1", "m_2"}}, 4, std::move(records)), std::move(latent)};
}

TrueEffects oracle_truths(const DgpConfig& cfg, double t, std::size_t mc_n) {
  cfg.check();
  if (mc_n < 2) throw ValidationError(kModule, "mc_n must be at least 2");
  if (!(t > 0.0)) throw ValidationError(kModule, "t must be positive");

  // Indicators per draw: 0 Y(0,0), 1 Y(0,1), 2 Y(1,1), 3 Y(1,1,M(0,0)), 4 Y(0,1,M(0,0)).
  constexpr int kInd = 5;
  constexpr std::size_t kChunk = 1 << 16;
  const std::size_t chunks = (mc_n + kChunk - 1) / kChunk;
  std::vector<std::array<double, kInd * kInd>> cross(chunks);
  parallel_for(chunks, [&](std::size_t ch) {
    Engine rng = make_engine(cfg.seed ^ 0x6f7261636c65ULL, ch);
    auto& acc = cross[ch];
    acc.fill(0.0);
    const std::size_t end = std::min(mc_n, (ch + 1) * kChunk);
    for (std::size_t i = ch * kChunk; i < end; ++i) {
      const Draw d = draw_subject(cfg, rng);
      const double ind[kInd] = {
          outcome(cfg, d, 0, 0, 0, 0) <= t ? 1.0 : 0.0, outcome(cfg, d, 0, 1, 0, 1) <= t ? 1.0 : 0.0,
          outcome(cfg, d, 1, 1, 1, 1) <= t ? 1.0 : 0.0, outcome(cfg, d, 1, 1, 0, 0) <= t ? 1.0 : 0.0,
          outcome(cfg, d, 0, 1, 0, 0) <= t ? 1.0 : 0.0};
      for (int a = 0; a < kInd; ++a) {
        if (ind[a] == 0.0) continue;
        for (int b = 0; b < kInd; ++b) acc[a * kInd + b] += ind[b];
      }
    }
  });
  std::array<double, kInd * kInd> sum{};
  for (const auto& acc : cross) {
    for (int j = 0; j < kInd * kInd; ++j) sum[j] += acc[j];
  }
  const double n = static_cast<double>(mc_n);
  auto mean = [&](int a) { return sum[a * kInd + a] / n; };
  auto cov = [&](int a, int b) { return (sum[a * kInd + b] / n - mean(a) * mean(b)) / n; };
  auto ratio = [&](int num, int den, double& se) {
    if (!(mean(den) > 0.0)) throw NumericError(kModule, "zero denominator CDF: t too small for mc_n");
    const double r = mean(num) / mean(den);
    const double v = (cov(num, num) - 2.0 * r * cov(num, den) + r * r * cov(den, den)) / (mean(den) * mean(den));
    se = std::sqrt(std::max(v, 0.0));
    return r;
  };

  TrueEffects out;
  out.t = t;
  out.mc_size = mc_n;
  out.risk00 = mean(0);
  out.risk01 = mean(1);
  out.risk11 = mean(2);
  out.joint = ratio(2, 0, out.se_joint);
  out.anesthesia = ratio(1, 0, out.se_anesthesia);
  out.surgery = ratio(2, 1, out.se_surgery);
  out.gamma_true = ratio(3, 4, out.se_gamma);
  out.eta_true = ratio(4, 1, out.se_eta);
  return out;
}

Dataset random_discrete_dataset(std::size_t n, int k, int ell, Engine& rng) {
  if (n < 2 || k < 0 || ell < 0 || ell > k || k > 16) throw ValidationError(kModule, "bad discrete instance shape");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double pa = 0.2 + 0.6 * unif(rng);
  // Per-arm mediator marginals and per-(a, m_1) outcome hazards.
  std::array<std::vector<double>, 2> pm;
  for (auto& v : pm) {
    v.resize(static_cast<std::size_t>(k));
    for (double& x : v) x = 0.15 + 0.7 * unif(rng);
  }
  std::array<std::array<double, 2>, 2> hazard{};
  for (auto& row : hazard) {
    for (double& h : row) h = 0.1 + 0.8 * unif(rng);
  }
  std::vector<SubjectRecord> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SubjectRecord r;
    // Guarantee both arms: the first two rows are one of each.
    r.a = i < 2 ? static_cast<int>(i) : (unif(rng) < pa ? 1 : 0);
    r.m.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      r.m[j] = (j < ell && r.a == 0) ? 0 : (unif(rng) < pm[r.a][j] ? 1 : 0);
    }
    const int m_any = k > 0 ? r.m[k - 1] : 0;
    int time = 1;
    while (time < 5 && unif(rng) > hazard[r.a][m_any]) ++time;
    r.time = time;
    r.event = 1;
    rows.push_back(std::move(r));
  }
  return Dataset(MediatorSchema::unnamed(k, ell), 0, std::move(rows));
}

}  // namespace sepeff
