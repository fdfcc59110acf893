#include "sepeff/mediator.hpp"

#include <string>

#include "sepeff/error.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "mediator_model";

std::string mediator_label(const MediatorSchema& s, int j) {
  if (j < static_cast<int>(s.names.size())) return s.names[j];
  return "m_" + std::to_string(j + 1);
}

}  // namespace

MediatorJointModel::MediatorJointModel(MediatorSchema schema, int p, std::vector<LogisticFit> fits)
    : schema_(std::move(schema)), p_(p), fits_(std::move(fits)) {
  if (static_cast<int>(fits_.size()) != schema_.k) throw ValidationError(kModule, "one fit per mediator required");
  for (int j = 0; j < schema_.k; ++j) {
    if (fits_[j].beta.size() != n_regressors(schema_, p_, j) + 1) {
      throw ValidationError(kModule, "fit for " + mediator_label(schema_, j) + " has the wrong number of coefficients");
    }
  }
}

int MediatorJointModel::n_regressors(const MediatorSchema& schema, int p, int j) {
  return j < schema.ell ? p + j : 1 + p + j;
}

void MediatorJointModel::regressors(const MediatorSchema& schema, int p, int j, int a,
                                    std::span<const int> m, std::span<const double> c,
                                    std::span<double> out) {
  std::size_t col = 0;
  if (j >= schema.ell) out[col++] = a;
  for (int i = 0; i < p; ++i) out[col++] = c[i];
  for (int i = 0; i < j; ++i) {
    out[col++] = (j >= schema.ell && i < schema.ell) ? a * m[i] : m[i];
  }
}

void MediatorJointModel::check_args(int a, std::span<const double> c) const {
  if (a != 0 && a != 1) throw ValidationError(kModule, "exposure must be 0 or 1");
  if (static_cast<int>(c.size()) != p_) throw ValidationError(kModule, "covariate dimension mismatch");
}

double MediatorJointModel::factor_prob(int j, int a, std::span<const int> m,
                                       std::span<const double> c) const {
  if (j < schema_.ell && a == 0) return 0.0;
  double regs[64];
  std::vector<double> heap;
  const int q = n_regressors(schema_, p_, j);
  std::span<double> out;
  if (q <= 64) {
    out = std::span<double>(regs, static_cast<std::size_t>(q));
  } else {
    heap.resize(static_cast<std::size_t>(q));
    out = heap;
  }
  regressors(schema_, p_, j, a, m, c, out);
  const Eigen::VectorXd& beta = fits_[j].beta;
  double eta = beta[0];
  for (int i = 0; i < q; ++i) eta += beta[i + 1] * out[i];
  return inv_logit(eta);
}

double MediatorJointModel::joint_prob(std::span<const int> m, int a, std::span<const double> c) const {
  check_args(a, c);
  if (static_cast<int>(m.size()) != schema_.k) throw ValidationError(kModule, "mediator vector dimension mismatch");
  double prob = 1.0;
  for (int j = 0; j < schema_.k; ++j) {
    if (m[j] != 0 && m[j] != 1) throw ValidationError(kModule, "mediators must be 0 or 1");
    if (j < schema_.ell && a == 0) {
      if (m[j] == 1) return 0.0;
      continue;
    }
    const double p1 = factor_prob(j, a, m, c);
    prob *= m[j] ? p1 : 1.0 - p1;
  }
  return prob;
}

std::vector<double> MediatorJointModel::enumerate_joint(int a, std::span<const double> c) const {
  if (schema_.k > kEnumerationCap) {
    throw ValidationError(kModule, "k=" + std::to_string(schema_.k) + " exceeds the enumeration cap of " +
                                       std::to_string(kEnumerationCap));
  }
  std::vector<double> out(std::size_t{1} << schema_.k);
  enumerate_joint(a, c, out);
  return out;
}

void MediatorJointModel::enumerate_joint(int a, std::span<const double> c, std::span<double> out) const {
  check_args(a, c);
  const int k = schema_.k;
  if (k > kEnumerationCap) {
    throw ValidationError(kModule, "k=" + std::to_string(k) + " exceeds the enumeration cap of " +
                                       std::to_string(kEnumerationCap));
  }
  if (out.size() != (std::size_t{1} << k)) throw ValidationError(kModule, "output buffer has the wrong size");

  // Depth-first walk over prefixes: each internal node evaluates one factor.
  std::vector<int> m(static_cast<std::size_t>(k), 0);
  auto walk = [&](auto&& self, int j, std::size_t idx, double prob) -> void {
    if (j == k) {
      out[idx] = prob;
      return;
    }
    const std::size_t width = std::size_t{1} << (k - j - 1);
    const double p1 = factor_prob(j, a, m, c);
    m[j] = 0;
    self(self, j + 1, idx, prob * (1.0 - p1));
    if (p1 == 0.0 && j < schema_.ell) {
      for (std::size_t s = 0; s < width; ++s) out[idx + width + s] = 0.0;
    } else {
      m[j] = 1;
      self(self, j + 1, idx + width, prob * p1);
      m[j] = 0;
    }
  };
  walk(walk, 0, 0, 1.0);
}

double joint_prob(const MediatorJointModel& mdl, std::span<const int> m, int a, std::span<const double> c) {
  return mdl.joint_prob(m, a, c);
}

std::vector<double> enumerate_joint(const MediatorJointModel& mdl, int a, std::span<const double> c) {
  return mdl.enumerate_joint(a, c);
}

std::vector<int> mediator_vector(std::size_t idx, int k) {
  std::vector<int> m(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) m[j] = static_cast<int>((idx >> (k - 1 - j)) & 1u);
  return m;
}

MediatorProblem::MediatorProblem(const Dataset& d) : schema_(d.schema()), p_(d.p()), n_(d.size()) {
  factors_.resize(static_cast<std::size_t>(schema_.k));
  for (int j = 0; j < schema_.k; ++j) {
    Factor& f = factors_[j];
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (j < schema_.ell && d[i].a != 1) continue;
      f.rows.push_back(i);
    }
    const int q = MediatorJointModel::n_regressors(schema_, p_, j);
    f.x.resize(static_cast<Eigen::Index>(f.rows.size()), q);
    f.y.resize(static_cast<Eigen::Index>(f.rows.size()));
    std::vector<double> row(static_cast<std::size_t>(q));
    for (std::size_t r = 0; r < f.rows.size(); ++r) {
      const SubjectRecord& rec = d[f.rows[r]];
      MediatorJointModel::regressors(schema_, p_, j, rec.a, rec.m, rec.c, row);
      for (int s = 0; s < q; ++s) f.x(static_cast<Eigen::Index>(r), s) = row[static_cast<std::size_t>(s)];
      f.y[static_cast<Eigen::Index>(r)] = rec.m[j];
    }
  }
}

MediatorJointModel MediatorProblem::fit(std::span<const double> w, const LogisticOptions& opts,
                                        const MediatorJointModel* start) const {
  if (w.size() != n_) throw ValidationError(kModule, "weight vector length does not match the data");
  std::vector<LogisticFit> fits;
  fits.reserve(factors_.size());
  for (int j = 0; j < schema_.k; ++j) {
    const Factor& f = factors_[j];
    std::vector<double> fw(f.rows.size());
    double ones = 0.0, total = 0.0;
    for (std::size_t r = 0; r < f.rows.size(); ++r) {
      fw[r] = w[f.rows[r]];
      total += fw[r];
      if (f.y[static_cast<Eigen::Index>(r)] == 1.0) ones += fw[r];
    }
    const std::string label = mediator_label(schema_, j);
    if (!(total > 0.0)) {
      throw ValidationError(kModule, "no rows to fit mediator " + label +
                                         (j < schema_.ell ? " (no exposed subjects)" : ""));
    }
    if (ones == 0.0 || ones == total) {
      throw ValidationError(kModule, "degenerate mediator " + label + ": constant within its fitting subsample");
    }
    const Eigen::VectorXd* init = nullptr;
    if (start && start->k() == schema_.k) init = &start->fits()[j].beta;
    fits.push_back(fit_weighted_logistic(f.x, f.y, fw, opts, init));
  }
  return MediatorJointModel(schema_, p_, std::move(fits));
}

MediatorJointModel fit_mediator_model(const Dataset& d, std::span<const double> w, const LogisticOptions& opts) {
  return MediatorProblem(d).fit(w, opts);
}

}  // namespace sepeff
