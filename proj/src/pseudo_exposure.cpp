#include "sepeff/pseudo_exposure.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <set>

#include "sepeff/error.hpp"
#include "sepeff/parallel.hpp"
#include "sepeff/textio.hpp"

namespace sepeff {

namespace {

constexpr const char* kModule = "pseudo_exposure";

int eligible_months(const std::array<bool, kMonths>& row) {
  return static_cast<int>(std::count(row.begin(), row.end(), true));
}

}  // namespace

void EligibilityTable::check() const {
  if (ids.size() != eligible.size()) throw ValidationError(kModule, "ids and eligibility rows disagree in length");
  if (ids.empty()) throw ValidationError(kModule, "eligibility table is empty");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (eligible_months(eligible[i]) == 0) {
      throw ValidationError(kModule, "subject " + ids[i] + " is eligible in no month");
    }
  }
}

std::array<long, kMonths> expected_counts(const std::array<double, kMonths>& exposed_hist, long total) {
  double sum = 0.0;
  for (double h : exposed_hist) {
    if (!(h >= 0.0) || !std::isfinite(h)) throw ValidationError(kModule, "exposed counts must be nonnegative");
    sum += h;
  }
  if (!(sum > 0.0)) throw ValidationError(kModule, "exposed histogram is empty");
  if (total < 0) throw ValidationError(kModule, "negative total");

  std::array<long, kMonths> out{};
  std::array<double, kMonths> remainder{};
  long used = 0;
  for (int m = 0; m < kMonths; ++m) {
    const double exact = exposed_hist[m] / sum * static_cast<double>(total);
    out[m] = static_cast<long>(std::floor(exact));
    remainder[m] = exact - static_cast<double>(out[m]);
    used += out[m];
  }
  std::array<int, kMonths> idx{};
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (long r = 0; r < total - used; ++r) ++out[idx[static_cast<std::size_t>(r % kMonths)]];
  return out;
}

MonthAssignment assign_pseudo_months(const std::array<double, kMonths>& exposed_hist, const EligibilityTable& elig,
                                     std::uint64_t seed) {
  elig.check();
  const std::size_t n = elig.size();
  MonthAssignment out;
  out.month.assign(n, -1);

  std::vector<std::size_t> month0_only;
  std::array<long, kMonths> eligible_count{};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = elig.eligible[i];
    for (int m = 0; m < kMonths; ++m) eligible_count[m] += row[m] ? 1 : 0;
    if (row[0] && eligible_months(row) == 1) {
      month0_only.push_back(i);
    } else {
      ++out.pool_size;
    }
  }
  out.expected = expected_counts(exposed_hist, out.pool_size);

  // Ratio eligible/n shares its denominator across months, so ordering by
  // the count is the same ordering.
  std::vector<int> order(kMonths - 1);
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eligible_count[a] < eligible_count[b]; });
  out.order = order;

  for (int m : order) {
    std::vector<std::size_t> forced, others;
    for (std::size_t i = 0; i < n; ++i) {
      if (out.month[i] != -1 || !elig.eligible[i][m]) continue;
      (eligible_months(elig.eligible[i]) == 1 ? forced : others).push_back(i);
    }
    for (std::size_t i : forced) out.month[i] = m;
    out.forced[m] = static_cast<long>(forced.size());
    const long need = out.expected[m] - static_cast<long>(forced.size());
    if (need > static_cast<long>(others.size())) {
      throw ValidationError(kModule, "month " + std::to_string(m) + ": expected count " +
                                         std::to_string(out.expected[m]) + " exceeds its eligible pool of " +
                                         std::to_string(forced.size() + others.size()));
    }
    if (need > 0) {
      std::vector<std::size_t> picked;
      Engine rng = make_engine(seed, static_cast<std::uint64_t>(m));
      std::sample(others.begin(), others.end(), std::back_inserter(picked), need, rng);
      for (std::size_t i : picked) out.month[i] = m;
    }
  }

  const std::set<std::size_t> aside(month0_only.begin(), month0_only.end());
  long month0 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.month[i] != -1 || aside.count(i)) continue;
    if (elig.eligible[i][0]) {
      out.month[i] = 0;
      ++month0;
    } else {
      out.excluded.push_back({i, "unassigned after months 1-9 and not eligible in month 0"});
    }
  }
  const long room = std::max(0L, out.expected[0] - month0);
  if (room > static_cast<long>(month0_only.size())) {
    throw ValidationError(kModule, "month 0: expected count " + std::to_string(out.expected[0]) +
                                       " exceeds its eligible pool of " +
                                       std::to_string(month0 + static_cast<long>(month0_only.size())));
  }
  std::vector<std::size_t> picked;
  Engine rng = make_engine(seed, 0);
  std::sample(month0_only.begin(), month0_only.end(), std::back_inserter(picked), room, rng);
  for (std::size_t i : picked) out.month[i] = 0;
  for (std::size_t i : month0_only) {
    if (out.month[i] == -1) out.excluded.push_back({i, "eligible in month 0 only; month 0 already filled"});
  }
  std::sort(out.excluded.begin(), out.excluded.end(),
            [](const ExcludedSubject& a, const ExcludedSubject& b) { return a.index < b.index; });
  for (int m : out.month) {
    if (m >= 0) ++out.assigned[m];
  }
  return out;
}

EligibilityTable load_eligibility(const std::filesystem::path& path) {
  const auto lines = read_lines(path, kModule);
  if (lines.empty()) throw ValidationError(kModule, "empty eligibility file " + path.string());
  std::string header = "id";
  for (int m = 0; m < kMonths; ++m) header += ",month_" + std::to_string(m);
  if (lines[0] != header) throw ValidationError(kModule, "eligibility header must be '" + header + "'");
  EligibilityTable t;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const auto f = split_commas(lines[r]);
    if (f.size() != kMonths + 1) throw ValidationError(kModule, "row " + std::to_string(r - 1) + " has the wrong width");
    std::array<bool, kMonths> row{};
    for (int m = 0; m < kMonths; ++m) {
      const auto& v = f[static_cast<std::size_t>(m) + 1];
      if (v != "0" && v != "1") throw ValidationError(kModule, "row " + std::to_string(r - 1) + ": flags must be 0 or 1");
      row[m] = v == "1";
    }
    const std::string id(f[0]);
    if (!seen.insert(id).second) throw ValidationError(kModule, "duplicate id " + id);
    t.ids.push_back(id);
    t.eligible.push_back(row);
  }
  t.check();
  return t;
}

void write_eligibility(const std::filesystem::path& path, const EligibilityTable& elig) {
  auto out = open_output(path, kModule);
  out << "id";
  for (int m = 0; m < kMonths; ++m) out << ",month_" << m;
  out << '\n';
  for (std::size_t i = 0; i < elig.size(); ++i) {
    out << elig.ids[i];
    for (bool b : elig.eligible[i]) out << ',' << (b ? 1 : 0);
    out << '\n';
  }
  if (!out) throw IoError(kModule, "write failed for " + path.string());
}

std::array<double, kMonths> load_exposed_hist(const std::filesystem::path& path) {
  const auto lines = read_lines(path, kModule);
  if (lines.empty() || lines[0] != "month,count") throw ValidationError(kModule, "histogram header must be 'month,count'");
  std::array<double, kMonths> h{};
  std::array<bool, kMonths> seen{};
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const auto f = split_commas(lines[r]);
    double month = 0.0, count = 0.0;
    if (f.size() != 2 || !parse_double(f[0], month) || !parse_double(f[1], count) || month != std::floor(month) ||
        month < 0 || month >= kMonths || count < 0) {
      throw ValidationError(kModule, "bad histogram row " + std::to_string(r - 1));
    }
    const int m = static_cast<int>(month);
    if (seen[m]) throw ValidationError(kModule, "month " + std::to_string(m) + " listed twice");
    seen[m] = true;
    h[m] = count;
  }
  return h;
}

void write_assignment(const std::filesystem::path& assigned_csv, const std::filesystem::path& excluded_csv,
                      const EligibilityTable& elig, const MonthAssignment& a) {
  {
    auto out = open_output(assigned_csv, kModule);
    out << "id,assigned_month\n";
    for (std::size_t i = 0; i < elig.size(); ++i) {
      if (a.month[i] >= 0) out << elig.ids[i] << ',' << a.month[i] << '\n';
    }
    if (!out) throw IoError(kModule, "write failed for " + assigned_csv.string());
  }
  auto out = open_output(excluded_csv, kModule);
  out << "id,reason\n";
  for (const auto& e : a.excluded) out << elig.ids[e.index] << ',' << e.reason << '\n';
  if (!out) throw IoError(kModule, "write failed for " + excluded_csv.string());
}

}  // namespace sepeff
