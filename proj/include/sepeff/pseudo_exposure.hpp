#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sepeff {

inline constexpr int kMonths = 10;  // month 0 = delivery month, month 9 = earliest

struct EligibilityTable {
  std::vector<std::string> ids;
  std::vector<std::array<bool, kMonths>> eligible;  // [subject][month]

  std::size_t size() const noexcept { return ids.size(); }
  void check() const;
};

struct ExcludedSubject {
  std::size_t index = 0;
  std::string reason;
};

struct MonthAssignment {
  std::vector<int> month;  // per subject, -1 when excluded
  std::vector<ExcludedSubject> excluded;
  std::array<long, kMonths> expected{};
  std::array<long, kMonths> assigned{};
  std::array<long, kMonths> forced{};  // subjects eligible in that month only
  std::vector<int> order;              // processing order of months 1..9
  long pool_size = 0;                  // subjects eligible in some month 1..9
};

/// Largest-remainder rounding of proportion * total; ties go to the earlier
/// month. The result sums to `total`.
std::array<long, kMonths> expected_counts(const std::array<double, kMonths>& exposed_hist, long total);

/// Matches the unexposed pseudo-procedure months to the exposed histogram:
///   1. subjects eligible in month 0 only are set aside; expected counts are
///      the exposed proportions times the number of remaining subjects;
///   2. months 1..9, in ascending order of eligible count (earlier month on
///      ties), take their single-month subjects, then a uniform sample of the
///      other unassigned eligible subjects up to the expected count;
///   3. the remaining subjects go to month 0 (excluded if ineligible there),
///      topped up by sampling the set-aside subjects; the rest are excluded.
/// Throws ValidationError naming the month (month 0 included) when its pool
/// is too small.
MonthAssignment assign_pseudo_months(const std::array<double, kMonths>& exposed_hist, const EligibilityTable& elig,
                                     std::uint64_t seed);

/// `id,month_0,...,month_9` with 0/1 flags.
EligibilityTable load_eligibility(const std::filesystem::path& path);
void write_eligibility(const std::filesystem::path& path, const EligibilityTable& elig);
/// `month,count`; months absent from the file count 0.
std::array<double, kMonths> load_exposed_hist(const std::filesystem::path& path);
/// `id,assigned_month` and `id,reason`.
void write_assignment(const std::filesystem::path& assigned_csv, const std::filesystem::path& excluded_csv,
                      const EligibilityTable& elig, const MonthAssignment& a);

}  // namespace sepeff
