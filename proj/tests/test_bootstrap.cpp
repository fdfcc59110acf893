#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sepeff/bootstrap.hpp"
#include "sepeff/error.hpp"
#include "sepeff/parallel.hpp"
#include "sepeff/reference.hpp"
#include "sepeff/simulation.hpp"
#include "test_util.hpp"

using namespace sepeff;

namespace {

const Dataset& small_sample() {
  static const Dataset d = [] {
    DgpConfig cfg;
    cfg.n = 800;
    cfg.seed = 21;
    return generate_dataset(cfg).observed;
  }();
  return d;
}

std::string replicate_text(const BootstrapResult& b) {
  testutil::TempDir dir;
  write_replicates_csv(dir / "r.csv", b);
  return testutil::read_text(dir / "r.csv");
}

}  // namespace

TEST_CASE("draw_weights") {
  Engine rng = make_engine(1, 0);
  CHECK(draw_weights(1, rng) == std::vector<double>{1.0});

  Engine a = make_engine(42, 7), b = make_engine(42, 7);
  const std::vector<double> wa = draw_weights(10000, a);
  CHECK(wa == draw_weights(10000, b));

  double sum = 0.0, ss = 0.0;
  for (double v : wa) {
    CHECK(v > 0.0);
    sum += v;
  }
  const double mean = sum / 1e4;
  for (double v : wa) ss += (v - mean) * (v - mean);
  CHECK(std::abs(sum - 1e4) < 1e-9);
  CHECK(std::abs(mean - 1.0) < 1e-12);
  const double expected_var = (1e4 - 1.0) / (1e4 + 1.0);
  CHECK(std::abs(ss / (1e4 - 1.0) / expected_var - 1.0) < 0.05);

  CHECK_THROWS_AS(draw_weights(0, rng), ValidationError);
}

TEST_CASE("replicate weights are positive and sum to n") {
  for (std::uint64_t r = 0; r < 200; ++r) {
    Engine rng = make_engine(99, r);
    const auto w = draw_weights(777, rng);
    double s = 0.0;
    for (double v : w) {
      REQUIRE(v > 0.0);
      s += v;
    }
    CHECK(std::abs(s - 777.0) < 1e-9);
  }
}

TEST_CASE("type-7 percentiles") {
  CHECK(percentile({4, 1, 3, 2}, 0.5) == 2.5);
  CHECK(percentile({4, 1, 3, 2}, 0.25) == 1.75);
  CHECK(percentile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(percentile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(percentile({7}, 0.3) == 7.0);
  CHECK_THROWS_AS(percentile({}, 0.5), ValidationError);
  CHECK_THROWS_AS(percentile({1, 2}, 1.5), ValidationError);
}

TEST_CASE("bootstrap output is a pure function of its inputs") {
  const Dataset& d = small_sample();
  const int saved = num_threads();
  set_num_threads(1);
  const BootstrapResult one = bootstrap_effects(d, 5.0, 8, 1234);
  const std::string text = replicate_text(one);
  for (int threads : {2, 3, 4}) {
    set_num_threads(threads);
    const BootstrapResult many = bootstrap_effects(d, 5.0, 8, 1234);
    CHECK(replicate_text(many) == text);
    CHECK(many.anesthesia_ci.lower == one.anesthesia_ci.lower);
    CHECK(many.anesthesia_ci.upper == one.anesthesia_ci.upper);
  }
  set_num_threads(4);
  const BootstrapResult serial = reference::bootstrap_effects_serial(d, 5.0, 8, 1234);
  CHECK(replicate_text(serial) == text);
  set_num_threads(saved);

  SUBCASE("R = 2 twice") {
    const BootstrapResult x = bootstrap_effects(d, 5.0, 2, 5);
    const BootstrapResult y = bootstrap_effects(d, 5.0, 2, 5);
    CHECK(replicate_text(x) == replicate_text(y));
  }
  SUBCASE("a different seed changes the replicates") {
    CHECK(replicate_text(bootstrap_effects(d, 5.0, 8, 1235)) != text);
  }
}

TEST_CASE("percentile intervals lie within the replicate range") {
  const BootstrapResult b = bootstrap_effects(small_sample(), 5.0, 40, 77);
  CHECK(b.failed == 0);
  CHECK(b.R == 40);
  CHECK(b.replicates.size() == 40);
  auto check = [&](Interval ci, double ReplicateRow::*field) {
    double lo = 1e300, hi = -1e300;
    for (const auto& r : b.replicates) {
      lo = std::min(lo, r.*field);
      hi = std::max(hi, r.*field);
    }
    CHECK(ci.lower <= ci.upper);
    CHECK(ci.lower >= lo);
    CHECK(ci.upper <= hi);
  };
  check(b.joint_ci, &ReplicateRow::joint);
  check(b.anesthesia_ci, &ReplicateRow::anesthesia);
  check(b.surgery_ci, &ReplicateRow::surgery);
  for (const auto& r : b.replicates) CHECK(std::abs(r.joint - r.anesthesia * r.surgery) <= 1e-12 * r.joint);
}

TEST_CASE("bootstrap errors") {
  CHECK_THROWS_AS(bootstrap_effects(small_sample(), 5.0, 1, 1), ValidationError);
  // Every event at one time: the unit-weight outcome model cannot be fit.
  std::vector<SubjectRecord> rows;
  for (int i = 0; i < 20; ++i) {
    const int a = i % 2;
    rows.push_back({{static_cast<double>(i % 3)}, a, {a * (i / 2 % 2)}, 1.0, 1});
  }
  const Dataset flat(MediatorSchema::unnamed(1, 1), 1, rows);
  CHECK_THROWS_AS(bootstrap_effects(flat, 5.0, 4, 1), Error);
}

TEST_CASE("replicate CSV layout") {
  BootstrapResult b;
  b.replicates.push_back({0, 1.5, 1.25, 1.2, true, {}});
  b.replicates.push_back({1, 0, 0, 0, false, "cox: did not converge"});
  testutil::TempDir dir;
  write_replicates_csv(dir / "r.csv", b);
  CHECK(testutil::read_text(dir / "r.csv") == "rep,joint,anesthesia,surgery,converged\n0,1.5,1.25,1.2,1\n1,,,,0\n");
}
