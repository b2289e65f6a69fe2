#include <doctest.h>

#include <cmath>

#include "predfb/input_history.hpp"

using namespace predfb;

namespace {
Vec v1(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}
}  // namespace

TEST_CASE("record enforces ordering and overwrites at the end time") {
  InputHistory h(1, 1.0);
  h.record(0.0, v1(1.0));
  h.record(0.5, v1(2.0));
  CHECK_THROWS_AS(h.record(0.25, v1(0.0)), ValidationError);
  h.record(0.5, v1(7.0));  // same time: replace
  CHECK(h.size() == 2);
  CHECK(h.value(0.5)(0) == 7.0);
}

TEST_CASE("record rejects gaps larger than max_gap") {
  InputHistory h(1, 2.0, 0.5);
  h.record(0.0, v1(0.0));
  CHECK_THROWS_AS(h.record(1.0, v1(0.0)), ValidationError);
  h.record(0.5, v1(0.0));
  h.record(1.0, v1(0.0));
  CHECK(h.size() == 3);
}

TEST_CASE("value interpolates linearly between samples") {
  InputHistory h(1, 1.0);
  h.record(0.0, v1(0.0));
  h.record(1.0, v1(2.0));
  CHECK(h.value(0.25)(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(h.value(-0.1), ValidationError);
  CHECK_THROWS_AS(h.value(1.1), ValidationError);
}

TEST_CASE("integral is exact for the piecewise-linear record") {
  InputHistory h(1, 2.0);
  h.record(0.0, v1(0.0));
  h.record(1.0, v1(2.0));
  h.record(2.0, v1(0.0));
  CHECK(h.integral(0.0, 2.0)(0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(h.integral(0.5, 1.5)(0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(h.integral(1.0, 1.0)(0) == 0.0);
}

TEST_CASE("sup_norm is attained at a breakpoint or an endpoint") {
  InputHistory h(1, 2.0);
  h.record(0.0, v1(-3.0));
  h.record(1.0, v1(1.0));
  h.record(2.0, v1(2.0));
  CHECK(h.sup_norm(0.0, 2.0) == 3.0);
  CHECK(h.sup_norm(0.5, 2.0) == 2.0);
  CHECK(h.sup_norm(0.5, 0.75) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sup_norm_window excludes the sample at the query instant") {
  InputHistory h(1, 1.0);
  h.record(-1.0, v1(1.0));
  h.record(-0.5, v1(3.0));
  h.record(0.0, v1(9.0));
  CHECK(h.sup_norm_window(0.0) == 3.0);  // [-1, 0): the value at 0 is excluded
}

TEST_CASE("sup_norm_window includes the left edge") {
  InputHistory h(1, 1.0);
  h.record(-1.0, v1(5.0));
  h.record(-0.5, v1(1.0));
  h.record(0.0, v1(0.0));
  CHECK(h.sup_norm_window(0.0) == 5.0);
}

TEST_CASE("sup_norm_window demands a record covering the window") {
  InputHistory empty(1, 1.0);
  CHECK_THROWS_AS(empty.sup_norm_window(0.0), ValidationError);

  InputHistory late(1, 1.0);
  late.record(-0.5, v1(1.0));  // starts after t - window
  late.record(0.0, v1(1.0));
  CHECK_THROWS_AS(late.sup_norm_window(0.0), ValidationError);

  InputHistory stale(1, 1.0);
  stale.record(-1.0, v1(1.0));
  stale.record(-0.6, v1(1.0));  // ends before t
  CHECK_THROWS_AS(stale.sup_norm_window(0.0), ValidationError);
}

TEST_CASE("evict_before keeps the sample needed to interpolate at the cut") {
  InputHistory h(1, 4.0);
  for (int i = 0; i <= 4; ++i) h.record(i, v1(i));
  h.evict_before(2.5);
  CHECK(h.start_time() == 2.0);
  CHECK(h.value(2.5)(0) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("constructor validates the window") {
  CHECK_THROWS_AS(InputHistory(1, 0.0), ValidationError);
  CHECK_THROWS_AS(InputHistory(1, -1.0), ValidationError);
  CHECK_THROWS_AS(InputHistory(0, 1.0), ValidationError);
}
