#include <doctest.h>

#include "fingersel/appendixcheck.hpp"
#include "fingersel/errors.hpp"

using namespace fsel;

TEST_CASE("descent checks on the default contours") {
  for (double g : {0.8, 1.0, 1.5, 2.0})
    for (Lemma id : all_lemmas()) {
      if (id == Lemma::L6_8) continue;
      const auto r = check(id, g);
      CAPTURE(lemma_name(id));
      CAPTURE(g);
      CHECK(r.direction_ok);
      CHECK(r.min_margin > 0.0);
      CHECK(r.samples >= 400);
    }
}

TEST_CASE("tip segments: Re P is not monotone along -nu + s e^{-+i pi/6}") {
  // |t| has its minimum nu/2 inside each segment, where the -gamma^2 log t model changes direction
  const auto r = check(Lemma::L6_8, 1.0);
  CHECK_FALSE(r.direction_ok);
  CHECK(r.near_tip_checked);
  CHECK(r.near_tip_window_samples == 0);
  CHECK(r.near_tip_ok);
  CHECK_THROWS_AS(find_admissible(Lemma::L6_8, 1.0), Error);
}

TEST_CASE("admissible parameter search") {
  const auto a = find_admissible(Lemma::L6_9, 1.0);
  CHECK(check(Lemma::L6_9, 1.0, a.params).direction_ok);
  CHECK(!a.scanned.empty());
  const auto b = find_admissible(Lemma::L6_6, 1.5);
  CHECK(check(Lemma::L6_6, 1.5, b.params).direction_ok);
  CHECK_THROWS_AS(find_admissible(Lemma::L6_1, 1.0), Error);
}

TEST_CASE("family preconditions") {
  ContourParams c;
  c.b = 1.2;  // above min(1, gamma)
  try {
    check(Lemma::L6_2, 1.0, c);
    FAIL("expected FAMILY_MISMATCH");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::family_mismatch);
  }
  CHECK_THROWS_AS(check(Lemma::L6_1, 1.0, {}, 10), Error);
}
