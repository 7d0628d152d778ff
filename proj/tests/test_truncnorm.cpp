#include <doctest.h>

#include <cmath>

#include "bwe/truncnorm.hpp"
#include "bwe/vb_engine.hpp"
#include "support.hpp"

using namespace bwe;

TEST_CASE("truncated mean at zero location") {
  const double root = std::sqrt(2.0 / M_PI);
  CHECK(truncated_normal_mean(0.0, true) == doctest::Approx(0.7978845608).epsilon(1e-10));
  CHECK(truncated_normal_mean(0.0, false) == doctest::Approx(-root).epsilon(1e-14));
}

TEST_CASE("truncated mean agrees with quadrature across both tails") {
  for (double loc : {-60.0, -37.5, -36.5, -20.0, -8.0, -3.0, -1.0, -0.1, 0.0, 0.3, 1.0, 3.0,
                     8.0, 20.0, 37.5, 60.0}) {
    for (bool positive : {true, false}) {
      const auto q = oracle::truncated_moments_quadrature(loc, positive);
      const double got = truncated_normal_mean(loc, positive);
      CAPTURE(loc);
      CAPTURE(positive);
      CHECK(std::isfinite(got));
      CHECK(got == doctest::Approx(q.mean).epsilon(1e-9));
      CHECK(log_normal_cdf(positive ? loc : -loc) == doctest::Approx(q.log_mass).epsilon(1e-9));
    }
  }
}

TEST_CASE("truncated mean lies on the truncation side of the location") {
  oracle::Rng rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int n = 0; n < 2000; ++n) {
    const double loc = u(rng);
    CHECK(truncated_normal_mean(loc, true) >= loc);
    CHECK(truncated_normal_mean(loc, false) <= loc);
    // Far on the untruncated side the correction drops below one ulp of loc.
    if (loc < 5.0) CHECK(truncated_normal_mean(loc, true) > loc);
    if (loc > -5.0) CHECK(truncated_normal_mean(loc, false) < loc);
    CHECK(truncated_normal_mean(loc, true) > 0.0);
    CHECK(truncated_normal_mean(loc, false) < 0.0);
  }
}

TEST_CASE("inverse Mills ratio is smooth across the series cutoff") {
  const double below = inverse_mills(-36.9999999), above = inverse_mills(-37.0000001);
  CHECK(below == doctest::Approx(above).epsilon(1e-7));
  CHECK(inverse_mills(-1e6) == doctest::Approx(1e6).epsilon(1e-10));
  CHECK(inverse_mills(40.0) == doctest::Approx(normal_pdf(40.0)).epsilon(1e-12));
}

TEST_CASE("update_z matches Monte Carlo truncated means") {
  // One word, one context, K = 1: z* = x * b.
  CooccurrenceSet data;
  data.vocab_size = 1;
  data.triples = {{0, 0, 1}, {0, 0, 0}};
  vb::Hyperparameters h;
  h.k = 1;
  auto state = vb::init_state(h, 1, 1);
  state.x_mean(0, 0) = 1.0;
  const vb::ObservationIndex index(data);
  for (double loc : {-3.0, 1.0, 3.0}) {
    state.b_mean(0, 0) = loc;
    vb::update_z(state, index);
    const auto z = vb::triple_z_means(state, index);
    CHECK(std::abs(z[0] - oracle::monte_carlo_truncated_mean(loc, true, 1000000, 7)) < 3e-3);
    CHECK(std::abs(z[1] - oracle::monte_carlo_truncated_mean(loc, false, 1000000, 8)) < 3e-3);
  }
}
