#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ontolab/qm.hpp"

using namespace ontolab;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.push_back(n > 1 ? a + (b - a) * i / (n - 1) : a);
  }
  return out;
}

}  // namespace

TEST_CASE("closed forms match the density-matrix route on a dense grid") {
  double worst = 0.0;
  for (double theta : linspace(0.0, kPi / 2, 12)) {
    EntangledState state(theta);
    for (double alpha : linspace(0.0, 2 * kPi * 11.0 / 12.0, 12)) {
      MeasurementDirection a(alpha);
      for (double beta : linspace(0.0, 2 * kPi * 11.0 / 12.0, 12)) {
        MeasurementDirection b(beta);
        JointStats fast = joint_stats(state, a, b);
        JointStats slow = density_matrix_oracle(state, a, b);
        worst = std::max(worst, std::abs(fast.expectation_a() -
                                         slow.expectation_a()));
        worst = std::max(worst, std::abs(fast.expectation_b() -
                                         slow.expectation_b()));
        worst = std::max(worst,
                         std::abs(fast.correlation() - slow.correlation()));
        for (int x : {1, -1}) {
          for (int y : {1, -1}) {
            worst = std::max(worst,
                             std::abs(fast.joint(x, y) - slow.joint(x, y)));
          }
        }
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("joint table is a consistent probability distribution") {
  EntangledState state(0.9);
  MeasurementDirection a(1.3), b(4.9);
  JointStats st = joint_stats(state, a, b);

  double total = 0.0;
  for (int x : {1, -1}) {
    for (int y : {1, -1}) {
      CHECK(st.joint(x, y) >= 0.0);
      total += st.joint(x, y);
    }
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

  CHECK(st.marginal_a(1) ==
        doctest::Approx(st.joint(1, 1) + st.joint(1, -1)).epsilon(1e-14));
  CHECK(st.marginal_b(-1) ==
        doctest::Approx(st.joint(1, -1) + st.joint(-1, -1)).epsilon(1e-14));
  CHECK(st.marginal_a(1) + st.marginal_a(-1) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(st.expectation_a() ==
        doctest::Approx(st.marginal_a(1) - st.marginal_a(-1)).epsilon(1e-13));
}

TEST_CASE("special points of the state family") {
  SUBCASE("product state factorizes") {
    EntangledState state(0.0);
    for (double alpha : {0.3, 1.7, 4.0}) {
      for (double beta : {0.9, 2.2, 5.5}) {
        double corr =
            correlation(state, MeasurementDirection(alpha),
                        MeasurementDirection(beta));
        CHECK(corr == doctest::Approx(std::cos(alpha) * std::cos(beta))
                          .epsilon(1e-14));
      }
    }
  }
  SUBCASE("maximally entangled correlation depends only on the gap") {
    EntangledState state(kPi / 2);
    for (double alpha : {0.0, 0.8, 2.9}) {
      for (double gap : {0.0, 0.5, kPi / 2, kPi}) {
        double corr = correlation(state, MeasurementDirection(alpha),
                                  MeasurementDirection(alpha + gap));
        CHECK(corr == doctest::Approx(std::cos(gap)).epsilon(1e-13));
      }
    }
    CHECK(expectation_A(state, MeasurementDirection(1.1)) ==
          doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("single-wing expectation") {
    EntangledState state(kPi / 3);
    CHECK(expectation_A(state, MeasurementDirection(0.0)) ==
          doctest::Approx(0.5).epsilon(1e-15));
    CHECK(expectation_B(state, MeasurementDirection(kPi)) ==
          doctest::Approx(-0.5).epsilon(1e-15));
  }
}

TEST_CASE("templated closed forms accept other scalar types") {
  float ef = expectation_value(0.5f, 0.25f);
  double ed = expectation_value(0.5, 0.25);
  CHECK(std::abs(static_cast<double>(ef) - ed) < 1e-6);
  CHECK(correlation_value(0.5, 0.25, 0.75) ==
        doctest::Approx(std::cos(0.25) * std::cos(0.75) +
                        std::sin(0.5) * std::sin(0.25) * std::sin(0.75)));
}

TEST_CASE("conditional probability agrees with the joint table") {
  EntangledState state(1.1);
  MeasurementDirection a(0.4), b(2.0);
  JointStats st = joint_stats(state, a, b);
  CHECK(conditional_probability(state, a, b, 1, 1) ==
        doctest::Approx(st.joint(1, 1) / st.marginal_a(1)).epsilon(1e-13));
  CHECK(conditional_probability(state, a, b, -1, 1) ==
        doctest::Approx(st.joint(-1, 1) / st.marginal_a(-1)).epsilon(1e-13));

  // Conditioning on an outcome of probability zero must be rejected:
  // theta = 0 and alpha = pi gives <A> = -1.
  EntangledState product(0.0);
  CHECK_THROWS_AS(conditional_probability(product, MeasurementDirection(kPi),
                                          b, 1, 1),
                  conditional_error);
}

TEST_CASE("joint table construction validates its inputs") {
  // A correlation incompatible with the marginals drives an entry
  // negative: ea = 1, eb = -1 forces perfect anti-correlation.
  CHECK_THROWS_AS(JointStats(1.0, -1.0, 1.0), consistency_error);

  std::array<double, 4> probs = {0.4, 0.1, 0.2, 0.3};
  JointStats st = JointStats::from_joint(probs);
  CHECK(st.joint(1, 1) == doctest::Approx(0.4));
  CHECK(st.expectation_a() == doctest::Approx(0.4 + 0.1 - 0.2 - 0.3));
  CHECK(st.expectation_b() == doctest::Approx(0.4 - 0.1 + 0.2 - 0.3));
  CHECK(st.correlation() == doctest::Approx(0.4 - 0.1 - 0.2 + 0.3));

  CHECK_THROWS_AS(EntangledState(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(EntangledState(kPi / 2 + 0.1), std::invalid_argument);
  CHECK_THROWS_AS(EntangledState(std::nan("")), std::invalid_argument);
}

TEST_CASE("measurement direction normalizes its angle") {
  MeasurementDirection d(-kPi / 2);
  CHECK(d.alpha() == doctest::Approx(3 * kPi / 2).epsilon(1e-14));
  MeasurementDirection e(2 * kPi + 0.25);
  CHECK(e.alpha() == doctest::Approx(0.25).epsilon(1e-12));
  Vec3d v = direction_vector(0.7);
  CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(v.y() == 0.0);
}
