#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "ontolab/entropy.hpp"
#include "ontolab/rng.hpp"

using namespace ontolab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double shannon(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

OutcomeDistribution random_distribution(std::uint64_t stream,
                                        std::uint64_t index) {
  int n_atoms = 1 + static_cast<int>(counter_uniform(99, stream, index) * 4);
  OutcomeDistribution dist;
  double total = 0.0;
  for (int k = 0; k < n_atoms; ++k) {
    double w = counter_uniform(99, stream, index * 16 + 2 * k + 1) + 1e-3;
    double p = counter_uniform(99, stream, index * 16 + 2 * k + 2);
    dist.atoms.push_back({w, p});
    total += w;
  }
  for (auto& atom : dist.atoms) atom.weight /= total;
  return dist;
}

}  // namespace

TEST_CASE("binary renyi entropy: limits, known values, ordering") {
  for (double alpha : {0.0, 0.3, 0.5, 1.0, 2.0, kInf}) {
    EntropySpec spec{alpha};
    CHECK(renyi_entropy(0.5, spec) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(renyi_entropy(0.0, spec) == 0.0);
    CHECK(renyi_entropy(1.0, spec) == 0.0);
  }

  CHECK(renyi_entropy(0.25, EntropySpec{1.0}) ==
        doctest::Approx(shannon(0.25)).epsilon(1e-13));
  // Order one half: 2 log2(sqrt(p) + sqrt(1-p)).
  CHECK(renyi_entropy(0.2, EntropySpec{0.5}) ==
        doctest::Approx(2 * std::log2(std::sqrt(0.2) + std::sqrt(0.8)))
            .epsilon(1e-13));
  // Order zero counts the support.
  CHECK(renyi_entropy(0.3, EntropySpec{0.0}) == 1.0);
  // Min-entropy is -log2 of the largest probability.
  CHECK(renyi_entropy(0.3, EntropySpec{kInf}) ==
        doctest::Approx(-std::log2(0.7)).epsilon(1e-13));

  SUBCASE("continuous at the Shannon point") {
    // H_alpha moves linearly in alpha (slope up to ~0.3 bits), so the
    // one-sided values at 1 +- 1e-4 sit ~3e-5 away by themselves.  A
    // seam between the generic formula and the Shannon branch would
    // shift both sides the same way; averaging the two sides cancels
    // the genuine linear term and exposes any such jump.
    for (double p : {0.1, 0.35, 0.5, 0.8}) {
      double lo = renyi_entropy(p, EntropySpec{1.0 - 1e-4});
      double hi = renyi_entropy(p, EntropySpec{1.0 + 1e-4});
      double at = renyi_entropy(p, EntropySpec{1.0});
      CHECK(hi <= at + 1e-12);  // non-increasing in alpha
      CHECK(at <= lo + 1e-12);
      CHECK(std::abs(0.5 * (lo + hi) - at) < 1e-6);
    }
  }
  SUBCASE("non-increasing in the order") {
    for (double p : {0.1, 0.2, 0.4}) {
      double prev = renyi_entropy(p, EntropySpec{0.0});
      for (double alpha : {0.25, 0.5, 1.0, 2.0, 8.0}) {
        double h = renyi_entropy(p, EntropySpec{alpha});
        CHECK(h <= prev + 1e-12);
        prev = h;
      }
    }
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(renyi_entropy(-0.1, EntropySpec{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(renyi_entropy(1.1, EntropySpec{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(renyi_entropy(0.5, EntropySpec{-1.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("averaged entropy over atomic distributions") {
  OutcomeDistribution single{{{1.0, 0.3}}};
  CHECK(average_entropy(single, EntropySpec{1.0}) ==
        doctest::Approx(shannon(0.3)).epsilon(1e-13));

  OutcomeDistribution deterministic{{{0.5, 0.0}, {0.5, 1.0}}};
  CHECK(average_entropy(deterministic, EntropySpec{0.7}) == 0.0);

  SUBCASE("distribution moments") {
    OutcomeDistribution dist{{{0.5, 0.0}, {0.5, 0.5}}};
    CHECK(dist.mean() == doctest::Approx(0.25));
    // Variance on the +-1 scale: 4 * E[(p - mean)^2].
    CHECK(dist.variance() == doctest::Approx(0.25).epsilon(1e-13));
    dist.validate();
  }
  SUBCASE("validation rejects broken distributions") {
    OutcomeDistribution negative{{{-0.1, 0.5}, {1.1, 0.5}}};
    CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
    OutcomeDistribution unnormalized{{{0.7, 0.5}}};
    CHECK_THROWS_AS(unnormalized.validate(), std::invalid_argument);
    OutcomeDistribution out_of_range{{{1.0, 1.5}}};
    CHECK_THROWS_AS(out_of_range.validate(), std::invalid_argument);
  }
}

TEST_CASE("jensen inequality holds for orders up to one") {
  for (double alpha : {0.25, 0.5, 1.0}) {
    EntropySpec spec{alpha};
    for (int i = 0; i < 2000; ++i) {
      OutcomeDistribution dist =
          random_distribution(1, static_cast<std::uint64_t>(i));
      double avg = average_entropy(dist, spec);
      double at_mean = renyi_entropy(dist.mean(), spec);
      CHECK(avg <= at_mean + 1e-9);
    }
  }
}

TEST_CASE("min-entropy violates the averaging inequality") {
  // Half the weight at p=0.1, half at p=0.3: the average min-entropy
  // exceeds the min-entropy of the mean, so min-entropy cannot serve as
  // the objective.
  OutcomeDistribution dist{{{0.5, 0.1}, {0.5, 0.3}}};
  EntropySpec spec{kInf};
  double avg = average_entropy(dist, spec);
  double at_mean = renyi_entropy(dist.mean(), spec);
  CHECK(avg == doctest::Approx(0.5 * (-std::log2(0.9)) +
                               0.5 * (-std::log2(0.7))).epsilon(1e-12));
  CHECK(at_mean == doctest::Approx(-std::log2(0.8)).epsilon(1e-12));
  CHECK(avg > at_mean + 0.01);
}

TEST_CASE("two-point candidate hits the requested moments exactly") {
  SUBCASE("generic point") {
    OutcomeDistribution dist = bilocal_candidate(0.25, 0.25);
    REQUIRE(dist.atoms.size() == 2);
    CHECK(dist.atoms[0].p == 0.0);
    CHECK(dist.atoms[0].weight == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(dist.atoms[1].p == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(dist.mean() == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(dist.variance() == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("zero variance collapses to one atom") {
    OutcomeDistribution dist = bilocal_candidate(0.3, 0.0);
    REQUIRE(dist.atoms.size() == 1);
    CHECK(dist.atoms[0].p == doctest::Approx(0.3));
  }
  SUBCASE("maximal variance is fully deterministic") {
    OutcomeDistribution dist = bilocal_candidate(0.25, 0.75);
    REQUIRE(dist.atoms.size() == 2);
    CHECK(dist.atoms[0].weight == doctest::Approx(0.75));
    CHECK(dist.atoms[1].p == doctest::Approx(1.0));
    CHECK(average_entropy(dist, EntropySpec{1.0}) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  }
  SUBCASE("rejects infeasible requests") {
    CHECK_THROWS_AS(bilocal_candidate(0.6, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(bilocal_candidate(0.25, 0.76), infeasibility_error);
    CHECK_THROWS_AS(bilocal_candidate(0.25, -0.01), infeasibility_error);
  }
}

TEST_CASE("moment-constrained minimization finds the two-point optimum") {
  SUBCASE("reference point") {
    EntropyReport rep = minimize_average_entropy(0.25, 0.25, EntropySpec{1.0});
    CHECK(rep.h_bar == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(rep.is_bilocal);
    REQUIRE(rep.minimizer.atoms.size() <= 3);
    CHECK(rep.minimizer.mean() == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(rep.minimizer.variance() == doctest::Approx(0.25).epsilon(1e-8));
  }
  SUBCASE("zero variance returns the single atom") {
    EntropyReport rep = minimize_average_entropy(0.3, 0.0, EntropySpec{1.0});
    CHECK(rep.h_bar == doctest::Approx(shannon(0.3)).epsilon(1e-12));
    REQUIRE(rep.minimizer.atoms.size() == 1);
    CHECK_FALSE(rep.is_bilocal);
  }
  SUBCASE("maximal variance returns deterministic atoms") {
    EntropyReport rep = minimize_average_entropy(0.25, 0.75, EntropySpec{1.0});
    CHECK(rep.h_bar <= 1e-9);
    CHECK_FALSE(rep.is_bilocal);  // both surviving atoms are deterministic
  }
  SUBCASE("optimum never exceeds the closed-form candidate") {
    for (double alpha : {0.25, 0.5, 1.0}) {
      EntropySpec spec{alpha};
      for (double p : {0.1, 0.25, 0.4}) {
        double dmax_bilocal = 4 * p * (0.5 - p);
        for (double frac : {0.3, 0.7, 1.0}) {
          double delta = frac * dmax_bilocal;
          EntropyReport rep = minimize_average_entropy(p, delta, spec);
          double candidate =
              average_entropy(bilocal_candidate(p, delta), spec);
          CHECK(rep.h_bar <= candidate + 2 * rep.grid_resolution);
          CHECK(rep.h_bar <= renyi_entropy(p, spec) + 1e-9);
          CHECK(rep.minimizer.mean() == doctest::Approx(p).epsilon(1e-9));
          CHECK(std::abs(rep.minimizer.variance() - delta) <= 1e-8);
        }
      }
    }
  }
  SUBCASE("inputs above one half are reflected") {
    EntropyReport rep = minimize_average_entropy(0.75, 0.25, EntropySpec{1.0});
    CHECK(rep.h_bar == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(rep.is_bilocal);
    CHECK(rep.minimizer.mean() == doctest::Approx(0.75).epsilon(1e-9));
    bool has_deterministic_one = false;
    for (const auto& atom : rep.minimizer.atoms) {
      if (atom.weight > 1e-9 && atom.p >= 1.0 - 1e-9) {
        has_deterministic_one = true;
      }
    }
    CHECK(has_deterministic_one);
  }
  SUBCASE("rejects infeasible variance") {
    CHECK_THROWS_AS(minimize_average_entropy(0.25, 0.76, EntropySpec{1.0}),
                    infeasibility_error);
    CHECK_THROWS_AS(minimize_average_entropy(0.25, -0.1, EntropySpec{1.0}),
                    infeasibility_error);
    CHECK_THROWS_AS(minimize_average_entropy(0.0, 0.1, EntropySpec{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        minimize_average_entropy(0.25, 0.1, EntropySpec{1.0}, 100),
        std::invalid_argument);
  }
}

TEST_CASE("critical variance sits at the two-point persistence boundary") {
  double lower = 4 * 0.25 * (0.5 - 0.25);  // 0.25

  double dc = critical_variance(0.25, EntropySpec{1.0}, 1e-3);
  CHECK(dc >= lower - 1e-3);
  CHECK(dc <= lower + 2e-3);

  SUBCASE("non-increasing in the order") {
    double prev = 1.0;
    for (double alpha : {0.1, 0.25, 0.5, 0.75, 1.0}) {
      double v = critical_variance(0.25, EntropySpec{alpha}, 1e-3);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(critical_variance(0.25, EntropySpec{1.5}, 1e-3),
                    std::invalid_argument);
    CHECK_THROWS_AS(critical_variance(0.6, EntropySpec{1.0}, 1e-3),
                    std::invalid_argument);
    CHECK_THROWS_AS(critical_variance(0.25, EntropySpec{1.0}, 0.0),
                    std::invalid_argument);
  }
}
