#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "kqr/matrixcore.hpp"
#include "kqr/spectralstats.hpp"

using namespace kqr;

TEST_CASE("r_statistic of an equally spaced ladder is exactly 1") {
  RVec levels(50);
  for (int i = 0; i < 50; ++i) levels[i] = 0.25 * i - 3.0;
  CHECK(r_statistic(levels) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("r_statistic matches a hand-computed example") {
  RVec levels(4);
  levels << 0.0, 1.0, 3.0, 4.0;  // spacings 1, 2, 1 -> ratios 0.5, 0.5
  CHECK(r_statistic(levels) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("r_statistic is invariant under affine maps and input order") {
  SplitMix64 rng(42);
  RVec levels = testing::poisson_levels(rng, 400);
  double base = r_statistic(levels);
  RVec mapped = 3.7 * levels;
  mapped.array() -= 11.0;
  CHECK(r_statistic(mapped) == doctest::Approx(base).epsilon(1e-12));
  RVec shuffled = levels;
  std::reverse(shuffled.data(), shuffled.data() + shuffled.size());
  CHECK(r_statistic(shuffled) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("r_statistic hits the Poisson reference on a large sample") {
  SplitMix64 rng(2024);
  RVec levels = testing::poisson_levels(rng, 20000);
  CHECK(r_statistic(levels) == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(0.02));
}

TEST_CASE("r_statistic hits the rigid-ensemble band on a random symmetric matrix") {
  SplitMix64 rng(7);
  RMat m = testing::gaussian_symmetric(rng, 400);
  Eigen::SelfAdjointEigenSolver<RMat> es(m);
  RVec levels = es.eigenvalues();
  // Use the central half to avoid edge effects of the semicircle density.
  RVec central = levels.segment(100, 200);
  double r = r_statistic(central);
  CHECK(r > 0.50);
  CHECK(r < 0.57);
}

TEST_CASE("r_statistic collapses numerically tied levels") {
  RVec tied(5);
  tied << 0.0, 0.0, 1.0, 2.0, 3.0;  // the tie collapses; remaining ladder is rigid
  CHECK(r_statistic(tied) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("r_statistic needs at least three distinct levels") {
  RVec two(2);
  two << 0.0, 1.0;
  CHECK_THROWS_AS(r_statistic(two), std::invalid_argument);
  RVec same(4);
  same << 2.0, 2.0, 2.0, 2.0;
  CHECK_THROWS_AS(r_statistic(same), std::invalid_argument);
}

TEST_CASE("r_statistic_phases closes the spacing sequence on the circle") {
  // Equally spaced phases around the full circle: every spacing including the
  // wrap-around one is identical, so the statistic is exactly 1.
  const int n = 8;
  RVec phases(n);
  for (int i = 0; i < n; ++i) phases[i] = -kPi + kTwoPi * (i + 0.5) / n;
  CHECK(r_statistic_phases(phases) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("r_statistic_phases is invariant under rigid rotations") {
  SplitMix64 rng(99);
  const int n = 64;
  RVec phases(n);
  for (int i = 0; i < n; ++i) phases[i] = rng.uniform(-kPi, kPi);
  std::sort(phases.data(), phases.data() + n);
  double base = r_statistic_phases(phases);
  for (double delta : {0.3, 1.9, -2.5}) {
    RVec rotated(n);
    for (int i = 0; i < n; ++i) {
      double p = phases[i] + delta;
      while (p > kPi) p -= kTwoPi;
      while (p <= -kPi) p += kTwoPi;
      rotated[i] = p;
    }
    CHECK(r_statistic_phases(rotated) == doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("r_statistic_phases keeps degenerate phases as zero spacings") {
  RVec phases(4);
  phases << 0.0, 0.0, 1.0, 2.0;
  // Circular spacings: {0, 1, 1, 2*pi - 2}; consecutive ratios
  // {0, 1, 1/(2*pi - 2), 0}.
  double expected = (0.0 + 1.0 + 1.0 / (kTwoPi - 2.0) + 0.0) / 4.0;
  CHECK(r_statistic_phases(phases) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("r_statistic_phases requires three distinct phase groups") {
  RVec degenerate(5);
  degenerate << 0.5, 0.5, 0.5, 0.5, 0.5;
  CHECK_THROWS_AS(r_statistic_phases(degenerate), std::invalid_argument);
  RVec pair(4);
  pair << -1.0, -1.0, 2.0, 2.0;
  CHECK_THROWS_AS(r_statistic_phases(pair), std::invalid_argument);
}

TEST_CASE("heisenberg_time of a unit ladder is 2*pi*hbar") {
  RVec levels(100);
  for (int i = 0; i < 100; ++i) levels[i] = static_cast<double>(i);
  CHECK(heisenberg_time(levels, 1.0) == doctest::Approx(kTwoPi).epsilon(1e-12));
  CHECK(heisenberg_time(levels, 0.5) == doctest::Approx(kPi).epsilon(1e-12));
  RVec doubled = 2.0 * levels;
  CHECK(heisenberg_time(doubled, 1.0) == doctest::Approx(kPi).epsilon(1e-12));
}

TEST_CASE("heisenberg_time trims spectral edges") {
  RVec levels(100);
  for (int i = 0; i < 100; ++i) levels[i] = static_cast<double>(i);
  levels[0] = -1e6;  // wild edge levels must not affect the mean spacing
  levels[99] = 1e6;
  CHECK(heisenberg_time(levels, 1.0) == doctest::Approx(kTwoPi).epsilon(1e-12));
}

TEST_CASE("spectral_summary bundles the individual statistics") {
  SplitMix64 rng(5);
  RVec levels = testing::poisson_levels(rng, 300);
  RVec reversed = levels.reverse();
  SpectralSummary s = spectral_summary(reversed, 2.0);
  CHECK(s.levels[0] <= s.levels[s.levels.size() - 1]);
  CHECK(s.r_bar == doctest::Approx(r_statistic(levels)).epsilon(1e-13));
  CHECK(s.t_heisenberg == doctest::Approx(heisenberg_time(levels, 2.0)).epsilon(1e-13));
  CHECK(s.t_heisenberg == doctest::Approx(kTwoPi * 2.0 / s.mean_spacing).epsilon(1e-13));
}
