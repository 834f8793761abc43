#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "minmeas/cloning.hpp"
#include "minmeas/error.hpp"
#include "test_util.hpp"

using namespace minmeas;

namespace {

std::vector<double> sorted_eigenvalues(const DenseOperator& op) {
  const Eigen::VectorXd ev = op.eigenvalues();
  std::vector<double> v(ev.begin(), ev.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(Clone, MaximallyMixedInput) {
  for (const ClonerParams p : {ClonerParams{0.3, 0.2}, kOptimalCloner, ClonerParams{0.0, -0.5}}) {
    const auto ev = sorted_eigenvalues(clone(BlochState(), p));
    std::vector<double> expected{(1 + p.t) / 4, (1 + p.t) / 4, (1 + p.t) / 4, (1 - 3 * p.t) / 4};
    std::sort(expected.begin(), expected.end());
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(ev[i], expected[i], 1e-14);
  }
}

TEST(Clone, OptimalPureInput) {
  const auto ev = sorted_eigenvalues(clone(BlochState(0, 0, 1), kOptimalCloner));
  EXPECT_NEAR(ev[0], 0.0, 1e-14);
  EXPECT_NEAR(ev[1], 0.0, 1e-14);
  EXPECT_NEAR(ev[2], 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(ev[3], 2.0 / 3.0, 1e-14);
}

TEST(Clone, OptimalCloneLivesInTriplet) {
  std::mt19937_64 rng(3);
  const CVector sigma = singlet_state();
  const DirectionSet tetra = builtin_direction_set(2);
  for (int i = 0; i < 50; ++i) {
    const BlochState b(testutil::random_in_ball(rng));
    const DenseOperator rc = clone(b, kOptimalCloner);
    EXPECT_TRUE(rc.is_hermitian());
    EXPECT_NEAR(rc.trace().real(), 1.0, 1e-14);
    EXPECT_NEAR((sigma.adjoint() * rc.matrix() * sigma)(0, 0).real(), 0.0, 1e-12);
    for (const auto& e : tetra.entries) {
      const Spinor s = coherent_spinor(e.n);
      const Spinor f[] = {s, s};
      const CVector tau = product_state(f);
      const double p = (tau.adjoint() * rc.matrix() * tau)(0, 0).real();
      EXPECT_NEAR(p, (1.0 + b.vector().dot(e.n)) / 3.0, 1e-12);
    }
  }
}

TEST(Clone, RejectsUnphysicalParams) {
  try {
    clone(BlochState(0, 0, 0.1), {0.9, 0.45});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unphysical_params);
  }
  EXPECT_THROW(clone(BlochState(), {0.0, 0.5}), Error);
  EXPECT_NEAR(cloner_min_eigenvalue(kOptimalCloner), 0.0, 1e-14);
}

TEST(Physicality, Boundary) {
  const auto scan = cloner_physicality_scan({0.0, 0.3, 0.6, 2.0 / 3.0, 0.7, 0.9});
  ASSERT_EQ(scan.size(), 6u);
  for (const auto& pt : scan) {
    EXPECT_NEAR(pt.t, pt.eta / 2, 1e-15);
    EXPECT_EQ(pt.physical, pt.eta <= 2.0 / 3.0 + 1e-12) << pt.eta;
    // The b = 1 eigenvalue (1 - 2 eta + t)/4 is the binding one here.
    EXPECT_NEAR(pt.min_eigenvalue, std::min((1 - 2 * pt.eta + pt.t) / 4, (1 - 3 * pt.t) / 4), 1e-14);
  }
}

TEST(ViaClone, Examples) {
  EXPECT_NEAR(fbar_via_clone(RadialPrior::pure()), 2.0 / 3.0, 1e-8);
  EXPECT_NEAR(fbar_via_clone(parse_prior_spec("two-point")), 0.5 * (1 + 1 / std::sqrt(10.0)), 1e-8);
  EXPECT_NEAR(fbar_via_clone(RadialPrior::uniform_ball()),
              fbar_max_closed(RadialPrior::uniform_ball(), 1).value_closed, 1e-8);
}

TEST(ViaClone, RandomPriors) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 20; ++i) {
    const RadialPrior p = testutil::random_prior(rng, i);
    EXPECT_NEAR(fbar_via_clone(p), fbar_max_closed(p, 1).value_closed, 1e-8) << p.id();
  }
}

TEST(ViaClone, SuboptimalClonerLoses) {
  const RadialPrior p = RadialPrior::pure();
  EXPECT_LT(fbar_via_clone(p, {0.5, 0.25}), 2.0 / 3.0 - 1e-3);
}
