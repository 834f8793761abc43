#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "minmeas/error.hpp"
#include "minmeas/oracle.hpp"
#include "test_util.hpp"

using namespace minmeas;

namespace {

const double kTwoPointValue = 0.5 * (1.0 + 1.0 / std::sqrt(10.0));

}  // namespace

TEST(GuessScan, Examples) {
  for (int n = 1; n <= 4; ++n) {
    const ScanResult pure = scan_guess_magnitude(RadialPrior::pure(), n, n);
    EXPECT_NEAR(pure.best_parameter, 1.0, 1e-12);
    const ScanResult random = scan_guess_magnitude(RadialPrior::random(), n, n);
    EXPECT_NEAR(random.best_parameter, 0.0, 1e-12);
  }
  const double i_half = 3.0 * std::numbers::pi / 32.0;
  const double expected = 0.6 / std::sqrt(36.0 * i_half * i_half + 0.36);
  const ScanResult ball = scan_guess_magnitude(RadialPrior::uniform_ball(), 1, 1);
  EXPECT_NEAR(ball.closed_prediction, expected, 1e-12);
  EXPECT_NEAR(expected, 0.3215, 1e-4);
  EXPECT_LE(std::abs(ball.best_parameter - expected), 1e-3);
}

TEST(GuessScan, RandomPriorsAllSectors) {
  std::mt19937_64 rng(51);
  for (int i = 0; i < 10; ++i) {
    const RadialPrior p = testutil::random_prior(rng, i);
    for (int n = 1; n <= 4; ++n) {
      for (int ts = n % 2; ts <= n; ts += 2) {
        const ScanResult s = scan_guess_magnitude(p, n, ts);
        EXPECT_LE(s.gap, 1e-3 + 1e-12) << p.id() << " N=" << n << " 2s=" << ts;
        const double g2 = g_integrals(p, n, ts).g2;
        if (std::abs(g2) > 1e-9 && std::abs(s.best_parameter) > 1e-3) {
          EXPECT_EQ(std::signbit(s.best_parameter), std::signbit(g2));
        }
      }
    }
  }
}

TEST(FreeGuesses, RecoverClosedForm) {
  for (const RadialPrior& p : {RadialPrior::pure(), RadialPrior::uniform_ball(), parse_prior_spec("two-point")}) {
    for (int n = 1; n <= 3; ++n) {
      const Povm povm = build_povm(n, p);
      const FreeGuessResult r = optimize_free_guesses(povm, p);
      const double closed = fbar_max_closed(p, n).value_closed;
      EXPECT_NEAR(r.value, closed, 1e-6) << p.id() << " N=" << n;
      EXPECT_LE(r.value, closed + 1e-9);
    }
  }
}

TEST(FreeGuesses, Directions) {
  const Povm one = build_povm(1, RadialPrior::pure());
  const FreeGuessResult r1 = optimize_free_guesses(one, RadialPrior::pure());
  for (std::size_t i = 0; i < one.elements.size(); ++i) {
    EXPECT_NEAR(r1.guesses[i].dot(one.elements[i].direction), 1.0, 1e-4);
  }

  const RadialPrior ball = RadialPrior::uniform_ball();
  const Povm two = build_povm(2, ball);
  EXPECT_LT(optimize_free_guesses(two, ball).guesses[0].norm(), 1e-4);

  const Povm three = build_povm(3, ball);
  const FreeGuessResult r3 = optimize_free_guesses(three, ball);
  const double r_half = guess_magnitude(ball, 3, 1);
  const double r_top = guess_magnitude(ball, 3, 3);
  EXPECT_GT(std::abs(r_top - r_half), 0.05);
  for (std::size_t i = 0; i < three.elements.size(); ++i) {
    const double expected = three.elements[i].sector.twice_s == 1 ? r_half : r_top;
    EXPECT_NEAR(r3.guesses[i].dot(three.elements[i].direction), expected, 1e-3);
  }
}

TEST(General, AgreesWithDirect) {
  const RadialPrior p = RadialPrior::uniform_ball();
  for (int n = 1; n <= 3; ++n) {
    const Povm povm = build_povm(n, p);
    std::vector<DenseOperator> ops;
    for (const auto& e : povm.elements) ops.push_back(e.op);
    EXPECT_NEAR(fbar_general(ops, n, p), fbar_max_closed(p, n).value_closed, 1e-9);
  }
}

TEST(Perturb, NoImprovement) {
  for (int n : {1, 2}) {
    const RadialPrior p = RadialPrior::uniform_ball();
    const Povm povm = build_povm(n, p);
    const PerturbReport r = perturb_povm_check(povm, p, 100, 1e-2, 9);
    EXPECT_EQ(r.trials, 100);
    EXPECT_EQ(r.improvements, 0);
    EXPECT_EQ(r.accepted + r.rejected, 100);
    EXPECT_GT(r.accepted, 0);
    EXPECT_NEAR(r.baseline, fbar_max_closed(p, n).value_closed, 1e-9);
    EXPECT_LE(r.best, r.baseline + r.tolerance);
  }
}

TEST(Perturb, ZeroStepIsBaseline) {
  const RadialPrior p = parse_prior_spec("two-point");
  const Povm povm = build_povm(2, p);
  const PerturbReport r = perturb_povm_check(povm, p, 5, 0.0, 3);
  EXPECT_EQ(r.accepted, 5);
  for (double v : r.values) EXPECT_EQ(v, r.baseline);
}

TEST(Perturb, SeedDeterminesOutcome) {
  const RadialPrior p = RadialPrior::uniform_ball();
  const Povm povm = build_povm(2, p);
  const PerturbReport a = perturb_povm_check(povm, p, 8, 1e-2, 42);
  const PerturbReport b = perturb_povm_check(povm, p, 8, 1e-2, 42, kDefaultQuadratureOrder, Exec::serial);
  ASSERT_EQ(a.values.size(), b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (std::isnan(a.values[i])) {
      EXPECT_TRUE(std::isnan(b.values[i]));
    } else {
      EXPECT_EQ(a.values[i], b.values[i]);
    }
  }
}

TEST(VonNeumann, Isotropic) {
  const AxisScan pure = vonneumann_exhaustive_n1(RadialPrior::pure());
  EXPECT_GT(pure.values.size(), 50u);
  for (double v : pure.values) EXPECT_NEAR(v, 2.0 / 3.0, 1e-10);
  EXPECT_LT(pure.variance, 1e-10);

  const AxisScan two = vonneumann_exhaustive_n1(parse_prior_spec("two-point"));
  for (double v : two.values) EXPECT_NEAR(v, kTwoPointValue, 1e-10);
  EXPECT_NEAR(two.closed, kTwoPointValue, 1e-12);
}

TEST(TwoPoint, ScanFindsKnownMinimum) {
  const TwoPointScan s = scan_two_point_priors(1, 20, 10);
  EXPECT_GT(s.evaluated, 0);
  EXPECT_NEAR(s.best_value, kTwoPointValue, 1e-9);
  EXPECT_NEAR(s.mass0, 0.1, 1e-12);
  EXPECT_EQ(s.radius0, 0.0);
  EXPECT_EQ(s.radius1, 1.0);
}

TEST(Verify, PassesOnReferencePriors) {
  VerifyOptions opts;
  opts.perturb_trials = 5;
  for (const RadialPrior& p : {RadialPrior::pure(), RadialPrior::uniform_ball()}) {
    for (int n : {1, 2, 4}) {
      opts.copies = n;
      const VerifyReport r = verify_suite(p, DirectionCatalog::standard(), opts);
      EXPECT_TRUE(r.pass()) << r.to_text();
    }
  }
}

TEST(Verify, IdentityResidualReported) {
  VerifyOptions opts;
  opts.copies = 4;
  opts.perturb_trials = 2;
  const VerifyReport r = verify_suite(RadialPrior::uniform_ball(), DirectionCatalog::standard(), opts);
  const auto j = nlohmann::json::parse(r.to_json());
  bool found = false;
  for (const auto& c : j["checks"]) {
    if (c["name"] == "identity_resolution") {
      found = true;
      EXPECT_LT(c["residual"].get<double>(), 1e-9);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(j["seed"], 1);
}

TEST(Verify, CorruptedSetNamesDesignCheck) {
  DirectionCatalog bad = DirectionCatalog::standard();
  DirectionSet tetra = builtin_direction_set(2);
  tetra.entries[2].c_sq *= 1.1;
  bad.set(tetra);
  VerifyOptions opts;
  opts.copies = 2;
  const VerifyReport r = verify_suite(RadialPrior::pure(), bad, opts);
  EXPECT_FALSE(r.pass());
  ASSERT_NE(r.first_failure(), nullptr);
  EXPECT_EQ(r.first_failure()->name, "design_2s2");
  EXPECT_GT(r.first_failure()->residual, 1e-3);
}
