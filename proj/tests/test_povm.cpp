#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "minmeas/error.hpp"
#include "minmeas/povm.hpp"
#include "test_util.hpp"

using namespace minmeas;

namespace {

/// sum over all n! permutation operators V of V X V^dag, built literally.
DenseOperator literal_permutation_sum(const DenseOperator& x, int n) {
  std::vector<int> map(static_cast<std::size_t>(n));
  std::iota(map.begin(), map.end(), 0);
  DenseOperator acc = DenseOperator::zero(n);
  do {
    const DenseOperator v = permutation_operator(QubitPermutation(map));
    acc += v * x * v.adjoint();
  } while (std::next_permutation(map.begin(), map.end()));
  return acc;
}

DenseOperator direction_projector(const Vec3& n) {
  const Spinor s = coherent_spinor(n);
  return DenseOperator(1, s * s.adjoint());
}

DenseOperator kron_all(std::initializer_list<DenseOperator> parts) {
  auto it = parts.begin();
  DenseOperator acc = *it++;
  for (; it != parts.end(); ++it) acc = kron(acc, *it);
  return acc;
}

}  // namespace

TEST(Sectors, Examples) {
  const auto two = sectors(2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].twice_s, 0);
  EXPECT_EQ(two[0].d, 1);
  EXPECT_EQ(two[1].d, 1);

  const auto four = sectors(4);
  ASSERT_EQ(four.size(), 3u);
  EXPECT_EQ(four[0].d, 2);
  EXPECT_EQ(four[1].d, 3);
  EXPECT_EQ(four[2].d, 1);

  const auto five = sectors(5);
  EXPECT_EQ(five.front().twice_s, 1);
  EXPECT_THROW(sectors(0), Error);
  EXPECT_THROW(sectors(11), Error);
}

TEST(Sectors, MultiplicityFromSpinSpectrum) {
  // Count eigenvalues s(s+1) of the total S^2; each sector contributes
  // (2s+1) d_N(s) of them.
  for (int n = 1; n <= 6; ++n) {
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    const Eigen::VectorXd ev = total_spin_squared(n, all).eigenvalues();
    for (const SpinSector& sec : sectors(n)) {
      const double s = sec.twice_s / 2.0;
      const long hits = std::count_if(ev.begin(), ev.end(),
                                      [&](double e) { return std::abs(e - s * (s + 1)) < 1e-8; });
      EXPECT_EQ(hits, (sec.twice_s + 1) * sec.d) << "N=" << n << " 2s=" << sec.twice_s;
    }
  }
}

TEST(Sectors, DimensionSumRule) {
  for (int n = 1; n <= 10; ++n) {
    std::int64_t total = 0;
    for (const SpinSector& sec : sectors(n)) total += (sec.twice_s + 1) * sec.d;
    EXPECT_EQ(total, std::int64_t{1} << n) << n;
  }
}

TEST(Element, FullySymmetricSector) {
  const Vec3 n = Vec3(0.3, 0.1, -0.8).normalized();
  const DenseOperator o = build_element(3, 3, n, 2.0 / 3.0);
  const DenseOperator p = direction_projector(n);
  const DenseOperator expected = (2.0 / 3.0) * kron_all({p, p, p});
  EXPECT_LT(max_abs_diff(o, expected), 1e-12);
}

TEST(Element, FourCopySingletPair) {
  const DenseOperator ss = kron(singlet_projector(), singlet_projector());
  const DenseOperator expected = (1.0 / 12.0) * literal_permutation_sum(ss, 4);
  const DenseOperator o = build_element(4, 0, Vec3::UnitZ(), 1.0);
  EXPECT_LT(max_abs_diff(o, expected), 1e-12);
  EXPECT_EQ(o.rank(), 2);
}

TEST(Element, FourCopySpinOne) {
  const Vec3 n = Vec3(-0.5, 0.6, 0.2).normalized();
  const DenseOperator p = direction_projector(n);
  const DenseOperator x = kron_all({singlet_projector(), p, p});
  const DenseOperator expected = (3.0 / 32.0) * literal_permutation_sum(x, 4);
  const DenseOperator o = build_element(4, 2, n, 0.75);
  EXPECT_LT(max_abs_diff(o, expected), 1e-12);
  EXPECT_EQ(o.rank(), 3);
}

TEST(Element, TwoCopyForms) {
  EXPECT_LT(max_abs_diff(build_element(2, 0, Vec3::UnitZ(), 1.0), singlet_projector()), 1e-12);
  const Vec3 n = Vec3(1, 1, 1).normalized();
  const DenseOperator p = direction_projector(n);
  EXPECT_LT(max_abs_diff(build_element(2, 2, n, 0.75), 0.75 * kron(p, p)), 1e-12);
}

TEST(Element, ThreeCopySpinHalfExplicitForm) {
  // |sigma><sigma| (x) |n><n| + (1/3)(V_AC - V_BC) (same) (V_AC - V_BC)
  for (const Vec3& n : {Vec3(0, 0, 1), Vec3(0, 0, -1)}) {
    const DenseOperator x = kron(singlet_projector(), direction_projector(n));
    const DenseOperator w = permutation_operator(QubitPermutation::transposition(3, 0, 2)) -
                            permutation_operator(QubitPermutation::transposition(3, 1, 2));
    const DenseOperator expected = x + (1.0 / 3.0) * (w * x * w);
    EXPECT_LT(max_abs_diff(build_element(3, 1, n, 1.0), expected), 1e-10);
  }
}

TEST(Element, TraceIsWeightTimesMultiplicity) {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 6; ++n) {
    for (const SpinSector& sec : sectors(n)) {
      const double c_sq = 0.2 + std::uniform_real_distribution<double>(0, 1)(rng);
      const DenseOperator o = build_element(n, sec.twice_s, testutil::random_unit(rng), c_sq);
      EXPECT_NEAR(o.trace().real(), c_sq * static_cast<double>(sec.d), 1e-10);
    }
  }
}

TEST(Element, Errors) {
  EXPECT_THROW(build_element(3, 2, Vec3::UnitZ(), 1.0), Error);
  EXPECT_THROW(build_element(2, 4, Vec3::UnitZ(), 1.0), Error);
  EXPECT_THROW(build_element(11, 1, Vec3::UnitZ(), 1.0), Error);
}

TEST(Povm, CountsRanksAndIdentity) {
  const int counts[] = {2, 5, 8, 15, 20};
  for (int n = 1; n <= 5; ++n) {
    const Povm povm = build_povm(n, RadialPrior::uniform_ball());
    EXPECT_EQ(static_cast<int>(povm.elements.size()), counts[n - 1]);
    EXPECT_LT(povm.identity_residual, 1e-9);
    EXPECT_LT(identity_residual(povm), 1e-9);
    for (const PovmElement& e : povm.elements) {
      EXPECT_EQ(e.op.rank(), e.sector.d) << "N=" << n << " 2s=" << e.sector.twice_s;
      EXPECT_TRUE(e.op.is_positive_semidefinite());
      EXPECT_TRUE(e.op.is_hermitian());
    }
  }
}

TEST(Povm, FourCopyRankProfile) {
  const Povm povm = build_povm(4, RadialPrior::pure());
  int r1 = 0, r2 = 0, r3 = 0;
  for (const PovmElement& e : povm.elements) {
    const int r = e.op.rank(1e-8);
    r1 += r == 1;
    r2 += r == 2;
    r3 += r == 3;
  }
  EXPECT_EQ(r1, 10);
  EXPECT_EQ(r2, 1);
  EXPECT_EQ(r3, 4);
}

TEST(Povm, StructureIndependentOfPrior) {
  const Povm a = build_povm(3, RadialPrior::pure());
  const Povm b = build_povm(3, RadialPrior::uniform_ball());
  for (std::size_t i = 0; i < a.elements.size(); ++i) {
    EXPECT_TRUE(a.elements[i].op.matrix() == b.elements[i].op.matrix());
    EXPECT_EQ(a.elements[i].direction, b.elements[i].direction);
  }
}

TEST(Povm, TwoCopyLayout) {
  const Povm povm = build_povm(2, RadialPrior::uniform_ball());
  ASSERT_EQ(povm.elements.size(), 5u);
  EXPECT_EQ(povm.elements[0].sector.twice_s, 0);
  EXPECT_EQ(povm.elements[0].guess_r, 0.0);
  EXPECT_LT(max_abs_diff(povm.elements[0].op, singlet_projector()), 1e-12);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_EQ(povm.elements[i].op.rank(), 1);
}

TEST(Povm, MissingDirectionSet) {
  DirectionCatalog partial;
  partial.set(builtin_direction_set(1));
  partial.set(builtin_direction_set(2));
  try {
    build_povm(4, RadialPrior::pure(), partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_direction_set);
  }
}

TEST(Povm, CorruptedSetFailsIdentityCheck) {
  DirectionCatalog bad = DirectionCatalog::standard();
  DirectionSet tetra = builtin_direction_set(2);
  tetra.entries[1].n = Vec3(0.1, 0.9, 0.3).normalized();
  bad.set(tetra);
  try {
    build_povm(2, RadialPrior::pure(), bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::identity_residual);
  }
}

TEST(Probability, Examples) {
  const Povm three = build_povm(3, RadialPrior::pure());
  const PovmElement& top = three.elements[2];  // first octahedron entry, along +z
  ASSERT_EQ(top.sector.twice_s, 3);
  ASSERT_EQ(top.direction, Vec3::UnitZ());
  EXPECT_NEAR(outcome_probability(top, BlochState(0, 0, 1)), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(outcome_probability_trace(top, BlochState(0, 0, 1)), 2.0 / 3.0, 1e-12);

  const Povm two = build_povm(2, RadialPrior::pure());
  EXPECT_NEAR(outcome_probability(two.elements[0], BlochState(0, 0, 0.5)), 0.1875, 1e-15);
  EXPECT_NEAR(outcome_probability_trace(two.elements[0], BlochState(0, 0, 0.5)), 0.1875, 1e-12);
}

TEST(Probability, ClosedFormMatchesTrace) {
  std::mt19937_64 rng(8);
  std::vector<Povm> povms;
  for (int n = 1; n <= 5; ++n) povms.push_back(build_povm(n, RadialPrior::pure()));
  for (int t = 0; t < 100; ++t) {
    const Povm& p = povms[static_cast<std::size_t>(t % 5)];
    const auto& e = p.elements[rng() % p.elements.size()];
    const BlochState b(testutil::random_in_ball(rng));
    EXPECT_NEAR(outcome_probability(e, b), outcome_probability_trace(e, b), 1e-10);
  }
}

TEST(Probability, Totals) {
  for (int n = 1; n <= 5; ++n) {
    const Povm povm = build_povm(n, RadialPrior::pure());
    double total = 0.0, low = 0.0;
    for (const auto& e : povm.elements) {
      total += outcome_probability(e, BlochState(0.3, 0, 0));
      if (e.sector.twice_s < n) low += outcome_probability(e, BlochState(0.6, 0.0, 0.8));
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_NEAR(low, 0.0, 1e-15);
  }
}

TEST(Guess, Examples) {
  for (int n = 1; n <= 5; ++n) {
    EXPECT_NEAR(guess_magnitude(RadialPrior::pure(), n, n), 1.0, 1e-15);
    for (int ts = n % 2; ts <= n; ts += 2) EXPECT_EQ(guess_magnitude(RadialPrior::random(), n, ts), 0.0);
  }
  EXPECT_EQ(guess_magnitude(RadialPrior::pure(), 2, 0), 0.0);
  EXPECT_EQ(guess_magnitude(GIntegrals{0.0, 0.0}), 0.0);
  EXPECT_NEAR(guess_magnitude(GIntegrals{3.0, 4.0}), 0.8, 1e-15);
}

TEST(Json, Layout) {
  const Povm povm = build_povm(2, RadialPrior::uniform_ball());
  const auto j = nlohmann::json::parse(povm_to_json(povm, true));
  EXPECT_EQ(j["copies"], 2);
  EXPECT_EQ(j["element_count"], 5);
  ASSERT_EQ(j["elements"].size(), 5u);
  const auto& e = j["elements"][1];
  EXPECT_EQ(e["twice_s"], 2);
  EXPECT_EQ(e["dim"], 4);
  EXPECT_EQ(e["matrix"].size(), 16u);
  EXPECT_EQ(e["n"].size(), 3u);
  EXPECT_EQ(e["guess_r"].get<double>(), povm.elements[1].guess_r);

  const auto light = nlohmann::json::parse(povm_to_json(povm, false));
  EXPECT_FALSE(light["elements"][0].contains("matrix"));
}
