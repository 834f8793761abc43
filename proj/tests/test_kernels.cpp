// Serial and parallel paths of every kernel must agree bit for bit, and the
// arrangement reduction must match the literal permutation average.

#include <random>

#include <gtest/gtest.h>

#include "minmeas/fidelity.hpp"
#include "minmeas/kernels.hpp"
#include "minmeas/povm.hpp"
#include "test_util.hpp"

using namespace minmeas;

namespace {

long double_factorial(int n) { return n <= 1 ? 1 : n * double_factorial(n - 2); }

long binom(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST(Kernels, TensorPowerSerialEqualsParallel) {
  const Eigen::Matrix2cd rho = density_from_bloch(BlochState(0.2, -0.5, 0.3)).matrix();
  for (int n = 1; n <= 8; ++n) {
    const CMatrix a = kernels::tensor_power(rho, n, Exec::serial);
    const CMatrix b = kernels::tensor_power(rho, n, Exec::parallel);
    ASSERT_TRUE(a == b) << n;
  }
}

TEST(Kernels, ArrangementCounts) {
  for (int n = 1; n <= 8; ++n) {
    for (int p = 0; 2 * p <= n; ++p) {
      EXPECT_EQ(static_cast<long>(kernels::arrangements(n, p).size()),
                binom(n, 2 * p) * double_factorial(2 * p - 1))
          << n << "," << p;
    }
  }
}

TEST(Kernels, ArrangementSumSerialEqualsParallel) {
  const Spinor z = coherent_spinor(Vec3(0.3, -0.4, 0.5).normalized());
  for (int n = 2; n <= 7; ++n) {
    const auto arr = kernels::arrangements(n, n / 2 - (n % 2 == 0 ? 1 : 0));
    const CMatrix a = kernels::arrangement_sum(n, arr, z, Exec::serial);
    const CMatrix b = kernels::arrangement_sum(n, arr, z, Exec::parallel);
    ASSERT_TRUE(a == b) << n;
  }
}

TEST(Kernels, CosetReductionMatchesPermutationSum) {
  std::mt19937_64 rng(31);
  for (int n = 1; n <= 6; ++n) {
    for (int ts = n % 2; ts <= n; ts += 2) {
      const Vec3 dir = testutil::random_unit(rng);
      const DenseOperator fast = build_element(n, ts, dir, 0.7);
      const DenseOperator slow = build_element_reference(n, ts, dir, 0.7);
      EXPECT_LT(max_abs_diff(fast, slow), 1e-13) << "N=" << n << " 2s=" << ts;
    }
  }
}

TEST(Kernels, ElementMomentsSerialEqualsParallel) {
  const RadialPrior prior = RadialPrior::uniform_ball();
  const Povm povm = build_povm(3, prior);
  const auto a = element_moments(povm, prior, 32, 5, Exec::serial);
  const auto b = element_moments(povm, prior, 32, 5, Exec::parallel);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].P, b[i].P);
    EXPECT_EQ(a[i].A, b[i].A);
    EXPECT_EQ(a[i].B, b[i].B);
  }
}

TEST(Kernels, PovmSerialEqualsParallel) {
  PovmOptions serial;
  serial.exec = Exec::serial;
  const RadialPrior prior = RadialPrior::uniform_ball();
  const Povm a = build_povm(4, prior, serial);
  const Povm b = build_povm(4, prior);
  ASSERT_EQ(a.elements.size(), b.elements.size());
  for (std::size_t i = 0; i < a.elements.size(); ++i) {
    EXPECT_TRUE(a.elements[i].op.matrix() == b.elements[i].op.matrix()) << i;
  }
}
