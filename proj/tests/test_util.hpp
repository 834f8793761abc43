#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "minmeas/prior.hpp"
#include "minmeas/qlin.hpp"

namespace minmeas::testutil {

/// Random valid prior: up to three point masses with radii in [0, 1) plus,
/// most of the time, a smooth part (uniform ball or a random table).
inline RadialPrior random_prior(std::mt19937_64& rng, int tag = 0) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> n_points(0, 3);
  const int points = n_points(rng);
  const bool smooth = points == 0 || uni(rng) < 0.7;

  std::vector<double> w;
  for (int i = 0; i < points + (smooth ? 1 : 0); ++i) w.push_back(0.05 + uni(rng));
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;

  std::vector<PointMass> pm;
  double used = 0.0;
  for (int i = 0; i < points; ++i) {
    pm.push_back({0.999 * uni(rng), w[static_cast<std::size_t>(i)]});
    used += w[static_cast<std::size_t>(i)];
  }
  std::optional<RadialDensity> density;
  if (smooth) {
    const double weight = 1.0 - used;
    if (uni(rng) < 0.5) {
      density = RadialDensity::uniform_ball(weight);
    } else {
      std::vector<double> b{0.0, 0.25, 0.5, 0.75, 1.0};
      std::vector<double> f;
      for (std::size_t i = 0; i < b.size(); ++i) f.push_back(0.1 + uni(rng));
      density = RadialDensity::table(b, f, weight);
    }
  }
  return RadialPrior(std::move(pm), std::move(density), "random-" + std::to_string(tag));
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Vec3(g(rng), g(rng), g(rng)).normalized();
}

inline Vec3 random_in_ball(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  return random_unit(rng) * std::cbrt(uni(rng));
}

/// Basis ket |x> on n qubits from a bit string such as "010".
inline CVector ket(const std::string& bits) {
  const auto n = static_cast<int>(bits.size());
  CVector v = CVector::Zero(Eigen::Index{1} << n);
  Eigen::Index idx = 0;
  for (char c : bits) idx = 2 * idx + (c == '1' ? 1 : 0);
  v(idx) = 1.0;
  return v;
}

}  // namespace minmeas::testutil
