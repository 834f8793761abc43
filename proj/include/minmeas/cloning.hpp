#pragma once

// Universal symmetric 1 -> 2 cloner
//   rho_c = (I(x)I + eta (b.sigma (x) I + I (x) b.sigma) + t sum_j sigma_j (x) sigma_j) / 4
// and the check that measuring the two clones optimally loses nothing
// against measuring the original.

#include <vector>

#include "minmeas/fidelity.hpp"
#include "minmeas/prior.hpp"
#include "minmeas/qlin.hpp"

namespace minmeas {

struct ClonerParams {
  double eta = 0.0;  // shrinking factor
  double t = 0.0;    // correlation coefficient
};

inline constexpr ClonerParams kOptimalCloner{2.0 / 3.0, 1.0 / 3.0};

/// Smallest eigenvalue of the clone over b in [0, 1]; the spectrum is affine
/// in b so the endpoints suffice.
double cloner_min_eigenvalue(const ClonerParams& params);

/// Throws unphysical_params when some b in the ball yields a negative eigenvalue.
DenseOperator clone(const BlochState& b, const ClonerParams& params);

/// Optimal mean fidelity when the two-copy minimal POVM (with re-optimized
/// guesses) is applied to the clone. For the optimal cloner this equals the
/// single-copy optimum.
double fbar_via_clone(const RadialPrior& prior, const ClonerParams& params = kOptimalCloner,
                      const DirectOptions& options = {});

struct PhysicalityPoint {
  double eta = 0.0;
  double t = 0.0;
  double min_eigenvalue = 0.0;
  bool physical = false;
};

/// Scan eta over `etas` with t = eta / 2.
std::vector<PhysicalityPoint> cloner_physicality_scan(const std::vector<double>& etas);

}  // namespace minmeas
