#pragma once

// Brute-force cross-checks of the optimality claims: grid scans of the guess
// magnitude, unconstrained guess optimization, random perturbations of the
// direction sets, an exhaustive single-copy von Neumann scan, and the
// verification suite run by the command-line tool.
//
// What is certified is local optimality within the searched families; global
// optimality over all POVMs is not checked here.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minmeas/design.hpp"
#include "minmeas/exec.hpp"
#include "minmeas/fidelity.hpp"
#include "minmeas/povm.hpp"
#include "minmeas/prior.hpp"

namespace minmeas {

struct ScanResult {
  std::string grid;                 // human-readable grid description
  double best_value = 0.0;
  double best_parameter = 0.0;
  double closed_prediction = 0.0;   // prediction for the parameter (or the value)
  double gap = 0.0;                 // |best_parameter - prediction| (or value spread)
  bool flat = false;                // every grid point gave the same value
};

/// Sector contribution (2s+1) d <p (1 + b u r + sqrt(1-b^2) sqrt(1-r^2))/2>
/// evaluated from scratch on r = -1, -1+step, ..., 1. Ties go to the
/// smallest |r|. closed_prediction is r_{N,s}.
ScanResult scan_guess_magnitude(const RadialPrior& prior, int copies, int twice_s,
                                double step = 1e-3, int order = kDefaultQuadratureOrder);

struct FreeGuessResult {
  double value = 0.0;               // mean fidelity with the optimized guesses
  std::vector<Vec3> guesses;        // one per element
  int evaluations = 0;
};

/// Maximizes each element's contribution over the whole Bloch ball with
/// Nelder-Mead, starting from the centre. Uses direct-quadrature moments.
/// Throws optimizer_nonconvergence.
FreeGuessResult optimize_free_guesses(const Povm& povm, const RadialPrior& prior,
                                      const DirectOptions& options = {});

/// Optimal-guess mean fidelity of an arbitrary POVM on `copies` qubits,
/// by a product rule over the sphere that is exact in the angles.
double fbar_general(const std::vector<DenseOperator>& elements, int copies,
                    const RadialPrior& prior, int radial_order = kDefaultQuadratureOrder,
                    Exec exec = Exec::parallel);

struct PerturbReport {
  int copies = 0;
  int trials = 0;
  int accepted = 0;
  int rejected = 0;        // weight re-solve produced a non-positive weight
  int improvements = 0;    // accepted trials above baseline + tolerance
  double step = 0.0;
  std::uint64_t seed = 0;
  double baseline = 0.0;
  double best = 0.0;       // largest value over accepted trials
  double tolerance = 1e-9;
  std::vector<double> values;  // per trial, NaN when rejected
};

/// Each trial moves every direction by `step` times a Gaussian vector,
/// re-solves the sector weights by least squares against the design
/// condition, restores sum O = I by M^{-1/2} O M^{-1/2} and evaluates the
/// optimal-guess mean fidelity. The baseline runs the same pipeline with a
/// zero move.
PerturbReport perturb_povm_check(const Povm& povm, const RadialPrior& prior, int trials,
                                 double step, std::uint64_t seed,
                                 int radial_order = kDefaultQuadratureOrder,
                                 Exec exec = Exec::parallel);

struct AxisScan {
  std::vector<Vec3> axes;
  std::vector<double> values;
  double mean = 0.0;
  double variance = 0.0;
  double closed = 0.0;
};

/// Projective single-copy measurements along every axis of a polar x
/// azimuth grid.
AxisScan vonneumann_exhaustive_n1(const RadialPrior& prior, int polar_steps = 7,
                                  int azimuth_steps = 12, int order = kDefaultQuadratureOrder);

struct TwoPointScan {
  double best_value = 0.0;
  double mass0 = 0.0;
  double radius0 = 0.0;
  double radius1 = 0.0;
  int evaluated = 0;
};

/// Minimizes fbar_max_closed over priors mass0 @ radius0 + (1 - mass0) @ radius1
/// on a grid with radius0 < radius1.
TwoPointScan scan_two_point_priors(int copies, int mass_steps, int radius_steps);

// ------------------------------------------------------------ verify suite

struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  int copies = 2;
  std::uint64_t seed = 1;
  int quadrature_order = kDefaultQuadratureOrder;
  int perturb_trials = 20;
  Exec exec = Exec::parallel;
};

struct VerifyReport {
  int copies = 0;
  std::string prior_id;
  std::uint64_t seed = 0;
  std::vector<Check> checks;

  bool pass() const;
  const Check* first_failure() const;
  std::string to_text() const;
  std::string to_json() const;
};

VerifyReport verify_suite(const RadialPrior& prior, const DirectionCatalog& catalog,
                          const VerifyOptions& options);

}  // namespace minmeas
