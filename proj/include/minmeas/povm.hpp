#pragma once

// Minimal optimal POVM for N copies. The N-qubit space splits into spin
// sectors s = s0 .. N/2, each appearing with multiplicity d_N(s). Sector s
// contributes one element per entry of a 2s direction set:
//
//   O_{s,i} = c_i^2 (2s+1)/(N/2+s+1) C(N, N/2+s)
//             * avg_V V (|sigma><sigma|^{(x)(N/2-s)} (x) |n_i><n_i|^{(x)2s}) V^dag
//
// averaged over all qubit permutations V.

#include <cstdint>
#include <string>
#include <vector>

#include "minmeas/design.hpp"
#include "minmeas/exec.hpp"
#include "minmeas/prior.hpp"
#include "minmeas/qlin.hpp"

namespace minmeas {

struct SpinSector {
  int copies = 0;
  int twice_s = 0;
  std::int64_t d = 0;   // multiplicity d_N(s)
  int n_outcomes = 0;   // minimal pure-state outcome count, 0 if unknown
};

/// d_N(s) = C(N, N/2+s) (2s+1) / (N/2+s+1), exact integer arithmetic.
std::int64_t sector_multiplicity(int copies, int twice_s);

/// Sectors in ascending s. Throws size_limit_exceeded / invalid_argument.
std::vector<SpinSector> sectors(int copies, int max_copies = kDefaultMaxCopies);

/// Element operator via the distinct-arrangement reduction of the
/// permutation average. Throws parity_mismatch, invalid_argument,
/// size_limit_exceeded.
DenseOperator build_element(int copies, int twice_s, const Vec3& n, double c_sq,
                            int max_copies = kDefaultMaxCopies, Exec exec = Exec::parallel);

/// Same operator from the literal sum over all N! permutation operators.
/// Meant for tests; N <= 7.
DenseOperator build_element_reference(int copies, int twice_s, const Vec3& n, double c_sq);

/// r = g2 / sqrt(g1^2 + g2^2), or 0 when both vanish.
double guess_magnitude(const GIntegrals& g);
double guess_magnitude(const RadialPrior& prior, int copies, int twice_s,
                       int order = kDefaultQuadratureOrder);

struct PovmElement {
  SpinSector sector;
  int index = 0;  // position inside the sector's direction set
  Vec3 direction = Vec3::UnitZ();
  double c_sq = 1.0;
  double guess_r = 0.0;
  DenseOperator op;  // empty when built without operators

  BlochState guess() const { return BlochState::along(direction, guess_r); }
};

struct PovmOptions {
  int max_copies = kDefaultMaxCopies;
  int quadrature_order = kDefaultQuadratureOrder;
  bool operators = true;  // false: skip dense matrices and the identity check
  double identity_tolerance = 1e-9;
  Exec exec = Exec::parallel;
};

struct Povm {
  int copies = 0;
  std::string prior_id;
  std::vector<PovmElement> elements;
  double identity_residual = 0.0;  // max |sum O - I|, 0 when operators are skipped

  bool has_operators() const { return !elements.empty() && elements.front().op.dim() > 0; }
};

/// Elements ordered by ascending 2s, then by direction-set order. The s = 0
/// sector gets a single element with c^2 = 1 and a placeholder direction z.
/// Throws missing_direction_set, identity_residual.
Povm build_povm(int copies, const RadialPrior& prior, const DirectionCatalog& catalog,
                const PovmOptions& options = {});
Povm build_povm(int copies, const RadialPrior& prior, const PovmOptions& options = {});

/// max |sum_i O_i - I|.
double identity_residual(const Povm& povm);

/// c^2 d ((1 - b^2)/4)^{N/2-s} ((1 + b.n)/2)^{2s}.
double outcome_probability(const PovmElement& element, const BlochState& b);
/// Re Tr(O rho^{(x)N}); needs the operator.
double outcome_probability_trace(const PovmElement& element, const BlochState& b,
                                 Exec exec = Exec::parallel);

/// POVM file; matrices are written row-major as [re, im] pairs.
std::string povm_to_json(const Povm& povm, bool with_matrices);

}  // namespace minmeas
