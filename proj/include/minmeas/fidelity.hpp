#pragma once

// Mean fidelity of the minimal POVM: the closed form built from the sector
// integrals g1, g2, the per-N closed forms in terms of I_alpha moments, and a
// direct quadrature over outcomes and the prior that only touches matrices.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minmeas/exec.hpp"
#include "minmeas/povm.hpp"
#include "minmeas/prior.hpp"
#include "minmeas/qlin.hpp"

namespace minmeas {

struct SectorTerm {
  int twice_s = 0;
  double g1 = 0.0;
  double g2 = 0.0;
  double term = 0.0;  // (2s+1) d_N(s) sqrt(g1^2 + g2^2)
  double r = 0.0;     // optimal guess magnitude
};

struct FidelityReport {
  int copies = 0;
  std::string prior_id;
  double value_closed = 0.0;
  std::optional<double> value_direct;
  std::vector<SectorTerm> sectors;
};

/// 1/2 + sum_s (2s+1) d_N(s) sqrt(g1^2 + g2^2).
FidelityReport fbar_max_closed(const RadialPrior& prior, int copies,
                               int order = kDefaultQuadratureOrder);
FidelityReport fbar_max_closed(const RadialRule& rule, int copies, std::string prior_id);

/// Hand-reduced closed forms for N = 1..4 written in I_alpha moments.
/// Throws invalid_argument for other N.
double fbar_specialized(const RadialPrior& prior, int copies, int order = kDefaultQuadratureOrder);
double fbar_specialized(const RadialRule& rule, int copies);

/// State presented to the measurement for a true Bloch vector b; default is
/// rho(b)^{(x)N}. Must be covariant under rotations about any axis.
using StateMap = std::function<CMatrix(const Vec3& b)>;

struct DirectOptions {
  int radial_order = kDefaultQuadratureOrder;
  int polar_nodes = 0;  // 0: N + 2 (exact for the polynomial polar integrand)
  bool refine = true;   // repeat with doubled node counts and compare
  double tolerance = 1e-8;
  Exec exec = Exec::parallel;
  StateMap state_map;   // empty: tensor power
};

/// Per-element integrals over the prior (1/2 int du included):
///   P = <p>, A = <p b u>, B = <p sqrt(1 - b^2)>,
/// where p = Re Tr(O state(b)) and u is the cosine to the element direction.
/// The element's mean-fidelity contribution for a guess r is
///   (P + (r.n) A + sqrt(1 - |r|^2) B) / 2.
struct ElementMoments {
  double P = 0.0;
  double A = 0.0;
  double B = 0.0;

  double contribution(const Vec3& guess, const Vec3& direction) const;
  /// Optimal guess along the element direction: A / sqrt(A^2 + B^2).
  double best_r() const;
};

std::vector<ElementMoments> element_moments(const Povm& povm, const RadialPrior& prior,
                                            int radial_order, int polar_nodes, Exec exec,
                                            const StateMap& state_map = {});

/// Mean fidelity of `povm` with its stored guesses by direct quadrature.
/// Throws quadrature_nonconvergence when refinement moves the value by more
/// than the tolerance.
double fbar_direct(const Povm& povm, const RadialPrior& prior, const DirectOptions& options = {});

/// Same with one guess per element. Throws override_count_mismatch.
double fbar_with_guesses(const Povm& povm, const RadialPrior& prior,
                         std::span<const BlochState> guesses, const DirectOptions& options = {});

/// CSV with columns N,prior_id,fbar_closed,fbar_direct,abs_diff,sector_r.
/// sector_r is "2s:r;2s:r;...". `precise` selects 17 digits instead of 6.
std::string fidelity_table_csv(std::span<const FidelityReport> rows, bool precise);

}  // namespace minmeas
