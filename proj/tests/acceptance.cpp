// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "minmeas/cloning.hpp"
#include "minmeas/fidelity.hpp"
#include "minmeas/oracle.hpp"
#include "minmeas/povm.hpp"
#include "test_util.hpp"

using namespace minmeas;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

Outcome within(double worst, double tol, const std::string& what = "max error") {
  return {std::isfinite(worst) && worst < tol, what + " " + sci(worst) + " (tol " + sci(tol) + ")"};
}

const std::vector<Povm>& povms_pure() {
  static const std::vector<Povm> all = [] {
    std::vector<Povm> v;
    for (int n = 1; n <= 5; ++n) v.push_back(build_povm(n, RadialPrior::pure()));
    return v;
  }();
  return all;
}

std::vector<RadialPrior> random_priors(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::vector<RadialPrior> v;
  for (int i = 0; i < count; ++i) v.push_back(testutil::random_prior(rng, i));
  return v;
}

const double kTwoPointValue = 0.5 * (1.0 + 1.0 / std::sqrt(10.0));

Outcome pure_limit() {
  double worst = 0.0;
  for (int n = 1; n <= 5; ++n) {
    worst = std::max(worst, std::abs(fbar_max_closed(RadialPrior::pure(), n).value_closed - (n + 1.0) / (n + 2.0)));
  }
  return within(worst, 1e-12);
}

Outcome random_limit() {
  double worst = 0.0;
  double r_max = 0.0;
  for (int n = 1; n <= 5; ++n) {
    const FidelityReport r = fbar_max_closed(RadialPrior::random(), n);
    worst = std::max(worst, std::abs(r.value_closed - 1.0));
    for (const SectorTerm& t : r.sectors) r_max = std::max(r_max, std::abs(t.r));
  }
  Outcome o = within(worst, 1e-12);
  o.pass = o.pass && r_max == 0.0;
  o.detail += ", max |r| " + sci(r_max);
  return o;
}

Outcome two_point() {
  return within(std::abs(fbar_max_closed(parse_prior_spec("two-point"), 1).value_closed - kTwoPointValue), 1e-12);
}

Outcome identity_resolution() {
  double worst = 0.0;
  for (const Povm& p : povms_pure()) {
    // Summed here rather than trusting the stored residual.
    DenseOperator sum = DenseOperator::zero(p.copies);
    for (const auto& e : p.elements) sum += e.op;
    worst = std::max(worst, max_abs_diff(sum, DenseOperator::identity(p.copies)));
  }
  return within(worst, 1e-9, "max residual");
}

Outcome outcome_counts() {
  const int expected[] = {2, 5, 8, 15, 20};
  std::string got;
  bool ok = true;
  for (int n = 1; n <= 5; ++n) {
    const int c = static_cast<int>(povms_pure()[static_cast<std::size_t>(n - 1)].elements.size());
    ok = ok && c == expected[n - 1];
    got += (n > 1 ? "," : "") + std::to_string(c);
  }
  return {ok, "counts " + got};
}

Outcome four_copy_ranks() {
  int r1 = 0, r2 = 0, r3 = 0, other = 0;
  for (const auto& e : povms_pure()[3].elements) {
    const int r = e.op.rank(1e-8);
    if (r == 1) ++r1;
    else if (r == 2) ++r2;
    else if (r == 3) ++r3;
    else ++other;
  }
  return {r1 == 10 && r2 == 1 && r3 == 4 && other == 0,
          "rank1=" + std::to_string(r1) + " rank2=" + std::to_string(r2) + " rank3=" + std::to_string(r3)};
}

Outcome closed_vs_direct() {
  double worst = 0.0;
  for (const RadialPrior& p : {RadialPrior::pure(), RadialPrior::random(), RadialPrior::uniform_ball(),
                               parse_prior_spec("two-point")}) {
    for (int n = 1; n <= 4; ++n) {
      const double closed = fbar_max_closed(p, n).value_closed;
      const double direct = fbar_direct(build_povm(n, p), p);
      worst = std::max(worst, std::abs(closed - direct));
    }
  }
  return within(worst, 1e-8);
}

Outcome specialization() {
  double worst = 0.0;
  for (const RadialPrior& p : random_priors(101, 50)) {
    for (int n = 1; n <= 4; ++n) {
      worst = std::max(worst, std::abs(fbar_specialized(p, n) - fbar_max_closed(p, n).value_closed));
    }
  }
  return within(worst, 1e-12);
}

Outcome trace_formula() {
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Povm& p = povms_pure()[static_cast<std::size_t>(t % 5)];
    const PovmElement& e = p.elements[rng() % p.elements.size()];
    const BlochState b(testutil::random_in_ball(rng));
    worst = std::max(worst, std::abs(outcome_probability(e, b) - outcome_probability_trace(e, b)));
  }
  return within(worst, 1e-10);
}

Outcome guess_optimality() {
  double scan_gap = 0.0;
  for (const RadialPrior& p : random_priors(103, 10)) {
    for (int n = 1; n <= 4; ++n) {
      for (int ts = n % 2; ts <= n; ts += 2) {
        scan_gap = std::max(scan_gap, scan_guess_magnitude(p, n, ts, 1e-3).gap);
      }
    }
  }
  double free_gap = 0.0;
  std::vector<RadialPrior> priors{RadialPrior::uniform_ball(), parse_prior_spec("two-point")};
  priors.push_back(random_priors(104, 1).front());
  for (const RadialPrior& p : priors) {
    for (int n = 1; n <= 4; ++n) {
      const double v = optimize_free_guesses(build_povm(n, p), p).value;
      free_gap = std::max(free_gap, std::abs(v - fbar_max_closed(p, n).value_closed));
    }
  }
  return {scan_gap <= 1e-3 + 1e-12 && free_gap < 1e-6,
          "scan gap " + sci(scan_gap) + " (step 1e-3), free-guess gap " + sci(free_gap) + " (tol 1e-6)"};
}

Outcome monotonicity() {
  double worst = 0.0;  // largest drop
  for (const RadialPrior& p : random_priors(105, 50)) {
    for (int n = 1; n <= 4; ++n) {
      worst = std::max(worst, fbar_max_closed(p, n).value_closed - fbar_max_closed(p, n + 1).value_closed);
    }
  }
  return {worst <= 1e-12, "largest drop " + sci(worst)};
}

Outcome sum_rule() {
  for (int n = 1; n <= 10; ++n) {
    std::int64_t total = 0;
    for (const SpinSector& s : sectors(n)) total += (s.twice_s + 1) * s.d;
    if (total != (std::int64_t{1} << n)) return {false, "N=" + std::to_string(n) + " gives " + std::to_string(total)};
  }
  return {true, "exact for N=1..10"};
}

Outcome cloning() {
  double worst = 0.0;
  for (const RadialPrior& p : random_priors(106, 20)) {
    worst = std::max(worst, std::abs(fbar_via_clone(p) - fbar_max_closed(p, 1).value_closed));
  }
  std::mt19937_64 rng(107);
  const CVector sigma = singlet_state();
  double singlet = 0.0;
  for (int i = 0; i < 50; ++i) {
    const DenseOperator rc = clone(BlochState(testutil::random_in_ball(rng)), kOptimalCloner);
    singlet = std::max(singlet, std::abs((sigma.adjoint() * rc.matrix() * sigma)(0, 0)));
  }
  return {worst < 1e-8 && singlet < 1e-12,
          "fidelity gap " + sci(worst) + " (tol 1e-8), singlet weight " + sci(singlet) + " (tol 1e-12)"};
}

Outcome invariance() {
  double perm = 0.0;
  double spin = 0.0;
  for (const Povm& p : povms_pure()) {
    const int n = p.copies;
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) all[static_cast<std::size_t>(q)] = q;
    const DenseOperator s2 = total_spin_squared(n, all);
    for (const auto& e : p.elements) {
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          perm = std::max(perm, commutator_norm(e.op, permutation_operator(QubitPermutation::transposition(n, i, j))));
        }
      }
      spin = std::max(spin, commutator_norm(e.op, s2));
    }
  }
  std::mt19937_64 rng(108);
  const RadialPrior prior = RadialPrior::uniform_ball();
  const DirectionCatalog base = DirectionCatalog::standard();
  double rot = 0.0;
  for (int n = 1; n <= 4; ++n) {
    const Eigen::Matrix3d r =
        Eigen::AngleAxisd(std::uniform_real_distribution<double>(0, 2 * std::numbers::pi)(rng),
                          testutil::random_unit(rng))
            .toRotationMatrix();
    rot = std::max(rot, std::abs(fbar_direct(build_povm(n, prior, base), prior) -
                                 fbar_direct(build_povm(n, prior, base.rotated(r)), prior)));
  }
  return {perm < 1e-12 && spin < 1e-12 && rot < 1e-9,
          "permutation " + sci(perm) + ", spin " + sci(spin) + " (tol 1e-12), rotation " + sci(rot) +
              " (tol 1e-9)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"pure-state limit", pure_limit},
      {"random-state limit", random_limit},
      {"two-point prior", two_point},
      {"identity resolution", identity_resolution},
      {"minimal outcome counts", outcome_counts},
      {"four-copy operator ranks", four_copy_ranks},
      {"closed form vs direct", closed_vs_direct},
      {"specialized forms", specialization},
      {"trace formula", trace_formula},
      {"guess optimality", guess_optimality},
      {"monotonicity", monotonicity},
      {"dimension sum rule", sum_rule},
      {"cloning equivalence", cloning},
      {"invariance suite", invariance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %2zu %-26s %s  [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
