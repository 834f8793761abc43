#include "minmeas/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include "minmeas/cloning.hpp"
#include "minmeas/error.hpp"
#include "minmeas/json_io.hpp"
#include "minmeas/kernels.hpp"
#include "minmeas/quadrature.hpp"

namespace minmeas {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  q.normalize();
  return q.toRotationMatrix();
}

Vec3 random_ball_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  while (true) {
    const Vec3 v(uni(rng), uni(rng), uni(rng));
    if (v.squaredNorm() <= 1.0) return v;
  }
}

/// Dicke-basis frame term |v><v| flattened to real equations.
Eigen::VectorXd flatten_hermitian(const CMatrix& m) {
  const Eigen::Index d = m.rows();
  Eigen::VectorXd out(d * d);
  Eigen::Index row = 0;
  for (Eigen::Index k = 0; k < d; ++k) out(row++) = m(k, k).real();
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index l = k + 1; l < d; ++l) {
      out(row++) = m(k, l).real();
      out(row++) = m(k, l).imag();
    }
  }
  return out;
}

/// Weights c_i^2 minimizing |sum c_i^2 |n_i><n_i|^{(x)2s} - P_sym| in the
/// symmetric basis.
Eigen::VectorXd solve_weights(int twice_s, const std::vector<Vec3>& directions) {
  const int d = twice_s + 1;
  Eigen::MatrixXd a(d * d, static_cast<Eigen::Index>(directions.size()));
  for (std::size_t i = 0; i < directions.size(); ++i) {
    DirectionSet single{twice_s, {{directions[i], 1.0}}};
    // symmetric_frame_residual subtracts the identity; add it back.
    const CMatrix frame = symmetric_frame_residual(single) + CMatrix::Identity(d, d);
    a.col(static_cast<Eigen::Index>(i)) = flatten_hermitian(frame);
  }
  const Eigen::VectorXd rhs = flatten_hermitian(CMatrix::Identity(d, d));
  return a.colPivHouseholderQr().solve(rhs);
}

}  // namespace

// -------------------------------------------------------------- guess scan

ScanResult scan_guess_magnitude(const RadialPrior& prior, int copies, int twice_s, double step,
                                int order) {
  if (!(step > 0.0) || step > 1.0) throw Error(Errc::invalid_argument, "scan step must be in (0, 1]");
  const std::int64_t d = sector_multiplicity(copies, twice_s);
  const RadialRule rule = prior.rule(order);
  const quad::Rule polar = quad::gauss_legendre(copies + 2);
  const int cells = static_cast<int>(std::llround(2.0 / step));
  const double factor = (twice_s + 1) * static_cast<double>(d);

  auto contribution = [&](double r) {
    const double root_r = std::sqrt(std::max(0.0, (1.0 - r) * (1.0 + r)));
    double acc = 0.0;
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double b = rule.radius[j];
      const double x = 0.25 * (1.0 - b) * (1.0 + b);
      const double root_x = std::sqrt((1.0 - b) * (1.0 + b));
      for (std::size_t k = 0; k < polar.size(); ++k) {
        const double u = polar.nodes[k];
        const double p = std::pow(x, (copies - twice_s) / 2) * std::pow(0.5 * (1.0 + b * u), twice_s);
        const double f = 0.5 * (1.0 + b * u * r + root_x * root_r);
        acc += rule.weight[j] * 0.5 * polar.weights[k] * p * f;
      }
    }
    return factor * acc;
  };

  ScanResult out;
  std::ostringstream grid;
  grid << "r in [-1, 1], " << cells + 1 << " points, step " << 2.0 / cells;
  out.grid = grid.str();
  out.best_value = contribution(-1.0);
  out.best_parameter = -1.0;
  double lowest = out.best_value;
  for (int i = 1; i <= cells; ++i) {
    const double r = -1.0 + 2.0 * i / cells;
    const double v = contribution(r);
    lowest = std::min(lowest, v);
    const double tie = 1e-14 * std::max(1.0, std::abs(out.best_value));
    if (v > out.best_value + tie) {
      out.best_value = v;
      out.best_parameter = r;
    } else if (std::abs(v - out.best_value) <= tie && std::abs(r) < std::abs(out.best_parameter)) {
      out.best_value = std::max(out.best_value, v);
      out.best_parameter = r;
    }
  }
  out.flat = out.best_value - lowest <= 1e-14 * std::max(1.0, std::abs(out.best_value));
  out.closed_prediction = guess_magnitude(prior, copies, twice_s, order);
  out.gap = std::abs(out.best_parameter - out.closed_prediction);
  return out;
}

// ------------------------------------------------------------- free guesses

namespace {

struct NelderMeadResult {
  Vec3 x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

template <typename F>
NelderMeadResult nelder_mead(F&& f, const Vec3& start, double scale, int max_evaluations) {
  std::array<Vec3, 4> pts;
  std::array<double, 4> val;
  int evals = 0;
  pts[0] = start;
  for (int k = 0; k < 3; ++k) pts[k + 1] = start + scale * Vec3::Unit(k);
  for (int k = 0; k < 4; ++k) {
    val[k] = f(pts[k]);
    ++evals;
  }
  while (evals < max_evaluations) {
    std::array<int, 4> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return val[a] < val[b]; });
    const int best = idx[0];
    const int worst = idx[3];
    const int second_worst = idx[2];
    double diameter = 0.0;
    for (int k = 1; k < 4; ++k) diameter = std::max(diameter, (pts[idx[k]] - pts[best]).norm());
    if (val[worst] - val[best] <= 1e-14 * (1.0 + std::abs(val[best])) && diameter < 1e-7) {
      return {pts[best], val[best], evals, true};
    }
    Vec3 centroid = Vec3::Zero();
    for (int k = 0; k < 3; ++k) centroid += pts[idx[k]];
    centroid /= 3.0;

    const Vec3 xr = centroid + (centroid - pts[worst]);
    const double fr = f(xr);
    ++evals;
    if (fr < val[best]) {
      const Vec3 xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second_worst]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    const bool outside = fr < val[worst];
    const Vec3 xc = outside ? Vec3(centroid + 0.5 * (xr - centroid))
                            : Vec3(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = f(xc);
    ++evals;
    if (fc < (outside ? fr : val[worst])) {
      pts[worst] = xc;
      val[worst] = fc;
      continue;
    }
    for (int k = 1; k < 4; ++k) {
      pts[idx[k]] = pts[best] + 0.5 * (pts[idx[k]] - pts[best]);
      val[idx[k]] = f(pts[idx[k]]);
      ++evals;
    }
  }
  int best = 0;
  for (int k = 1; k < 4; ++k) {
    if (val[k] < val[best]) best = k;
  }
  return {pts[best], val[best], evals, false};
}

/// Smooth surjection R^3 -> closed unit ball, |r| = |sin |v||.
Vec3 into_ball(const Vec3& v) {
  const double n = v.norm();
  return n < 1e-8 ? Vec3(v * (1.0 - n * n / 6.0)) : Vec3(v * (std::sin(n) / n));
}

}  // namespace

FreeGuessResult optimize_free_guesses(const Povm& povm, const RadialPrior& prior,
                                      const DirectOptions& options) {
  const int polar = options.polar_nodes > 0 ? options.polar_nodes : povm.copies + 2;
  const auto moments = element_moments(povm, prior, options.radial_order, polar, options.exec,
                                       options.state_map);
  FreeGuessResult out;
  for (std::size_t i = 0; i < moments.size(); ++i) {
    const Vec3 n = povm.elements[i].direction;
    auto objective = [&](const Vec3& v) { return -moments[i].contribution(into_ball(v), n); };
    const NelderMeadResult nm = nelder_mead(objective, Vec3::Zero(), 0.5, 20000);
    if (!nm.converged) {
      std::ostringstream msg;
      msg << "Nelder-Mead did not converge for element " << i << " after " << nm.evaluations
          << " evaluations";
      throw Error(Errc::optimizer_nonconvergence, msg.str());
    }
    out.guesses.push_back(into_ball(nm.x));
    out.value += -nm.f;
    out.evaluations += nm.evaluations;
  }
  return out;
}

// ---------------------------------------------------- general POVM fidelity

double fbar_general(const std::vector<DenseOperator>& elements, int copies,
                    const RadialPrior& prior, int radial_order, Exec exec) {
  const RadialRule rule = prior.rule(radial_order);
  const quad::Rule polar = quad::gauss_legendre(copies + 2);
  const int azimuth = 2 * copies + 4;

  struct Acc {
    double p = 0.0;
    Vec3 a = Vec3::Zero();
    double b = 0.0;
  };
  const auto n_elem = static_cast<std::int64_t>(elements.size());
  const auto n_rad = static_cast<std::int64_t>(rule.size());
  std::vector<Acc> partial(static_cast<std::size_t>(n_elem * n_rad));

#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (std::int64_t task = 0; task < n_elem * n_rad; ++task) {
    const DenseOperator& op = elements[static_cast<std::size_t>(task / n_rad)];
    const auto j = static_cast<std::size_t>(task % n_rad);
    const double b = rule.radius[j];
    const double root_x = std::sqrt((1.0 - b) * (1.0 + b));
    Acc acc;
    for (std::size_t k = 0; k < polar.size(); ++k) {
      const double u = polar.nodes[k];
      const double sin_t = std::sqrt((1.0 - u) * (1.0 + u));
      for (int m = 0; m < azimuth; ++m) {
        const double phi = 2.0 * std::numbers::pi * m / azimuth;
        const Vec3 bvec = b * Vec3(sin_t * std::cos(phi), sin_t * std::sin(phi), u);
        const DenseOperator rho =
            tensor_power(density_from_bloch(BlochState(bvec)), copies, copies, Exec::serial);
        const double p = kernels::trace_product_real(op.matrix(), rho.matrix());
        const double w = rule.weight[j] * 0.5 * polar.weights[k] / azimuth;
        acc.p += w * p;
        acc.a += w * p * bvec;
        acc.b += w * p * root_x;
      }
    }
    partial[static_cast<std::size_t>(task)] = acc;
  }

  double total = 0.0;
  for (std::int64_t e = 0; e < n_elem; ++e) {
    Acc sum;
    for (std::int64_t j = 0; j < n_rad; ++j) {
      const Acc& p = partial[static_cast<std::size_t>(e * n_rad + j)];
      sum.p += p.p;
      sum.a += p.a;
      sum.b += p.b;
    }
    total += 0.5 * (sum.p + std::sqrt(sum.a.squaredNorm() + sum.b * sum.b));
  }
  return total;
}

// ------------------------------------------------------------ perturbations

PerturbReport perturb_povm_check(const Povm& povm, const RadialPrior& prior, int trials,
                                 double step, std::uint64_t seed, int radial_order, Exec exec) {
  if (trials < 0) throw Error(Errc::invalid_argument, "trial count must be >= 0");
  if (!(step >= 0.0)) throw Error(Errc::invalid_argument, "step must be >= 0");
  const int copies = povm.copies;

  // Element indices grouped by sector, in POVM order.
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < povm.elements.size(); ++i) {
    if (i == 0 || povm.elements[i].sector.twice_s != povm.elements[i - 1].sector.twice_s) {
      groups.emplace_back();
    }
    groups.back().push_back(i);
  }

  // Returns NaN when the weight re-solve or the renormalization fails.
  auto run = [&](double move, std::uint64_t stream) {
    std::mt19937_64 rng = seeded_rng(seed, stream);
    std::normal_distribution<double> gauss;
    std::vector<DenseOperator> ops;
    for (const auto& group : groups) {
      const int twice_s = povm.elements[group.front()].sector.twice_s;
      if (twice_s == 0) {
        ops.push_back(build_element(copies, 0, Vec3::UnitZ(), 1.0, copies, Exec::serial));
        continue;
      }
      std::vector<Vec3> dirs;
      for (std::size_t i : group) {
        const Vec3 g(gauss(rng), gauss(rng), gauss(rng));
        dirs.push_back((povm.elements[i].direction + move * g).normalized());
      }
      const Eigen::VectorXd w = solve_weights(twice_s, dirs);
      if ((w.array() <= 0.0).any() || !w.allFinite()) return kNaN;
      for (std::size_t k = 0; k < dirs.size(); ++k) {
        ops.push_back(build_element(copies, twice_s, dirs[k], w(static_cast<Eigen::Index>(k)),
                                    copies, Exec::serial));
      }
    }
    CMatrix total = CMatrix::Zero(ops.front().dim(), ops.front().dim());
    for (const DenseOperator& o : ops) total += o.matrix();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (total + total.adjoint()));
    if (es.eigenvalues().minCoeff() <= 1e-12) return kNaN;
    const CMatrix inv_root = es.operatorInverseSqrt();
    for (DenseOperator& o : ops) o = DenseOperator(copies, inv_root * o.matrix() * inv_root);
    return fbar_general(ops, copies, prior, radial_order, Exec::serial);
  };

  PerturbReport report;
  report.copies = copies;
  report.trials = trials;
  report.step = step;
  report.seed = seed;
  report.baseline = run(0.0, 0);
  report.best = report.baseline;
  report.values.assign(static_cast<std::size_t>(trials), kNaN);

#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (int t = 0; t < trials; ++t) {
    report.values[static_cast<std::size_t>(t)] = run(step, static_cast<std::uint64_t>(t) + 1);
  }
  for (double v : report.values) {
    if (std::isnan(v)) {
      ++report.rejected;
      continue;
    }
    ++report.accepted;
    report.best = std::max(report.best, v);
    if (v > report.baseline + report.tolerance) ++report.improvements;
  }
  return report;
}

// --------------------------------------------------------- von Neumann scan

AxisScan vonneumann_exhaustive_n1(const RadialPrior& prior, int polar_steps, int azimuth_steps,
                                  int order) {
  if (polar_steps < 2 || azimuth_steps < 1) {
    throw Error(Errc::invalid_argument, "axis grid needs >= 2 polar and >= 1 azimuth steps");
  }
  AxisScan scan;
  for (int i = 0; i < polar_steps; ++i) {
    const double theta = std::numbers::pi * i / (polar_steps - 1);
    const bool pole = i == 0 || i == polar_steps - 1;
    for (int j = 0; j < (pole ? 1 : azimuth_steps); ++j) {
      const double phi = 2.0 * std::numbers::pi * j / azimuth_steps;
      scan.axes.emplace_back(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                             std::cos(theta));
    }
  }
  scan.values.resize(scan.axes.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t a = 0; a < scan.axes.size(); ++a) {
    const Vec3 n = scan.axes[a].normalized();
    const std::vector<DenseOperator> ops{density_from_bloch(BlochState(n)),
                                         density_from_bloch(BlochState(-n))};
    scan.values[a] = fbar_general(ops, 1, prior, order, Exec::serial);
  }
  for (double v : scan.values) scan.mean += v;
  scan.mean /= static_cast<double>(scan.values.size());
  for (double v : scan.values) scan.variance += (v - scan.mean) * (v - scan.mean);
  scan.variance /= static_cast<double>(scan.values.size());
  scan.closed = fbar_max_closed(prior, 1, order).value_closed;
  return scan;
}

TwoPointScan scan_two_point_priors(int copies, int mass_steps, int radius_steps) {
  if (mass_steps < 2 || radius_steps < 1) throw Error(Errc::invalid_argument, "grid too small");
  TwoPointScan best;
  best.best_value = kInf;
  for (int i = 1; i < mass_steps; ++i) {
    const double m = static_cast<double>(i) / mass_steps;
    for (int k0 = 0; k0 <= radius_steps; ++k0) {
      for (int k1 = k0 + 1; k1 <= radius_steps; ++k1) {
        const double b0 = static_cast<double>(k0) / radius_steps;
        const double b1 = static_cast<double>(k1) / radius_steps;
        const double v =
            fbar_max_closed(RadialPrior::two_point(m, b0, 1.0 - m, b1), copies).value_closed;
        ++best.evaluated;
        if (v < best.best_value) best = {v, m, b0, b1, best.evaluated};
      }
    }
  }
  return best;
}

// --------------------------------------------------------------- verify

bool VerifyReport::pass() const { return first_failure() == nullptr; }

const Check* VerifyReport::first_failure() const {
  for (const Check& c : checks) {
    if (!c.pass) return &c;
  }
  return nullptr;
}

std::string VerifyReport::to_text() const {
  std::ostringstream os;
  os << "verify N=" << copies << " prior=" << prior_id << " seed=" << seed << "\n";
  for (const Check& c : checks) {
    char line[160];
    std::snprintf(line, sizeof line, "%s  %-28s residual=%-11.3e tol=%.1e", c.pass ? "PASS" : "FAIL",
                  c.name.c_str(), c.residual, c.tolerance);
    os << line;
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
  }
  os << (pass() ? "all checks passed" : "FAILED: " + first_failure()->name) << "\n";
  return os.str();
}

std::string VerifyReport::to_json() const {
  auto num = [](double v) { return std::isfinite(v) ? io::fmt17(v) : std::string("null"); };
  std::ostringstream os;
  os << "{\n  \"copies\": " << copies << ",\n  \"prior_id\": " << io::quote(prior_id)
     << ",\n  \"seed\": " << seed << ",\n  \"pass\": " << (pass() ? "true" : "false")
     << ",\n  \"checks\": [\n";
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const Check& c = checks[i];
    os << "    {\"name\": " << io::quote(c.name) << ", \"pass\": " << (c.pass ? "true" : "false")
       << ", \"residual\": " << num(c.residual) << ", \"tolerance\": " << num(c.tolerance)
       << ", \"detail\": " << io::quote(c.detail) << "}" << (i + 1 < checks.size() ? "," : "")
       << "\n";
  }
  os << "  ]\n}\n";
  return os.str();
}

VerifyReport verify_suite(const RadialPrior& prior, const DirectionCatalog& catalog,
                          const VerifyOptions& options) {
  const int copies = options.copies;
  const int order = options.quadrature_order;
  VerifyReport report;
  report.copies = copies;
  report.prior_id = prior.id();
  report.seed = options.seed;

  auto add = [&](std::string name, double residual, double tol, std::string detail = {}) {
    const bool ok = std::isfinite(residual) && residual <= tol;
    report.checks.push_back({std::move(name), residual, tol, ok, std::move(detail)});
  };
  auto fail = [&](std::string name, const std::exception& e) {
    report.checks.push_back({std::move(name), kInf, 0.0, false, e.what()});
  };

  const auto secs = sectors(copies);
  {
    std::int64_t sum = 0;
    for (const SpinSector& s : secs) sum += (s.twice_s + 1) * s.d;
    add("sector_sum_rule", static_cast<double>(std::llabs(sum - (std::int64_t{1} << copies))), 0.0,
        "sum (2s+1) d = " + std::to_string(sum));
  }

  bool designs_ok = true;
  for (const SpinSector& s : secs) {
    if (s.twice_s == 0) continue;
    const std::string name = "design_2s" + std::to_string(s.twice_s);
    try {
      const DesignReport rep = verify_direction_set(catalog.get(s.twice_s));
      std::ostringstream detail;
      detail << "weight_sum_error=" << rep.weight_sum_error
             << " centroid_error=" << rep.centroid_error << " rank=" << rep.frame_rank;
      report.checks.push_back({name, rep.design_residual, kDesignTolerance, rep.pass, detail.str()});
      designs_ok = designs_ok && rep.pass;
    } catch (const std::exception& e) {
      fail(name, e);
      designs_ok = false;
    }
  }
  if (!designs_ok) return report;

  PovmOptions popts;
  popts.quadrature_order = order;
  popts.identity_tolerance = kInf;
  popts.exec = options.exec;
  Povm povm;
  try {
    povm = build_povm(copies, prior, catalog, popts);
  } catch (const std::exception& e) {
    fail("build_povm", e);
    return report;
  }
  add("identity_resolution", povm.identity_residual, 1e-9);

  {
    int minimal = 0;
    bool known = true;
    for (const SpinSector& s : secs) {
      known = known && s.n_outcomes > 0;
      minimal += s.n_outcomes;
    }
    const auto count = static_cast<int>(povm.elements.size());
    if (known) {
      add("element_count", std::abs(count - minimal), 0.0,
          std::to_string(count) + " elements, minimal " + std::to_string(minimal));
    }
  }
  {
    int wrong_rank = 0;
    double lowest = kInf;
    for (const PovmElement& e : povm.elements) {
      if (e.op.rank() != e.sector.d) ++wrong_rank;
      lowest = std::min(lowest, e.op.eigenvalues().minCoeff());
    }
    add("element_ranks", wrong_rank, 0.0, "elements with rank != d_N(s)");
    add("element_psd", std::max(0.0, -lowest), -kPsdFloor);
  }

  std::mt19937_64 rng = seeded_rng(options.seed, 0);
  {
    double worst = 0.0;
    std::uniform_int_distribution<std::size_t> pick(0, povm.elements.size() - 1);
    for (int t = 0; t < 20; ++t) {
      const PovmElement& e = povm.elements[pick(rng)];
      const BlochState b(random_ball_point(rng));
      worst = std::max(worst, std::abs(outcome_probability(e, b) - outcome_probability_trace(e, b)));
    }
    add("trace_formula", worst, 1e-10, "20 random (b, element) pairs");
  }
  {
    double perm = 0.0;
    double spin = 0.0;
    std::vector<int> all(static_cast<std::size_t>(copies));
    for (int q = 0; q < copies; ++q) all[static_cast<std::size_t>(q)] = q;
    const DenseOperator s2 = total_spin_squared(copies, all);
    for (const PovmElement& e : povm.elements) {
      for (int q = 0; q + 1 < copies; ++q) {
        perm = std::max(perm, commutator_norm(
                                  e.op, permutation_operator(QubitPermutation::transposition(copies, q, q + 1))));
      }
      spin = std::max(spin, commutator_norm(e.op, s2));
    }
    add("permutation_commutator", perm, 1e-12);
    add("spin_commutator", spin, 1e-12);
  }

  FidelityReport closed;
  try {
    closed = fbar_max_closed(prior, copies, order);
    DirectOptions dopts;
    dopts.radial_order = order;
    dopts.exec = options.exec;
    const double direct = fbar_direct(povm, prior, dopts);
    add("closed_vs_direct", std::abs(direct - closed.value_closed), 1e-8,
        "closed=" + io::fmt17(closed.value_closed));

    if (copies <= 4) {
      add("specialized_form", std::abs(fbar_specialized(prior, copies, order) - closed.value_closed),
          1e-12);
    }
    if (prior.id() == "pure") {
      add("pure_limit", std::abs(closed.value_closed - (copies + 1.0) / (copies + 2.0)), 1e-12);
    } else if (prior.id() == "random") {
      double r_max = 0.0;
      for (const SectorTerm& t : closed.sectors) r_max = std::max(r_max, std::abs(t.r));
      add("random_limit", std::abs(closed.value_closed - 1.0) + r_max, 1e-12);
    }
    if (copies >= 2) {
      const double prev = fbar_max_closed(prior, copies - 1, order).value_closed;
      add("monotonicity", std::max(0.0, prev - closed.value_closed), 1e-12);
    }

    for (const SpinSector& s : secs) {
      const ScanResult scan = scan_guess_magnitude(prior, copies, s.twice_s, 1e-3, order);
      add("guess_scan_2s" + std::to_string(s.twice_s), scan.gap, 1e-3 + 1e-12,
          "argmax=" + io::fmt6(scan.best_parameter) + " r=" + io::fmt6(scan.closed_prediction) +
              (scan.flat ? " (flat)" : ""));
    }

    const FreeGuessResult free = optimize_free_guesses(povm, prior, dopts);
    add("free_guess_optimum", std::abs(free.value - closed.value_closed), 1e-6,
        "optimized=" + io::fmt17(free.value));
    add("free_guess_not_above_closed", std::max(0.0, free.value - closed.value_closed), 1e-9);

    const Eigen::Matrix3d rot = random_rotation(rng);
    const Povm rotated = build_povm(copies, prior, catalog.rotated(rot), popts);
    add("rotation_invariance", std::abs(fbar_direct(rotated, prior, dopts) - direct), 1e-9);
  } catch (const std::exception& e) {
    fail("fidelity", e);
  }

  try {
    if (copies == 1) {
      const AxisScan scan = vonneumann_exhaustive_n1(prior, 7, 12, order);
      add("vonneumann_axis_variance", scan.variance, 1e-10,
          std::to_string(scan.axes.size()) + " axes");
      add("vonneumann_value", std::abs(scan.mean - scan.closed), 1e-8);
    }
    if (copies == 2) {
      const double via_clone = fbar_via_clone(prior);
      add("clone_equivalence", std::abs(via_clone - fbar_max_closed(prior, 1, order).value_closed),
          1e-8);
      const CVector sigma = singlet_state();
      const DenseOperator rho_c = clone(BlochState(random_ball_point(rng)), kOptimalCloner);
      add("clone_singlet_weight", std::abs((sigma.adjoint() * rho_c.matrix() * sigma)(0, 0)), 1e-12);
    }
    if (copies <= 4 && options.perturb_trials > 0) {
      const PerturbReport pr =
          perturb_povm_check(povm, prior, options.perturb_trials, 1e-2, options.seed, order, options.exec);
      std::ostringstream detail;
      detail << pr.accepted << " accepted, " << pr.rejected << " rejected, best gain "
             << pr.best - pr.baseline;
      add("perturbation", pr.improvements, 0.0, detail.str());
    }
  } catch (const std::exception& e) {
    fail("oracle", e);
  }
  return report;
}

}  // namespace minmeas
