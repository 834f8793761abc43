#include "minmeas/fidelity.hpp"

#include <cmath>
#include <sstream>

#include "minmeas/error.hpp"
#include "minmeas/json_io.hpp"
#include "minmeas/kernels.hpp"
#include "minmeas/quadrature.hpp"

namespace minmeas {

// ---------------------------------------------------------------- closed form

FidelityReport fbar_max_closed(const RadialRule& rule, int copies, std::string prior_id) {
  FidelityReport report;
  report.copies = copies;
  report.prior_id = std::move(prior_id);
  report.value_closed = 0.5;
  for (const SpinSector& sec : sectors(copies)) {
    const GIntegrals g = g_integrals(rule, copies, sec.twice_s);
    SectorTerm t;
    t.twice_s = sec.twice_s;
    t.g1 = g.g1;
    t.g2 = g.g2;
    t.term = (sec.twice_s + 1) * static_cast<double>(sec.d) * std::hypot(g.g1, g.g2);
    t.r = guess_magnitude(g);
    report.value_closed += t.term;
    report.sectors.push_back(t);
  }
  return report;
}

FidelityReport fbar_max_closed(const RadialPrior& prior, int copies, int order) {
  return fbar_max_closed(prior.rule(order), copies, prior.id());
}

// ------------------------------------------------------- per-N closed forms

double fbar_specialized(const RadialRule& rule, int copies) {
  const double i_half = moment_I(rule, 1);
  const double i_1 = moment_I(rule, 2);
  const double i_3half = moment_I(rule, 3);
  const double i_2 = moment_I(rule, 4);
  const double i_5half = moment_I(rule, 5);
  switch (copies) {
    case 1:
      return 0.5 * (1.0 + std::sqrt(36.0 * i_half * i_half + std::pow(1.0 - 4.0 * i_1, 2)) / 3.0);
    case 2:
      return 0.5 + i_3half +
             0.25 * std::sqrt(16.0 * std::pow(i_half - i_3half, 2) + std::pow(1.0 - 4.0 * i_1, 2));
    case 3:
      return 0.5 + std::sqrt(36.0 * i_3half * i_3half + std::pow(i_1 - 4.0 * i_2, 2)) / 3.0 +
             std::sqrt(100.0 * std::pow(i_half - 2.0 * i_3half, 2) +
                       std::pow(3.0 - 14.0 * i_1 + 8.0 * i_2, 2)) /
                 10.0;
    case 4:
      return 0.5 + 2.0 * i_5half +
             std::sqrt(std::pow(2.0 - 11.0 * i_1 + 12.0 * i_2, 2) +
                       36.0 * std::pow(i_half - 3.0 * i_3half + i_5half, 2)) /
                 6.0 +
             0.75 * std::sqrt(std::pow(i_1 - 4.0 * i_2, 2) + 16.0 * std::pow(i_3half - i_5half, 2));
    default:
      throw Error(Errc::invalid_argument,
                  "no specialized form for N = " + std::to_string(copies) + " (have 1..4)");
  }
}

double fbar_specialized(const RadialPrior& prior, int copies, int order) {
  return fbar_specialized(prior.rule(order), copies);
}

// ------------------------------------------------------------ direct route

double ElementMoments::contribution(const Vec3& guess, const Vec3& direction) const {
  const double r2 = std::min(1.0, guess.squaredNorm());
  return 0.5 * (P + guess.dot(direction.normalized()) * A + std::sqrt(1.0 - r2) * B);
}

double ElementMoments::best_r() const {
  const double norm = std::hypot(A, B);
  return norm > 0.0 ? A / norm : 0.0;
}

std::vector<ElementMoments> element_moments(const Povm& povm, const RadialPrior& prior,
                                            int radial_order, int polar_nodes, Exec exec,
                                            const StateMap& state_map) {
  if (!povm.has_operators()) throw Error(Errc::invalid_argument, "POVM was built without operators");
  const int copies = povm.copies;
  const RadialRule rule = prior.rule(radial_order);
  const quad::Rule polar = quad::gauss_legendre(polar_nodes > 0 ? polar_nodes : copies + 2);

  const auto n_elem = static_cast<std::int64_t>(povm.elements.size());
  const auto n_rad = static_cast<std::int64_t>(rule.size());
  std::vector<ElementMoments> partial(static_cast<std::size_t>(n_elem * n_rad));

#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (std::int64_t task = 0; task < n_elem * n_rad; ++task) {
    const PovmElement& e = povm.elements[static_cast<std::size_t>(task / n_rad)];
    const auto j = static_cast<std::size_t>(task % n_rad);
    const double b = rule.radius[j];
    const double w = rule.weight[j];
    const double root_x = std::sqrt((1.0 - b) * (1.0 + b));
    const Vec3 n = e.direction.normalized();
    const Vec3 m = n.unitOrthogonal();
    ElementMoments acc;
    for (std::size_t k = 0; k < polar.size(); ++k) {
      const double u = polar.nodes[k];
      const Vec3 bvec = b * (u * n + std::sqrt((1.0 - u) * (1.0 + u)) * m);
      const CMatrix state =
          state_map ? state_map(bvec)
                    : tensor_power(density_from_bloch(BlochState(bvec)), copies, copies, Exec::serial)
                          .matrix();
      const double p = kernels::trace_product_real(e.op.matrix(), state);
      const double wk = 0.5 * polar.weights[k] * w;
      acc.P += wk * p;
      acc.A += wk * p * b * u;
      acc.B += wk * p * root_x;
    }
    partial[static_cast<std::size_t>(task)] = acc;
  }

  std::vector<ElementMoments> out(static_cast<std::size_t>(n_elem));
  for (std::int64_t task = 0; task < n_elem * n_rad; ++task) {
    ElementMoments& o = out[static_cast<std::size_t>(task / n_rad)];
    const ElementMoments& p = partial[static_cast<std::size_t>(task)];
    o.P += p.P;
    o.A += p.A;
    o.B += p.B;
  }
  return out;
}

namespace {

double mean_fidelity(const Povm& povm, const std::vector<ElementMoments>& moments,
                     std::span<const BlochState> guesses) {
  double total = 0.0;
  for (std::size_t i = 0; i < moments.size(); ++i) {
    total += moments[i].contribution(guesses[i].vector(), povm.elements[i].direction);
  }
  return total;
}

}  // namespace

double fbar_with_guesses(const Povm& povm, const RadialPrior& prior,
                         std::span<const BlochState> guesses, const DirectOptions& options) {
  if (guesses.size() != povm.elements.size()) {
    std::ostringstream msg;
    msg << guesses.size() << " guesses for " << povm.elements.size() << " elements";
    throw Error(Errc::override_count_mismatch, msg.str());
  }
  const int polar = options.polar_nodes > 0 ? options.polar_nodes : povm.copies + 2;
  const double value = mean_fidelity(
      povm,
      element_moments(povm, prior, options.radial_order, polar, options.exec, options.state_map),
      guesses);
  if (!options.refine) return value;
  const double refined = mean_fidelity(
      povm,
      element_moments(povm, prior, 2 * options.radial_order, 2 * polar, options.exec,
                      options.state_map),
      guesses);
  if (std::abs(refined - value) > options.tolerance) {
    std::ostringstream msg;
    msg << "doubling the nodes moved the mean fidelity by " << std::abs(refined - value);
    throw Error(Errc::quadrature_nonconvergence, msg.str());
  }
  return refined;
}

double fbar_direct(const Povm& povm, const RadialPrior& prior, const DirectOptions& options) {
  std::vector<BlochState> guesses;
  guesses.reserve(povm.elements.size());
  for (const PovmElement& e : povm.elements) guesses.push_back(e.guess());
  return fbar_with_guesses(povm, prior, guesses, options);
}

// --------------------------------------------------------------------- table

std::string fidelity_table_csv(std::span<const FidelityReport> rows, bool precise) {
  auto num = [precise](double v) { return precise ? io::fmt17(v) : io::fmt6(v); };
  auto field = [](const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
  };
  std::ostringstream os;
  os << "N,prior_id,fbar_closed,fbar_direct,abs_diff,sector_r\n";
  for (const FidelityReport& row : rows) {
    os << row.copies << "," << field(row.prior_id) << "," << num(row.value_closed) << ",";
    if (row.value_direct) {
      os << num(*row.value_direct) << "," << num(std::abs(*row.value_direct - row.value_closed));
    } else {
      os << ",";
    }
    os << ",";
    for (std::size_t i = 0; i < row.sectors.size(); ++i) {
      if (i > 0) os << ";";
      os << row.sectors[i].twice_s << ":" << num(row.sectors[i].r);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace minmeas
