#include "minmeas/povm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "minmeas/error.hpp"
#include "minmeas/json_io.hpp"
#include "minmeas/kernels.hpp"

namespace minmeas {

namespace {

std::int64_t binomial_int(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;  // exact at every step
  return r;
}

void check_sector(int copies, int twice_s) {
  if (twice_s < 0 || twice_s > copies) {
    std::ostringstream msg;
    msg << "2s = " << twice_s << " outside [0, " << copies << "]";
    throw Error(Errc::invalid_argument, msg.str());
  }
  if ((copies - twice_s) % 2 != 0) {
    std::ostringstream msg;
    msg << "2s = " << twice_s << " has the wrong parity for N = " << copies;
    throw Error(Errc::parity_mismatch, msg.str());
  }
}

/// c^2 (2s+1) C(N, k) / (k+1), k = N/2 + s.
double element_prefactor(int copies, int twice_s, double c_sq) {
  const int k = (copies + twice_s) / 2;
  return c_sq * (twice_s + 1) * static_cast<double>(binomial_int(copies, k)) / (k + 1);
}

}  // namespace

std::int64_t sector_multiplicity(int copies, int twice_s) {
  check_sector(copies, twice_s);
  const int k = (copies + twice_s) / 2;
  return binomial_int(copies, k) * (twice_s + 1) / (k + 1);
}

std::vector<SpinSector> sectors(int copies, int max_copies) {
  if (copies < 1) throw Error(Errc::invalid_argument, "copy count must be >= 1");
  if (copies > max_copies) {
    throw Error(Errc::size_limit_exceeded, std::to_string(copies) + " copies exceeds the cap of " +
                                               std::to_string(max_copies));
  }
  std::vector<SpinSector> out;
  for (int twice_s = copies % 2; twice_s <= copies; twice_s += 2) {
    out.push_back({copies, twice_s, sector_multiplicity(copies, twice_s),
                   minimal_pure_outcomes(twice_s).value_or(0)});
  }
  return out;
}

DenseOperator build_element(int copies, int twice_s, const Vec3& n, double c_sq, int max_copies,
                            Exec exec) {
  if (copies < 1) throw Error(Errc::invalid_argument, "copy count must be >= 1");
  if (copies > max_copies) {
    throw Error(Errc::size_limit_exceeded, std::to_string(copies) + " copies exceeds the cap of " +
                                               std::to_string(max_copies));
  }
  check_sector(copies, twice_s);
  const auto arr = kernels::arrangements(copies, (copies - twice_s) / 2);
  // Each arrangement is the image of the standard one under the same number
  // of permutations, so the permutation average is the arrangement average.
  CMatrix m = kernels::arrangement_sum(copies, arr, coherent_spinor(n), exec);
  m *= element_prefactor(copies, twice_s, c_sq) / static_cast<double>(arr.size());
  return {copies, std::move(m)};
}

DenseOperator build_element_reference(int copies, int twice_s, const Vec3& n, double c_sq) {
  if (copies < 1 || copies > 7) throw Error(Errc::size_limit_exceeded, "reference build needs N <= 7");
  check_sector(copies, twice_s);
  kernels::Arrangement standard;
  const int pairs = (copies - twice_s) / 2;
  for (int p = 0; p < pairs; ++p) standard.pairs.emplace_back(2 * p, 2 * p + 1);
  for (int q = 2 * pairs; q < copies; ++q) standard.direction_qubits.push_back(q);
  const CVector psi = kernels::arrangement_state(copies, standard, coherent_spinor(n));
  const DenseOperator x(copies, psi * psi.adjoint());

  std::vector<int> map(copies);
  std::iota(map.begin(), map.end(), 0);
  DenseOperator sum = DenseOperator::zero(copies);
  std::int64_t count = 0;
  do {
    const DenseOperator v = permutation_operator(QubitPermutation(map));
    sum += v * x * v.adjoint();
    ++count;
  } while (std::next_permutation(map.begin(), map.end()));
  return sum * Complex(element_prefactor(copies, twice_s, c_sq) / static_cast<double>(count));
}

double guess_magnitude(const GIntegrals& g) {
  const double norm = std::hypot(g.g1, g.g2);
  return norm > 0.0 ? g.g2 / norm : 0.0;
}

double guess_magnitude(const RadialPrior& prior, int copies, int twice_s, int order) {
  return guess_magnitude(g_integrals(prior, copies, twice_s, order));
}

Povm build_povm(int copies, const RadialPrior& prior, const DirectionCatalog& catalog,
                const PovmOptions& options) {
  const auto secs = sectors(copies, options.max_copies);
  const RadialRule rule = prior.rule(options.quadrature_order);

  Povm povm;
  povm.copies = copies;
  povm.prior_id = prior.id();
  for (const SpinSector& sec : secs) {
    const double r = guess_magnitude(g_integrals(rule, copies, sec.twice_s));
    if (sec.twice_s == 0) {
      PovmElement e;
      e.sector = sec;
      e.guess_r = r;
      povm.elements.push_back(std::move(e));
      continue;
    }
    const DirectionSet& set = catalog.get(sec.twice_s);
    for (std::size_t i = 0; i < set.entries.size(); ++i) {
      PovmElement e;
      e.sector = sec;
      e.index = static_cast<int>(i);
      e.direction = set.entries[i].n.normalized();
      e.c_sq = set.entries[i].c_sq;
      e.guess_r = r;
      povm.elements.push_back(std::move(e));
    }
  }
  if (!options.operators) return povm;

  // Elements are independent; each kernel call is itself parallel, so the
  // outer loop stays serial.
  for (PovmElement& e : povm.elements) {
    e.op = build_element(copies, e.sector.twice_s, e.direction, e.c_sq, options.max_copies,
                         options.exec);
  }
  povm.identity_residual = identity_residual(povm);
  if (!(povm.identity_residual <= options.identity_tolerance)) {
    std::ostringstream msg;
    msg << "sum of elements differs from identity by " << povm.identity_residual << " for N = "
        << copies;
    throw Error(Errc::identity_residual, msg.str());
  }
  return povm;
}

Povm build_povm(int copies, const RadialPrior& prior, const PovmOptions& options) {
  return build_povm(copies, prior, DirectionCatalog::standard(), options);
}

double identity_residual(const Povm& povm) {
  if (!povm.has_operators()) return 0.0;
  DenseOperator sum = DenseOperator::zero(povm.copies);
  for (const PovmElement& e : povm.elements) sum += e.op;
  return max_abs_diff(sum, DenseOperator::identity(povm.copies));
}

double outcome_probability(const PovmElement& element, const BlochState& b) {
  const int copies = element.sector.copies;
  const int twice_s = element.sector.twice_s;
  const double radius = b.radius();
  const double x = 0.25 * (1.0 - radius) * (1.0 + radius);
  const double proj = 0.5 * (1.0 + b.vector().dot(element.direction.normalized()));
  return element.c_sq * static_cast<double>(element.sector.d) *
         std::pow(x, (copies - twice_s) / 2) * std::pow(proj, twice_s);
}

double outcome_probability_trace(const PovmElement& element, const BlochState& b, Exec exec) {
  if (element.op.dim() == 0) throw Error(Errc::invalid_argument, "element has no operator");
  const DenseOperator rho = tensor_power(density_from_bloch(b), element.sector.copies,
                                         element.sector.copies, exec);
  return kernels::trace_product_real(element.op.matrix(), rho.matrix());
}

std::string povm_to_json(const Povm& povm, bool with_matrices) {
  if (with_matrices && !povm.has_operators()) {
    throw Error(Errc::invalid_argument, "POVM was built without operators");
  }
  std::ostringstream os;
  os << "{\n  \"copies\": " << povm.copies << ",\n  \"prior_id\": " << io::quote(povm.prior_id)
     << ",\n  \"element_count\": " << povm.elements.size()
     << ",\n  \"identity_residual\": " << io::fmt17(povm.identity_residual)
     << ",\n  \"elements\": [\n";
  for (std::size_t i = 0; i < povm.elements.size(); ++i) {
    const PovmElement& e = povm.elements[i];
    os << "    {\"copies\": " << e.sector.copies << ", \"twice_s\": " << e.sector.twice_s
       << ", \"multiplicity\": " << e.sector.d << ", \"index\": " << e.index << ", \"n\": ["
       << io::fmt17(e.direction.x()) << ", " << io::fmt17(e.direction.y()) << ", "
       << io::fmt17(e.direction.z()) << "], \"c_sq\": " << io::fmt17(e.c_sq)
       << ", \"guess_r\": " << io::fmt17(e.guess_r);
    if (with_matrices) {
      const CMatrix& m = e.op.matrix();
      os << ", \"dim\": " << m.rows() << ", \"matrix\": [";
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
          if (r != 0 || c != 0) os << ", ";
          os << "[" << io::fmt17(m(r, c).real()) << ", " << io::fmt17(m(r, c).imag()) << "]";
        }
      }
      os << "]";
    }
    os << "}" << (i + 1 < povm.elements.size() ? "," : "") << "\n";
  }
  os << "  ]\n}\n";
  return os.str();
}

}  // namespace minmeas
