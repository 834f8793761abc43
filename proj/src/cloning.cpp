#include "minmeas/cloning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "minmeas/error.hpp"
#include "minmeas/povm.hpp"

namespace minmeas {

namespace {

CMatrix clone_matrix(const Vec3& b, const ClonerParams& params) {
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  const Eigen::Matrix2cd bs = b.x() * pauli_x() + b.y() * pauli_y() + b.z() * pauli_z();
  auto kron2 = [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& c) {
    CMatrix out(4, 4);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) out.block(2 * i, 2 * j, 2, 2) = a(i, j) * c;
    }
    return out;
  };
  CMatrix m = kron2(id, id) + params.eta * (kron2(bs, id) + kron2(id, bs)) +
              params.t * (kron2(pauli_x(), pauli_x()) + kron2(pauli_y(), pauli_y()) +
                          kron2(pauli_z(), pauli_z()));
  return 0.25 * m;
}

double min_eigenvalue(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

double cloner_min_eigenvalue(const ClonerParams& params) {
  return std::min(min_eigenvalue(clone_matrix(Vec3::Zero(), params)),
                  min_eigenvalue(clone_matrix(Vec3::UnitZ(), params)));
}

namespace {

void require_physical(const ClonerParams& params) {
  const double lowest = cloner_min_eigenvalue(params);
  if (lowest < kPsdFloor) {
    std::ostringstream msg;
    msg << "cloner (eta = " << params.eta << ", t = " << params.t << ") has eigenvalue " << lowest;
    throw Error(Errc::unphysical_params, msg.str());
  }
}

}  // namespace

DenseOperator clone(const BlochState& b, const ClonerParams& params) {
  require_physical(params);
  return {2, clone_matrix(b.vector(), params)};
}

double fbar_via_clone(const RadialPrior& prior, const ClonerParams& params,
                      const DirectOptions& options) {
  require_physical(params);
  PovmOptions popts;
  popts.exec = options.exec;
  popts.quadrature_order = options.radial_order;
  const Povm povm = build_povm(2, prior, popts);
  const StateMap to_clone = [params](const Vec3& b) { return clone_matrix(b, params); };

  // Guesses are re-optimized on the clone's own outcome statistics.
  auto optimum = [&](int radial, int polar) {
    double total = 0.0;
    for (const ElementMoments& m :
         element_moments(povm, prior, radial, polar, options.exec, to_clone)) {
      total += 0.5 * (m.P + std::hypot(m.A, m.B));
    }
    return total;
  };
  const int polar = options.polar_nodes > 0 ? options.polar_nodes : 4;
  const double value = optimum(options.radial_order, polar);
  if (!options.refine) return value;
  const double refined = optimum(2 * options.radial_order, 2 * polar);
  if (std::abs(refined - value) > options.tolerance) {
    std::ostringstream msg;
    msg << "doubling the nodes moved the clone fidelity by " << std::abs(refined - value);
    throw Error(Errc::quadrature_nonconvergence, msg.str());
  }
  return refined;
}

std::vector<PhysicalityPoint> cloner_physicality_scan(const std::vector<double>& etas) {
  std::vector<PhysicalityPoint> out;
  out.reserve(etas.size());
  for (double eta : etas) {
    PhysicalityPoint p;
    p.eta = eta;
    p.t = eta / 2.0;
    p.min_eigenvalue = cloner_min_eigenvalue({p.eta, p.t});
    p.physical = p.min_eigenvalue >= kPsdFloor;
    out.push_back(p);
  }
  return out;
}

}  // namespace minmeas
