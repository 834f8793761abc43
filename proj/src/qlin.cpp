#include "minmeas/qlin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "minmeas/error.hpp"
#include "minmeas/kernels.hpp"

namespace minmeas {

namespace {

void check_copies(int n, int max_copies) {
  if (n < 1) throw Error(Errc::invalid_argument, "copy count must be >= 1");
  if (n > max_copies) {
    std::ostringstream msg;
    msg << n << " copies exceeds the cap of " << max_copies;
    throw Error(Errc::size_limit_exceeded, msg.str());
  }
}

int bit_of(std::size_t index, int n, int qubit) {
  return static_cast<int>((index >> (n - 1 - qubit)) & 1U);
}

/// Single-qubit operator acting on `qubit` of an n-qubit register.
CMatrix embed_single(int n, int qubit, const Eigen::Matrix2cd& op) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  const std::size_t mask = std::size_t{1} << (n - 1 - qubit);
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    const auto xs = static_cast<std::size_t>(x);
    const auto partner = static_cast<Eigen::Index>(xs ^ mask);
    const int bx = bit_of(xs, n, qubit);
    out(x, x) = op(bx, bx);
    out(x, partner) = op(bx, 1 - bx);
  }
  return out;
}

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m) {
  const CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

}  // namespace

// ---------------------------------------------------------------- BlochState

BlochState::BlochState(const Vec3& b) : b_(b) {
  if (!b.allFinite() || b.norm() > 1.0 + kBlochTolerance) {
    std::ostringstream msg;
    msg << "|b| = " << b.norm() << " > 1";
    throw Error(Errc::invalid_bloch_vector, msg.str());
  }
}

BlochState BlochState::along(const Vec3& direction, double r) {
  const double len = direction.norm();
  if (len == 0.0) return BlochState();
  return BlochState(direction * (r / len));
}

// ------------------------------------------------------------- DenseOperator

DenseOperator::DenseOperator(int qubits, CMatrix matrix) : qubits_(qubits), m_(std::move(matrix)) {
  const Eigen::Index expected = Eigen::Index{1} << qubits;
  if (qubits < 0 || m_.rows() != expected || m_.cols() != expected) {
    std::ostringstream msg;
    msg << "matrix of size " << m_.rows() << "x" << m_.cols() << " does not match " << qubits
        << " qubits";
    throw Error(Errc::invalid_argument, msg.str());
  }
}

DenseOperator DenseOperator::identity(int qubits) {
  const Eigen::Index dim = Eigen::Index{1} << qubits;
  return {qubits, CMatrix::Identity(dim, dim)};
}

DenseOperator DenseOperator::zero(int qubits) {
  const Eigen::Index dim = Eigen::Index{1} << qubits;
  return {qubits, CMatrix::Zero(dim, dim)};
}

bool DenseOperator::is_hermitian(double tol) const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() < tol;
}

Eigen::VectorXd DenseOperator::eigenvalues() const { return hermitian_eigenvalues(m_); }

int DenseOperator::rank(double threshold) const {
  const Eigen::VectorXd ev = eigenvalues();
  return static_cast<int>((ev.array() > threshold).count());
}

bool DenseOperator::is_positive_semidefinite(double floor) const {
  return eigenvalues().minCoeff() >= floor;
}

DenseOperator& DenseOperator::operator+=(const DenseOperator& other) {
  if (other.qubits_ != qubits_) throw Error(Errc::invalid_argument, "qubit count mismatch");
  m_ += other.m_;
  return *this;
}

DenseOperator& DenseOperator::operator-=(const DenseOperator& other) {
  if (other.qubits_ != qubits_) throw Error(Errc::invalid_argument, "qubit count mismatch");
  m_ -= other.m_;
  return *this;
}

DenseOperator& DenseOperator::operator*=(Complex scale) {
  m_ *= scale;
  return *this;
}

DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
  if (a.qubits() != b.qubits()) throw Error(Errc::invalid_argument, "qubit count mismatch");
  return {a.qubits(), a.matrix() * b.matrix()};
}

double max_abs_diff(const DenseOperator& a, const DenseOperator& b) {
  if (a.qubits() != b.qubits()) throw Error(Errc::invalid_argument, "qubit count mismatch");
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

double commutator_norm(const DenseOperator& a, const DenseOperator& b) {
  const CMatrix c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
  return c.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------- QubitPermutation

QubitPermutation::QubitPermutation(std::vector<int> mapping) : map_(std::move(mapping)) {
  std::vector<bool> seen(map_.size(), false);
  for (int target : map_) {
    if (target < 0 || target >= size() || seen[target]) {
      throw Error(Errc::invalid_argument, "mapping is not a bijection on {0..n-1}");
    }
    seen[target] = true;
  }
}

QubitPermutation QubitPermutation::identity(int n) {
  std::vector<int> m(n);
  for (int k = 0; k < n; ++k) m[k] = k;
  return QubitPermutation(std::move(m));
}

QubitPermutation QubitPermutation::transposition(int n, int i, int j) {
  std::vector<int> m(n);
  for (int k = 0; k < n; ++k) m[k] = k;
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw Error(Errc::invalid_argument, "transposition index out of range");
  }
  std::swap(m[i], m[j]);
  return QubitPermutation(std::move(m));
}

QubitPermutation QubitPermutation::operator*(const QubitPermutation& other) const {
  if (other.size() != size()) throw Error(Errc::invalid_argument, "permutation size mismatch");
  std::vector<int> m(map_.size());
  for (int k = 0; k < size(); ++k) m[k] = map_[other.map_[k]];
  return QubitPermutation(std::move(m));
}

QubitPermutation QubitPermutation::inverse() const {
  std::vector<int> m(map_.size());
  for (int k = 0; k < size(); ++k) m[map_[k]] = k;
  return QubitPermutation(std::move(m));
}

std::size_t QubitPermutation::apply_to_index(std::size_t index) const {
  const int n = size();
  std::size_t out = 0;
  for (int k = 0; k < n; ++k) {
    const std::size_t bit = (index >> (n - 1 - k)) & 1U;
    out |= bit << (n - 1 - map_[k]);
  }
  return out;
}

// --------------------------------------------------------------- operations

const Eigen::Matrix2cd& pauli_x() {
  static const Eigen::Matrix2cd m = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
  return m;
}

const Eigen::Matrix2cd& pauli_y() {
  static const Eigen::Matrix2cd m =
      (Eigen::Matrix2cd() << 0, Complex(0, -1), Complex(0, 1), 0).finished();
  return m;
}

const Eigen::Matrix2cd& pauli_z() {
  static const Eigen::Matrix2cd m = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
  return m;
}

DenseOperator density_from_bloch(const BlochState& b) {
  const Vec3& v = b.vector();
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  m += v.x() * pauli_x() + v.y() * pauli_y() + v.z() * pauli_z();
  return {1, CMatrix(0.5 * m)};
}

DenseOperator tensor_power(const DenseOperator& rho, int n, int max_copies, Exec exec) {
  check_copies(n, max_copies);
  if (rho.qubits() != 1) throw Error(Errc::invalid_argument, "tensor_power expects a 2x2 operator");
  const Eigen::Matrix2cd a = rho.matrix();
  return {n, kernels::tensor_power(a, n, exec)};
}

DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
  const Eigen::Index da = a.dim();
  const Eigen::Index db = b.dim();
  CMatrix out(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index j = 0; j < da; ++j) {
      out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
    }
  }
  return {a.qubits() + b.qubits(), std::move(out)};
}

DenseOperator permutation_operator(const QubitPermutation& p, int max_copies) {
  const int n = p.size();
  check_copies(n, max_copies);
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    const auto y = static_cast<Eigen::Index>(p.apply_to_index(static_cast<std::size_t>(x)));
    out(y, x) = 1.0;
  }
  return {n, std::move(out)};
}

DenseOperator total_spin_squared(int n, std::span<const int> subset, int max_copies) {
  check_copies(n, max_copies);
  if (subset.empty()) throw Error(Errc::empty_subset, "spin operator needs at least one qubit");
  std::vector<bool> seen(n, false);
  for (int q : subset) {
    if (q < 0 || q >= n || seen[q]) {
      throw Error(Errc::invalid_argument, "subset index out of range or repeated");
    }
    seen[q] = true;
  }
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix s2 = CMatrix::Zero(dim, dim);
  for (const Eigen::Matrix2cd* pauli : {&pauli_x(), &pauli_y(), &pauli_z()}) {
    CMatrix s = CMatrix::Zero(dim, dim);
    for (int q : subset) s += embed_single(n, q, 0.5 * *pauli);
    s2 += s * s;
  }
  return {n, std::move(s2)};
}

CVector singlet_state() {
  CVector v = CVector::Zero(4);
  v(1) = 1.0 / std::numbers::sqrt2;   // |01>
  v(2) = -1.0 / std::numbers::sqrt2;  // |10>
  return v;
}

DenseOperator singlet_projector() {
  const CVector v = singlet_state();
  return {2, v * v.adjoint()};
}

Spinor coherent_spinor(const Vec3& n) {
  const Vec3 u = n.normalized();
  Spinor s;
  if (u.z() >= 0.0) {
    const double a = std::sqrt(0.5 * (1.0 + u.z()));
    s(0) = a;
    s(1) = Complex(u.x(), u.y()) / (2.0 * a);
  } else {
    const double b = std::sqrt(0.5 * (1.0 - u.z()));
    s(1) = b;
    s(0) = Complex(u.x(), -u.y()) / (2.0 * b);
  }
  return s;
}

CVector product_state(std::span<const Spinor> factors) {
  CVector v = CVector::Ones(1);
  for (const Spinor& f : factors) {
    CVector next(v.size() * 2);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      next(2 * i) = v(i) * f(0);
      next(2 * i + 1) = v(i) * f(1);
    }
    v = std::move(next);
  }
  return v;
}

double uhlmann_fidelity(const DenseOperator& rho, const DenseOperator& sigma) {
  if (rho.qubits() != sigma.qubits()) {
    throw Error(Errc::invalid_argument, "fidelity arguments differ in dimension");
  }
  const CMatrix hr = 0.5 * (rho.matrix() + rho.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> er(hr);
  if (er.eigenvalues().minCoeff() < kPsdFloor || sigma.eigenvalues().minCoeff() < kPsdFloor) {
    throw Error(Errc::not_positive_semidefinite, "fidelity input has a negative eigenvalue");
  }
  const Eigen::VectorXd root = er.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMatrix sqrt_rho = er.eigenvectors() * root.asDiagonal() * er.eigenvectors().adjoint();
  const CMatrix inner = sqrt_rho * sigma.matrix() * sqrt_rho;
  const Eigen::VectorXd ev = hermitian_eigenvalues(inner);
  const double tr = ev.cwiseMax(0.0).cwiseSqrt().sum();
  return tr * tr;
}

double bloch_fidelity(double b_dot_r, double b, double r) {
  const double bb = std::clamp(b, 0.0, 1.0);
  const double rr = std::clamp(r, 0.0, 1.0);
  return 0.5 * (1.0 + b_dot_r + std::sqrt((1.0 - bb) * (1.0 + bb)) * std::sqrt((1.0 - rr) * (1.0 + rr)));
}

double bloch_fidelity(const BlochState& b, const BlochState& r) {
  return bloch_fidelity(b.vector().dot(r.vector()), b.radius(), r.radius());
}

}  // namespace minmeas
