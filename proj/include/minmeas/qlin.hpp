#pragma once

// Dense complex operator algebra on N-qubit spaces.
//
// Conventions: qubit 0 is the most significant bit of a basis index;
// |0> is spin up along z, so rho(b) = (I + b.sigma)/2 maps b = z-hat to
// diag(1, 0); the singlet is (|01> - |10>)/sqrt(2).

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "minmeas/exec.hpp"

namespace minmeas {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Spinor = Eigen::Vector2cd;

inline constexpr int kDefaultMaxCopies = 10;
inline constexpr double kBlochTolerance = 1e-12;
inline constexpr double kPsdFloor = -1e-10;

/// Qubit state as a Bloch vector with |b| <= 1.
class BlochState {
 public:
  BlochState() : b_(Vec3::Zero()) {}
  explicit BlochState(const Vec3& b);
  BlochState(double x, double y, double z) : BlochState(Vec3(x, y, z)) {}

  /// r * unit(direction); direction need not be normalized.
  static BlochState along(const Vec3& direction, double r);

  const Vec3& vector() const { return b_; }
  double radius() const { return b_.norm(); }
  double z() const { return b_.z(); }

 private:
  Vec3 b_;
};

/// Complex matrix acting on the 2^qubits dimensional space of `qubits` copies.
class DenseOperator {
 public:
  DenseOperator() = default;
  DenseOperator(int qubits, CMatrix matrix);

  static DenseOperator identity(int qubits);
  static DenseOperator zero(int qubits);

  int qubits() const { return qubits_; }
  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }

  Complex trace() const { return m_.trace(); }
  bool is_hermitian(double tol = 1e-12) const;
  /// Ascending eigenvalues of the hermitian part.
  Eigen::VectorXd eigenvalues() const;
  /// Number of eigenvalues above `threshold`.
  int rank(double threshold = 1e-8) const;
  bool is_positive_semidefinite(double floor = kPsdFloor) const;

  DenseOperator adjoint() const { return {qubits_, m_.adjoint()}; }

  DenseOperator& operator+=(const DenseOperator& other);
  DenseOperator& operator-=(const DenseOperator& other);
  DenseOperator& operator*=(Complex scale);

  friend DenseOperator operator+(DenseOperator a, const DenseOperator& b) { return a += b; }
  friend DenseOperator operator-(DenseOperator a, const DenseOperator& b) { return a -= b; }
  friend DenseOperator operator*(DenseOperator a, Complex s) { return a *= s; }
  friend DenseOperator operator*(Complex s, DenseOperator a) { return a *= s; }
  friend DenseOperator operator*(const DenseOperator& a, const DenseOperator& b);

 private:
  int qubits_ = 0;
  CMatrix m_;
};

/// Largest absolute entry of a - b.
double max_abs_diff(const DenseOperator& a, const DenseOperator& b);
/// Largest absolute entry of [a, b].
double commutator_norm(const DenseOperator& a, const DenseOperator& b);

/// Bijection on qubit labels {0..n-1}; qubit k is moved to slot map[k].
class QubitPermutation {
 public:
  explicit QubitPermutation(std::vector<int> mapping);

  static QubitPermutation identity(int n);
  static QubitPermutation transposition(int n, int i, int j);

  int size() const { return static_cast<int>(map_.size()); }
  int operator[](int k) const { return map_[k]; }
  const std::vector<int>& mapping() const { return map_; }

  /// (this * other)[k] = this[other[k]]: apply `other` first.
  QubitPermutation operator*(const QubitPermutation& other) const;
  QubitPermutation inverse() const;

  /// Basis index obtained by moving each qubit's bit to its target slot.
  std::size_t apply_to_index(std::size_t index) const;

 private:
  std::vector<int> map_;
};

const Eigen::Matrix2cd& pauli_x();
const Eigen::Matrix2cd& pauli_y();
const Eigen::Matrix2cd& pauli_z();

DenseOperator density_from_bloch(const BlochState& b);

/// rho^{(x)N}. Throws size_limit_exceeded when n > max_copies.
DenseOperator tensor_power(const DenseOperator& rho, int n, int max_copies = kDefaultMaxCopies,
                           Exec exec = Exec::parallel);

DenseOperator kron(const DenseOperator& a, const DenseOperator& b);

/// Unitary V_p with V_p |x_0 ... x_{n-1}> = |y> where y_{p[k]} = x_k.
DenseOperator permutation_operator(const QubitPermutation& p, int max_copies = kDefaultMaxCopies);

/// (sum_{k in subset} S_k)^2 on n qubits, S_k = sigma_k / 2.
DenseOperator total_spin_squared(int n, std::span<const int> subset,
                                 int max_copies = kDefaultMaxCopies);

CVector singlet_state();
DenseOperator singlet_projector();

/// Spinor |n> with <n|sigma|n> = n for the unit vector n (global phase fixed
/// so that the larger of the two components is real and positive).
Spinor coherent_spinor(const Vec3& n);

/// |psi_0> (x) |psi_1> (x) ... for single-qubit spinors.
CVector product_state(std::span<const Spinor> factors);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 by eigendecomposition.
/// Throws not_positive_semidefinite if either input has an eigenvalue < -1e-10.
double uhlmann_fidelity(const DenseOperator& rho, const DenseOperator& sigma);

/// Closed form (1 + b.r + sqrt(1-b^2) sqrt(1-r^2)) / 2 for qubit states.
double bloch_fidelity(const BlochState& b, const BlochState& r);

/// Same closed form from the scalar ingredients; radii are clamped to [0,1].
double bloch_fidelity(double b_dot_r, double b, double r);

}  // namespace minmeas
