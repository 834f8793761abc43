#pragma once

// Data-parallel inner loops. Every kernel takes an Exec flag; Exec::serial
// is the reference path kept for tests and the benchmark, Exec::parallel
// spreads the outer loop over OpenMP threads. Results are bit-identical.

#include <span>
#include <utility>
#include <vector>

#include "minmeas/exec.hpp"
#include "minmeas/qlin.hpp"

namespace minmeas::kernels {

/// A^{(x)n} for a 2x2 matrix A, entry (x, y) = prod_q A[x_q][y_q].
CMatrix tensor_power(const Eigen::Matrix2cd& a, int n, Exec exec);

/// One distinct placement of singlet pairs and direction slots among n qubits.
struct Arrangement {
  std::vector<std::pair<int, int>> pairs;  // each pair (i < j) carries a singlet
  std::vector<int> direction_qubits;       // each carries |n>
};

/// All distinct arrangements of `pair_count` singlets and n - 2*pair_count
/// direction qubits. Count = C(n, 2p) * (2p-1)!!. Deterministic order.
std::vector<Arrangement> arrangements(int n, int pair_count);

/// |sigma>^{(x)p} (x) |n>^{(x)2s} with factors placed per the arrangement.
CVector arrangement_state(int n, const Arrangement& arrangement, const Spinor& spinor);

/// sum_a |psi_a><psi_a| over the given arrangements.
CMatrix arrangement_sum(int n, std::span<const Arrangement> arrangements, const Spinor& spinor,
                        Exec exec);

/// Re Tr(A B) for square A, B of equal size.
double trace_product_real(const CMatrix& a, const CMatrix& b);

}  // namespace minmeas::kernels
