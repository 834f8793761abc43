#include "minmeas/kernels.hpp"

#include <cmath>
#include <functional>
#include <numbers>

namespace minmeas::kernels {

namespace {

inline int bit_of(std::size_t index, int n, int qubit) {
  return static_cast<int>((index >> (n - 1 - qubit)) & 1U);
}

}  // namespace

CMatrix tensor_power(const Eigen::Matrix2cd& a, int n, Exec exec) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix out(dim, dim);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (Eigen::Index x = 0; x < dim; ++x) {
    for (Eigen::Index y = 0; y < dim; ++y) {
      Complex v = 1.0;
      for (int q = 0; q < n; ++q) {
        v *= a(bit_of(x, n, q), bit_of(y, n, q));
      }
      out(x, y) = v;
    }
  }
  return out;
}

std::vector<Arrangement> arrangements(int n, int pair_count) {
  std::vector<Arrangement> out;
  const int paired = 2 * pair_count;
  if (pair_count < 0 || paired > n) return out;

  // Choose which qubits carry singlets, then enumerate perfect matchings.
  std::vector<int> chosen;
  std::function<void(std::vector<int>&, std::vector<std::pair<int, int>>&,
                     const std::vector<int>&)>
      match = [&](std::vector<int>& rest, std::vector<std::pair<int, int>>& acc,
                  const std::vector<int>& dirs) {
        if (rest.empty()) {
          out.push_back({acc, dirs});
          return;
        }
        const int first = rest.front();
        for (std::size_t k = 1; k < rest.size(); ++k) {
          std::vector<int> next;
          next.reserve(rest.size() - 2);
          for (std::size_t m = 1; m < rest.size(); ++m) {
            if (m != k) next.push_back(rest[m]);
          }
          acc.emplace_back(first, rest[k]);
          match(next, acc, dirs);
          acc.pop_back();
        }
      };

  std::function<void(int)> choose = [&](int start) {
    if (static_cast<int>(chosen.size()) == paired) {
      std::vector<int> dirs;
      std::size_t c = 0;
      for (int q = 0; q < n; ++q) {
        if (c < chosen.size() && chosen[c] == q) {
          ++c;
        } else {
          dirs.push_back(q);
        }
      }
      std::vector<int> rest = chosen;
      std::vector<std::pair<int, int>> acc;
      match(rest, acc, dirs);
      return;
    }
    for (int q = start; q < n; ++q) {
      chosen.push_back(q);
      choose(q + 1);
      chosen.pop_back();
    }
  };
  choose(0);
  return out;
}

CVector arrangement_state(int n, const Arrangement& arrangement, const Spinor& spinor) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  CVector psi(dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    Complex v = 1.0;
    for (const auto& [i, j] : arrangement.pairs) {
      const int bi = bit_of(x, n, i);
      const int bj = bit_of(x, n, j);
      if (bi == bj) {
        v = 0.0;
        break;
      }
      v *= (bi == 0) ? inv_sqrt2 : -inv_sqrt2;
    }
    if (v != 0.0) {
      for (int q : arrangement.direction_qubits) v *= spinor(bit_of(x, n, q));
    }
    psi(x) = v;
  }
  return psi;
}

CMatrix arrangement_sum(int n, std::span<const Arrangement> arrangements, const Spinor& spinor,
                        Exec exec) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  const auto count = static_cast<Eigen::Index>(arrangements.size());
  CMatrix states(dim, count);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (Eigen::Index a = 0; a < count; ++a) {
    states.col(a) = arrangement_state(n, arrangements[a], spinor);
  }

  // Column j of states * states^dagger; one GEMV per column keeps the
  // accumulation order independent of the thread count.
  CMatrix out(dim, dim);
  const CMatrix states_h = states.adjoint();
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (Eigen::Index j = 0; j < dim; ++j) {
    out.col(j).noalias() = states * states_h.col(j);
  }
  return out;
}

double trace_product_real(const CMatrix& a, const CMatrix& b) {
  // Tr(AB) = sum_ij A_ij B_ji
  double acc = 0.0;
  const Eigen::Index dim = a.rows();
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      acc += (a(i, j) * b(j, i)).real();
    }
  }
  return acc;
}

}  // namespace minmeas::kernels
