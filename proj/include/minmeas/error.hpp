#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace minmeas {

enum class Errc {
  invalid_bloch_vector,
  size_limit_exceeded,
  empty_subset,
  invalid_argument,
  not_positive_semidefinite,
  unnormalized_prior,
  parity_mismatch,
  schema_violation,
  radius_out_of_range,
  unsupported_twice_s,
  infeasible_count,
  convergence_failure,
  missing_direction_set,
  identity_residual,
  quadrature_nonconvergence,
  override_count_mismatch,
  unphysical_params,
  optimizer_nonconvergence,
  io_error,
};

std::string_view errc_name(Errc code) noexcept;

/// All library failures are reported through this exception; `code()` lets
/// callers (and tests) tell the failure classes apart.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace minmeas
