#include "minmeas/error.hpp"

namespace minmeas {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_bloch_vector: return "invalid Bloch vector";
    case Errc::size_limit_exceeded: return "size limit exceeded";
    case Errc::empty_subset: return "empty subset";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::not_positive_semidefinite: return "not positive semidefinite";
    case Errc::unnormalized_prior: return "unnormalized prior";
    case Errc::parity_mismatch: return "parity mismatch";
    case Errc::schema_violation: return "schema violation";
    case Errc::radius_out_of_range: return "radius out of range";
    case Errc::unsupported_twice_s: return "unsupported twice_s";
    case Errc::infeasible_count: return "infeasible count";
    case Errc::convergence_failure: return "convergence failure";
    case Errc::missing_direction_set: return "missing direction set";
    case Errc::identity_residual: return "identity residual too large";
    case Errc::quadrature_nonconvergence: return "quadrature non-convergence";
    case Errc::override_count_mismatch: return "override count mismatch";
    case Errc::unphysical_params: return "unphysical parameters";
    case Errc::optimizer_nonconvergence: return "optimizer non-convergence";
    case Errc::io_error: return "i/o error";
  }
  return "unknown error";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

}  // namespace minmeas
