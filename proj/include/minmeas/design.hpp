#pragma once

// Weighted direction sets {n_i, c_i^2} whose coherent projectors resolve the
// identity on the symmetric subspace of 2s qubits:
//   sum_i c_i^2 |n_i><n_i|^{(x)2s} = P_sym.
// Taking the trace and the first moment gives sum c_i^2 = 2s+1 and
// sum c_i^2 n_i = 0.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minmeas/exec.hpp"
#include "minmeas/qlin.hpp"

namespace minmeas {

struct DirectionEntry {
  Vec3 n;
  double c_sq = 0.0;
};

struct DirectionSet {
  int twice_s = 0;
  std::vector<DirectionEntry> entries;

  std::size_t size() const { return entries.size(); }
};

/// Minimal outcome count for 2s copies of a pure state: 1, 2, 4, 6, 10, 12
/// for 2s = 0..5; empty beyond that (not established).
std::optional<int> minimal_pure_outcomes(int twice_s);

/// Antipodal pair (2s=1), tetrahedron (2s=2), octahedron (2s=3), in the
/// canonical frame. Throws unsupported_twice_s otherwise.
DirectionSet builtin_direction_set(int twice_s);

struct DesignReport {
  double design_residual = 0.0;   // max |sum c^2 |n><n|^{(x)2s} - P_sym|
  double weight_sum_error = 0.0;  // |sum c^2 - (2s+1)|
  double centroid_error = 0.0;    // |sum c^2 n|
  int frame_rank = 0;             // rank of the frame operator on 2^{2s} dims
  bool pass = false;
};

inline constexpr double kDesignTolerance = 1e-8;
inline constexpr double kDesignConstraintTolerance = 1e-9;

/// Report-only check; never throws for well-formed input.
DesignReport verify_direction_set(const DirectionSet& set,
                                  double design_tolerance = kDesignTolerance,
                                  double constraint_tolerance = kDesignConstraintTolerance);

enum class WeightMode { automatic, free, uniform };

struct SolverOptions {
  int restarts = 64;     // total budget
  int batch = 8;         // restarts evaluated together; selection happens per batch
  int max_iterations = 500;
  double tolerance = 1e-10;
  /// automatic: uniform weights for 2s in {1, 2, 3, 5}, free otherwise.
  WeightMode weights = WeightMode::automatic;
  Exec exec = Exec::parallel;
};

struct SolveResult {
  DirectionSet set;
  DesignReport report;
  double residual = 0.0;  // max-norm design residual in the symmetric basis
  int restart = -1;       // index of the restart that produced `set`
  int restarts_tried = 0;
  std::uint64_t seed = 0;
};

/// Multi-start Levenberg-Marquardt on the design residual plus penalties for
/// the weight-sum and centroid constraints. Starts come from a Halton
/// sequence on the sphere offset by `seed`. Output is canonicalized.
/// Throws infeasible_count for count < 2s+1 and convergence_failure when no
/// restart reaches `tolerance`.
SolveResult solve_direction_set(int twice_s, int count, std::uint64_t seed,
                                const SolverOptions& options = {});

/// First entry to +z, the nearest off-axis entry into the xz-plane (x > 0),
/// then entries sorted by (z descending, x, y).
DirectionSet canonicalize(DirectionSet set);

DirectionSet rotate(const DirectionSet& set, const Eigen::Matrix3d& rotation);

/// Frame residual matrix sum c^2 |v_i><v_i| - I in the symmetric (Dicke)
/// basis of dimension 2s+1.
CMatrix symmetric_frame_residual(const DirectionSet& set);

std::string direction_set_to_json(const DirectionSet& set,
                                  const std::optional<SolveResult>& certificate = std::nullopt);
DirectionSet direction_set_from_json(std::string_view text);
DirectionSet load_direction_set_file(const std::filesystem::path& path);
void save_direction_set_file(const std::filesystem::path& path, const DirectionSet& set,
                             const std::optional<SolveResult>& certificate = std::nullopt);

/// Direction sets keyed by 2s.
class DirectionCatalog {
 public:
  DirectionCatalog() = default;

  /// Builtins for 2s <= 3 plus cached solver output found in data_dir().
  static DirectionCatalog standard();
  /// $MINMEAS_DATA_DIR if set, else the directory configured at build time.
  static std::filesystem::path data_dir();
  static std::filesystem::path cache_file(int twice_s);

  void set(DirectionSet set);
  bool has(int twice_s) const { return sets_.contains(twice_s); }
  /// Throws missing_direction_set.
  const DirectionSet& get(int twice_s) const;

  DirectionCatalog rotated(const Eigen::Matrix3d& rotation) const;

 private:
  std::map<int, DirectionSet> sets_;
};

}  // namespace minmeas
