#pragma once

// Isotropic a-priori distributions over the Bloch ball and the radial and
// angular integrals evaluated against them.
//
// A prior is a nonnegative radial measure normalized as
//   sum_k mass_k + 4 pi int_0^1 b^2 f(b) db = 1.
// Point masses are kept exact; the smooth part is integrated with
// Gauss-Legendre in theta = asin(b), which makes the sqrt(1 - b^2) factors
// appearing in every integrand smooth.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace minmeas {

inline constexpr int kDefaultQuadratureOrder = 64;
inline constexpr double kNormalizationTolerance = 1e-9;

struct PointMass {
  double radius = 0.0;
  double mass = 0.0;
};

/// Smooth radial density f(b), scaled so its probability mass is `weight()`.
class RadialDensity {
 public:
  enum class Kind { uniform_ball, table };

  /// f = weight * 3 / (4 pi).
  static RadialDensity uniform_ball(double weight = 1.0);
  /// Piecewise-linear interpolation of (b, f) samples, rescaled to `weight`.
  static RadialDensity table(std::vector<double> b, std::vector<double> f, double weight = 1.0);

  Kind kind() const { return kind_; }
  double weight() const { return weight_; }
  /// Factor applied to the tabulated values so the table carries `weight()`.
  double renormalization_factor() const { return renorm_; }

  double operator()(double b) const;
  /// Segment edges; the density is smooth inside each segment.
  std::vector<double> breakpoints() const;

  const std::vector<double>& table_b() const { return b_; }
  const std::vector<double>& table_f() const { return f_; }

 private:
  RadialDensity() = default;

  Kind kind_ = Kind::uniform_ball;
  double weight_ = 1.0;
  double renorm_ = 1.0;
  std::vector<double> b_;
  std::vector<double> f_;  // already rescaled
};

/// Discrete radial measure: sum_j weight[j] * h(radius[j]) approximates
/// 4 pi int b^2 f(b) h(b) db (exactly for point masses).
struct RadialRule {
  std::vector<double> radius;
  std::vector<double> weight;

  std::size_t size() const { return radius.size(); }
  double total() const;
};

class RadialPrior {
 public:
  /// Validates radii, masses and normalization.
  RadialPrior(std::vector<PointMass> points, std::optional<RadialDensity> density, std::string id);

  static RadialPrior pure();
  static RadialPrior random();
  static RadialPrior uniform_ball();
  /// mass0 at radius0 plus mass1 at radius1.
  static RadialPrior two_point(double mass0, double radius0, double mass1, double radius1);

  const std::string& id() const { return id_; }
  std::span<const PointMass> points() const { return points_; }
  const std::optional<RadialDensity>& density() const { return density_; }
  double renormalization_factor() const { return density_ ? density_->renormalization_factor() : 1.0; }

  /// Exact total probability (point masses plus smooth weight).
  double total_mass() const;

  /// Quadrature for the radial measure; `order` Gauss-Legendre nodes per
  /// smooth segment.
  RadialRule rule(int order = kDefaultQuadratureOrder) const;

 private:
  std::vector<PointMass> points_;
  std::optional<RadialDensity> density_;
  std::string id_;
};

/// I_alpha = 4 pi int b^2 f(b) ((1 - b^2)/4)^alpha db with alpha = twice_alpha / 2.
double moment_I(const RadialPrior& prior, int twice_alpha, int order = kDefaultQuadratureOrder);
double moment_I(const RadialRule& rule, int twice_alpha);

struct GIntegrals {
  double g1 = 0.0;
  double g2 = 0.0;
};

/// Sector integrals over the prior with dOmega reduced to 2 pi int du:
///   g1 = <x^{(N+1)/2 - s} ((1 + b u)/2)^{2s}>
///   g2 = <x^{N/2 - s}     ((1 + b u)/2)^{2s} (b u / 2)>,   x = (1 - b^2)/4.
/// Requires twice_s == copies (mod 2) and 0 <= twice_s <= copies.
GIntegrals g_integrals(const RadialPrior& prior, int copies, int twice_s,
                       int order = kDefaultQuadratureOrder);
GIntegrals g_integrals(const RadialRule& rule, int copies, int twice_s);

/// Prior from a JSON document (see README for the schema).
RadialPrior load_prior(std::string_view json_text, std::string id = "file");
RadialPrior load_prior_file(const std::filesystem::path& path);

/// Builtin name (pure | random | uniform-ball | two-point[:m@b,m@b]) or a
/// path to a JSON prior file.
RadialPrior parse_prior_spec(std::string_view spec);

}  // namespace minmeas
