#include "minmeas/design.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <tuple>

#include <Eigen/Geometry>
#include <json.hpp>

#include "minmeas/error.hpp"
#include "minmeas/json_io.hpp"

#ifndef MINMEAS_DATA_DIR
#define MINMEAS_DATA_DIR "data"
#endif

namespace minmeas {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Amplitudes of |n>^{(x)2s} on the Dicke states |D_0> .. |D_2s>.
CVector dicke_coherent(int twice_s, const Spinor& z) {
  CVector v(twice_s + 1);
  for (int k = 0; k <= twice_s; ++k) {
    v(k) = std::sqrt(binomial(twice_s, k)) * std::pow(z(0), twice_s - k) * std::pow(z(1), k);
  }
  return v;
}

/// Projector onto the symmetric subspace of m qubits, built from Dicke states.
CMatrix symmetric_projector(int m) {
  const Eigen::Index dim = Eigen::Index{1} << m;
  CMatrix p = CMatrix::Zero(dim, dim);
  for (int k = 0; k <= m; ++k) {
    CVector d = CVector::Zero(dim);
    const double amp = 1.0 / std::sqrt(binomial(m, k));
    for (Eigen::Index x = 0; x < dim; ++x) {
      if (std::popcount(static_cast<unsigned long long>(x)) == k) d(x) = amp;
    }
    p += d * d.adjoint();
  }
  return p;
}

double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

bool uniform_by_default(int twice_s) {
  return twice_s == 1 || twice_s == 2 || twice_s == 3 || twice_s == 5;
}

/// Least-squares formulation of the design condition.
/// Parameters per entry: unnormalized direction p (3) and, with free
/// weights, q where c^2 = q^2.
class DesignProblem {
 public:
  DesignProblem(int twice_s, int count, bool free_weights)
      : twice_s_(twice_s), count_(count), free_(free_weights), dim_(twice_s + 1) {}

  int stride() const { return free_ ? 4 : 3; }
  int param_count() const { return count_ * stride(); }
  int residual_count() const { return dim_ * dim_ + 4 + count_; }

  double weight(const Eigen::VectorXd& x, int i) const {
    if (!free_) return static_cast<double>(dim_) / count_;
    const double q = x(i * 4 + 3);
    return q * q;
  }

  Vec3 raw_direction(const Eigen::VectorXd& x, int i) const { return x.segment<3>(i * stride()); }

  CMatrix frame_residual(const Eigen::VectorXd& x) const {
    CMatrix r = -CMatrix::Identity(dim_, dim_);
    for (int i = 0; i < count_; ++i) {
      const Vec3 p = raw_direction(x, i);
      if (p.norm() == 0.0) continue;
      const CVector v = dicke_coherent(twice_s_, coherent_spinor(p));
      r += weight(x, i) * (v * v.adjoint());
    }
    return r;
  }

  void residual(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    out.resize(residual_count());
    const CMatrix r = frame_residual(x);
    int row = 0;
    for (int k = 0; k < dim_; ++k) out(row++) = r(k, k).real();
    for (int k = 0; k < dim_; ++k) {
      for (int l = k + 1; l < dim_; ++l) {
        out(row++) = std::numbers::sqrt2 * r(k, l).real();
        out(row++) = std::numbers::sqrt2 * r(k, l).imag();
      }
    }
    double wsum = 0.0;
    Vec3 centroid = Vec3::Zero();
    for (int i = 0; i < count_; ++i) {
      const Vec3 p = raw_direction(x, i);
      const double w = weight(x, i);
      wsum += w;
      if (p.norm() > 0.0) centroid += w * p.normalized();
    }
    out(row++) = wsum - dim_;
    for (int a = 0; a < 3; ++a) out(row++) = centroid(a);
    for (int i = 0; i < count_; ++i) out(row++) = raw_direction(x, i).squaredNorm() - 1.0;
  }

  double design_residual(const Eigen::VectorXd& x) const {
    return frame_residual(x).cwiseAbs().maxCoeff();
  }

  Eigen::VectorXd initial_point(std::uint64_t seed, int restart) const {
    Eigen::VectorXd x(param_count());
    const std::uint64_t base = seed * 1000003ULL + static_cast<std::uint64_t>(restart) * count_ + 1;
    for (int i = 0; i < count_; ++i) {
      const double z = 2.0 * halton(base + i, 2) - 1.0;
      const double phi = 2.0 * std::numbers::pi * halton(base + i, 3);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      x.segment<3>(i * stride()) = Vec3(rho * std::cos(phi), rho * std::sin(phi), z);
      if (free_) x(i * 4 + 3) = std::sqrt(static_cast<double>(dim_) / count_);
    }
    return x;
  }

  DirectionSet to_set(const Eigen::VectorXd& x) const {
    DirectionSet set;
    set.twice_s = twice_s_;
    for (int i = 0; i < count_; ++i) {
      set.entries.push_back({raw_direction(x, i).normalized(), weight(x, i)});
    }
    return set;
  }

 private:
  int twice_s_;
  int count_;
  bool free_;
  int dim_;
};

struct LocalResult {
  Eigen::VectorXd x;
  double residual = std::numeric_limits<double>::infinity();
};

LocalResult levenberg_marquardt(const DesignProblem& problem, Eigen::VectorXd x, int max_iterations) {
  const int n = problem.param_count();
  const int m = problem.residual_count();
  Eigen::VectorXd r(m);
  Eigen::VectorXd rp(m);
  Eigen::VectorXd rm(m);
  Eigen::VectorXd trial_r(m);
  Eigen::MatrixXd jac(m, n);
  problem.residual(x, r);
  double cost = r.squaredNorm();
  double lambda = 1e-3;

  for (int iter = 0; iter < max_iterations; ++iter) {
    if (r.lpNorm<Eigen::Infinity>() < 1e-15) break;
    for (int k = 0; k < n; ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(k)));
      Eigen::VectorXd xs = x;
      xs(k) = x(k) + h;
      problem.residual(xs, rp);
      xs(k) = x(k) - h;
      problem.residual(xs, rm);
      jac.col(k) = (rp - rm) / (2.0 * h);
    }
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    const double diag_floor = 1e-9 * std::max(1.0, normal.diagonal().maxCoeff());

    bool accepted = false;
    Eigen::VectorXd step;
    while (lambda < 1e16) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal().array() += lambda * (normal.diagonal().array() + diag_floor);
      step = damped.ldlt().solve(-grad);
      const Eigen::VectorXd trial = x + step;
      problem.residual(trial, trial_r);
      const double trial_cost = trial_r.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        x = trial;
        r = trial_r;
        cost = trial_cost;
        lambda = std::max(lambda / 5.0, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
    if (step.norm() < 1e-16 * (1.0 + x.norm())) break;
  }
  return {x, problem.design_residual(x)};
}

}  // namespace

std::optional<int> minimal_pure_outcomes(int twice_s) {
  static constexpr int kCounts[] = {1, 2, 4, 6, 10, 12};
  if (twice_s < 0 || twice_s > 5) return std::nullopt;
  return kCounts[twice_s];
}

DirectionSet builtin_direction_set(int twice_s) {
  DirectionSet set;
  set.twice_s = twice_s;
  switch (twice_s) {
    case 1:
      set.entries = {{Vec3(0, 0, 1), 1.0}, {Vec3(0, 0, -1), 1.0}};
      break;
    case 2: {
      const double c = 0.75;
      const double s3 = 1.0 / std::sqrt(3.0);
      set.entries = {{Vec3(s3, s3, s3), c},
                     {Vec3(s3, -s3, -s3), c},
                     {Vec3(-s3, s3, -s3), c},
                     {Vec3(-s3, -s3, s3), c}};
      break;
    }
    case 3: {
      const double c = 2.0 / 3.0;
      set.entries = {{Vec3(0, 0, 1), c},  {Vec3(1, 0, 0), c},  {Vec3(0, 1, 0), c},
                     {Vec3(-1, 0, 0), c}, {Vec3(0, -1, 0), c}, {Vec3(0, 0, -1), c}};
      break;
    }
    default:
      throw Error(Errc::unsupported_twice_s,
                  "no builtin direction set for 2s = " + std::to_string(twice_s));
  }
  return canonicalize(std::move(set));
}

CMatrix symmetric_frame_residual(const DirectionSet& set) {
  const int dim = set.twice_s + 1;
  CMatrix r = -CMatrix::Identity(dim, dim);
  for (const DirectionEntry& e : set.entries) {
    if (e.n.norm() == 0.0) continue;
    const CVector v = dicke_coherent(set.twice_s, coherent_spinor(e.n));
    r += e.c_sq * (v * v.adjoint());
  }
  return r;
}

DesignReport verify_direction_set(const DirectionSet& set, double design_tolerance,
                                  double constraint_tolerance) {
  if (set.twice_s < 1) throw Error(Errc::unsupported_twice_s, "direction sets need 2s >= 1");
  if (set.twice_s > kDefaultMaxCopies) {
    throw Error(Errc::size_limit_exceeded, "2s exceeds the qubit cap");
  }
  const int m = set.twice_s;
  const Eigen::Index dim = Eigen::Index{1} << m;

  DesignReport report;
  bool entries_valid = true;
  CMatrix frame = CMatrix::Zero(dim, dim);
  double wsum = 0.0;
  Vec3 centroid = Vec3::Zero();
  for (const DirectionEntry& e : set.entries) {
    if (!(e.c_sq > 0.0) || std::abs(e.n.norm() - 1.0) > 1e-9) entries_valid = false;
    wsum += e.c_sq;
    if (e.n.norm() == 0.0) continue;
    centroid += e.c_sq * e.n;
    const std::vector<Spinor> factors(m, coherent_spinor(e.n));
    const CVector psi = product_state(factors);
    frame += e.c_sq * (psi * psi.adjoint());
  }
  report.design_residual = (frame - symmetric_projector(m)).cwiseAbs().maxCoeff();
  report.weight_sum_error = std::abs(wsum - (m + 1));
  report.centroid_error = centroid.norm();
  report.frame_rank = DenseOperator(m, frame).rank(1e-8);
  report.pass = entries_valid && report.design_residual < design_tolerance &&
                report.weight_sum_error < constraint_tolerance &&
                report.centroid_error < constraint_tolerance && report.frame_rank == m + 1;
  return report;
}

SolveResult solve_direction_set(int twice_s, int count, std::uint64_t seed,
                                const SolverOptions& options) {
  if (twice_s < 1) throw Error(Errc::unsupported_twice_s, "direction sets need 2s >= 1");
  if (twice_s > kDefaultMaxCopies) throw Error(Errc::size_limit_exceeded, "2s exceeds the qubit cap");
  if (count < twice_s + 1) {
    // The frame operator is a sum of `count` rank-one terms and must have rank 2s+1.
    throw Error(Errc::infeasible_count, "count " + std::to_string(count) + " < 2s+1 = " +
                                            std::to_string(twice_s + 1));
  }
  if (options.restarts < 1 || options.batch < 1) {
    throw Error(Errc::invalid_argument, "restart budget and batch must be >= 1");
  }
  const bool free_weights = options.weights == WeightMode::free ||
                            (options.weights == WeightMode::automatic && !uniform_by_default(twice_s));
  const DesignProblem problem(twice_s, count, free_weights);

  double best_seen = std::numeric_limits<double>::infinity();
  for (int start = 0; start < options.restarts; start += options.batch) {
    const int end = std::min(options.restarts, start + options.batch);
    std::vector<LocalResult> results(end - start);
#pragma omp parallel for schedule(dynamic) if (options.exec == Exec::parallel)
    for (int k = start; k < end; ++k) {
      results[k - start] =
          levenberg_marquardt(problem, problem.initial_point(seed, k), options.max_iterations);
    }
    int chosen = -1;
    for (int k = start; k < end; ++k) {
      const double res = results[k - start].residual;
      best_seen = std::min(best_seen, res);
      if (res < options.tolerance && (chosen < 0 || res < results[chosen - start].residual)) {
        chosen = k;
      }
    }
    if (chosen >= 0) {
      SolveResult out;
      out.set = canonicalize(problem.to_set(results[chosen - start].x));
      out.residual = symmetric_frame_residual(out.set).cwiseAbs().maxCoeff();
      out.report = verify_direction_set(out.set);
      out.restart = chosen;
      out.restarts_tried = end;
      out.seed = seed;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "no restart reached residual " << options.tolerance << " (best " << best_seen << " after "
      << options.restarts << " restarts)";
  throw Error(Errc::convergence_failure, msg.str());
}

DirectionSet rotate(const DirectionSet& set, const Eigen::Matrix3d& rotation) {
  DirectionSet out = set;
  for (DirectionEntry& e : out.entries) e.n = rotation * e.n;
  return out;
}

DirectionSet canonicalize(DirectionSet set) {
  if (set.entries.empty()) return set;
  for (DirectionEntry& e : set.entries) e.n.normalize();

  const Eigen::Matrix3d to_pole =
      Eigen::Quaterniond::FromTwoVectors(set.entries.front().n, Vec3::UnitZ()).toRotationMatrix();
  set = rotate(set, to_pole);
  set.entries.front().n = Vec3::UnitZ();

  auto key = [](double v) { return std::llround(v * 1e9); };
  int second = -1;
  for (int j = 1; j < static_cast<int>(set.entries.size()); ++j) {
    const Vec3& n = set.entries[j].n;
    if (std::hypot(n.x(), n.y()) < 1e-9) continue;
    if (second < 0 || key(n.z()) > key(set.entries[second].n.z())) second = j;
  }
  if (second > 0) {
    const Vec3& n = set.entries[second].n;
    const double angle = -std::atan2(n.y(), n.x());
    set = rotate(set, Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix());
  }
  set.entries.front().n = Vec3::UnitZ();
  for (DirectionEntry& e : set.entries) {
    e.n.normalize();
    for (int a = 0; a < 3; ++a) {
      if (std::abs(e.n(a)) < 1e-14) e.n(a) = 0.0;
    }
  }
  std::stable_sort(set.entries.begin(), set.entries.end(),
                   [&](const DirectionEntry& a, const DirectionEntry& b) {
                     return std::make_tuple(-key(a.n.z()), key(a.n.x()), key(a.n.y()), key(a.c_sq)) <
                            std::make_tuple(-key(b.n.z()), key(b.n.x()), key(b.n.y()), key(b.c_sq));
                   });
  return set;
}

// -------------------------------------------------------------------- file io

std::string direction_set_to_json(const DirectionSet& set,
                                  const std::optional<SolveResult>& certificate) {
  std::ostringstream os;
  os << "{\n  \"twice_s\": " << set.twice_s << ",\n  \"entries\": [\n";
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const DirectionEntry& e = set.entries[i];
    os << "    {\"n\": [" << io::fmt17(e.n.x()) << ", " << io::fmt17(e.n.y()) << ", "
       << io::fmt17(e.n.z()) << "], \"c_sq\": " << io::fmt17(e.c_sq) << "}"
       << (i + 1 < set.entries.size() ? "," : "") << "\n";
  }
  os << "  ]";
  if (certificate) {
    const DesignReport rep = verify_direction_set(set);
    os << ",\n  \"certificate\": {\n"
       << "    \"symmetric_residual\": " << io::fmt17(certificate->residual) << ",\n"
       << "    \"design_residual\": " << io::fmt17(rep.design_residual) << ",\n"
       << "    \"weight_sum_error\": " << io::fmt17(rep.weight_sum_error) << ",\n"
       << "    \"centroid_error\": " << io::fmt17(rep.centroid_error) << ",\n"
       << "    \"frame_rank\": " << rep.frame_rank << ",\n"
       << "    \"seed\": " << certificate->seed << ",\n"
       << "    \"restart\": " << certificate->restart << ",\n"
       << "    \"restarts_tried\": " << certificate->restarts_tried << "\n  }";
  }
  os << "\n}\n";
  return os.str();
}

DirectionSet direction_set_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::schema_violation, std::string("direction set is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("twice_s") || !doc["twice_s"].is_number_integer() ||
      !doc.contains("entries") || !doc["entries"].is_array()) {
    throw Error(Errc::schema_violation, "direction set needs integer \"twice_s\" and \"entries\"");
  }
  DirectionSet set;
  set.twice_s = doc["twice_s"].get<int>();
  for (const auto& e : doc["entries"]) {
    if (!e.is_object() || !e.contains("n") || !e["n"].is_array() || e["n"].size() != 3 ||
        !e.contains("c_sq") || !e["c_sq"].is_number()) {
      throw Error(Errc::schema_violation, "each entry needs \"n\": [x,y,z] and numeric \"c_sq\"");
    }
    Vec3 n;
    for (int a = 0; a < 3; ++a) {
      if (!e["n"][a].is_number()) throw Error(Errc::schema_violation, "direction components must be numbers");
      n(a) = e["n"][a].get<double>();
    }
    set.entries.push_back({n, e["c_sq"].get<double>()});
  }
  return set;
}

DirectionSet load_direction_set_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read direction-set file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return direction_set_from_json(buf.str());
}

void save_direction_set_file(const std::filesystem::path& path, const DirectionSet& set,
                             const std::optional<SolveResult>& certificate) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << direction_set_to_json(set, certificate);
}

// ------------------------------------------------------------------- catalog

std::filesystem::path DirectionCatalog::data_dir() {
  if (const char* env = std::getenv("MINMEAS_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return MINMEAS_DATA_DIR;
}

std::filesystem::path DirectionCatalog::cache_file(int twice_s) {
  return data_dir() / ("design_2s" + std::to_string(twice_s) + ".json");
}

DirectionCatalog DirectionCatalog::standard() {
  DirectionCatalog catalog;
  for (int k = 1; k <= 3; ++k) catalog.set(builtin_direction_set(k));
  for (int k = 4; k <= kDefaultMaxCopies; ++k) {
    const auto path = cache_file(k);
    if (std::filesystem::exists(path)) catalog.set(load_direction_set_file(path));
  }
  return catalog;
}

void DirectionCatalog::set(DirectionSet set) {
  const int k = set.twice_s;
  sets_[k] = std::move(set);
}

const DirectionSet& DirectionCatalog::get(int twice_s) const {
  const auto it = sets_.find(twice_s);
  if (it == sets_.end()) {
    throw Error(Errc::missing_direction_set,
                "no direction set for 2s = " + std::to_string(twice_s) +
                    " (generate one with `minmeas design`)");
  }
  return it->second;
}

DirectionCatalog DirectionCatalog::rotated(const Eigen::Matrix3d& rotation) const {
  DirectionCatalog out;
  for (const auto& [k, set] : sets_) out.set(rotate(set, rotation));
  return out;
}

}  // namespace minmeas
