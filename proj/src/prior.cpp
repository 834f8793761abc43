#include "minmeas/prior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "minmeas/error.hpp"
#include "minmeas/quadrature.hpp"

namespace minmeas {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

/// (1 - b^2) / 4 without cancellation near b = 1.
double quarter_defect(double b) { return 0.25 * (1.0 - b) * (1.0 + b); }

double half_power(double x, int twice_exponent) {
  if (twice_exponent == 0) return 1.0;
  if (twice_exponent % 2 == 0) return std::pow(x, twice_exponent / 2);
  return std::pow(x, twice_exponent / 2) * std::sqrt(x);
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

// ------------------------------------------------------------- RadialDensity

RadialDensity RadialDensity::uniform_ball(double weight) {
  if (!(weight >= 0.0)) throw Error(Errc::unnormalized_prior, "negative density weight");
  RadialDensity d;
  d.kind_ = Kind::uniform_ball;
  d.weight_ = weight;
  return d;
}

RadialDensity RadialDensity::table(std::vector<double> b, std::vector<double> f, double weight) {
  if (b.size() != f.size() || b.size() < 2) {
    throw Error(Errc::schema_violation, "density table needs matching b and f arrays of length >= 2");
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!(b[i] >= 0.0 && b[i] <= 1.0)) {
      throw Error(Errc::radius_out_of_range, "table radius " + format_number(b[i]) + " outside [0,1]");
    }
    if (i > 0 && !(b[i] > b[i - 1])) {
      throw Error(Errc::schema_violation, "table radii must be strictly increasing");
    }
    if (!(f[i] >= 0.0) || !std::isfinite(f[i])) {
      throw Error(Errc::schema_violation, "table density values must be finite and >= 0");
    }
  }
  if (!(weight >= 0.0)) throw Error(Errc::unnormalized_prior, "negative density weight");

  // 4 pi int b^2 f db of the interpolant; the integrand is cubic per segment.
  double raw = 0.0;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const quad::Rule r = quad::gauss_legendre(2, b[i], b[i + 1]);
    for (std::size_t k = 0; k < r.size(); ++k) {
      const double t = (r.nodes[k] - b[i]) / (b[i + 1] - b[i]);
      const double fv = f[i] + t * (f[i + 1] - f[i]);
      raw += r.weights[k] * r.nodes[k] * r.nodes[k] * fv;
    }
  }
  raw *= kFourPi;
  if (!(raw > 0.0)) {
    if (weight == 0.0) raw = 1.0;
    else throw Error(Errc::unnormalized_prior, "density table carries no probability mass");
  }

  RadialDensity d;
  d.kind_ = Kind::table;
  d.weight_ = weight;
  d.renorm_ = weight / raw;
  d.b_ = std::move(b);
  d.f_ = std::move(f);
  for (double& v : d.f_) v *= d.renorm_;
  return d;
}

double RadialDensity::operator()(double b) const {
  if (kind_ == Kind::uniform_ball) return weight_ * 3.0 / kFourPi;
  if (b < b_.front() || b > b_.back()) return 0.0;
  const auto it = std::upper_bound(b_.begin(), b_.end(), b);
  if (it == b_.end()) return f_.back();
  const std::size_t hi = static_cast<std::size_t>(it - b_.begin());
  const std::size_t lo = hi - 1;
  const double t = (b - b_[lo]) / (b_[hi] - b_[lo]);
  return f_[lo] + t * (f_[hi] - f_[lo]);
}

std::vector<double> RadialDensity::breakpoints() const {
  if (kind_ == Kind::uniform_ball) return {0.0, 1.0};
  return b_;
}

// ---------------------------------------------------------------- RadialRule

double RadialRule::total() const {
  double s = 0.0;
  for (double w : weight) s += w;
  return s;
}

// --------------------------------------------------------------- RadialPrior

RadialPrior::RadialPrior(std::vector<PointMass> points, std::optional<RadialDensity> density,
                         std::string id)
    : points_(std::move(points)), density_(std::move(density)), id_(std::move(id)) {
  for (const PointMass& p : points_) {
    if (!(p.radius >= 0.0 && p.radius <= 1.0)) {
      throw Error(Errc::radius_out_of_range, "point radius " + format_number(p.radius) + " outside [0,1]");
    }
    if (!(p.mass >= 0.0) || !std::isfinite(p.mass)) {
      throw Error(Errc::unnormalized_prior, "point mass " + format_number(p.mass) + " is negative");
    }
  }
  const double total = total_mass();
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw Error(Errc::unnormalized_prior, "total probability " + format_number(total) + " != 1");
  }
}

RadialPrior RadialPrior::pure() { return RadialPrior({{1.0, 1.0}}, std::nullopt, "pure"); }

RadialPrior RadialPrior::random() { return RadialPrior({{0.0, 1.0}}, std::nullopt, "random"); }

RadialPrior RadialPrior::uniform_ball() {
  return RadialPrior({}, RadialDensity::uniform_ball(1.0), "uniform-ball");
}

RadialPrior RadialPrior::two_point(double mass0, double radius0, double mass1, double radius1) {
  std::ostringstream id;
  id << "two-point:" << mass0 << "@" << radius0 << "," << mass1 << "@" << radius1;
  return RadialPrior({{radius0, mass0}, {radius1, mass1}}, std::nullopt, id.str());
}

double RadialPrior::total_mass() const {
  double total = 0.0;
  for (const PointMass& p : points_) total += p.mass;
  if (density_) total += density_->weight();
  return total;
}

RadialRule RadialPrior::rule(int order) const {
  if (order < 1) throw Error(Errc::invalid_argument, "quadrature order must be >= 1");
  RadialRule rule;
  for (const PointMass& p : points_) {
    if (p.mass == 0.0) continue;
    rule.radius.push_back(p.radius);
    rule.weight.push_back(p.mass);
  }
  if (density_ && density_->weight() > 0.0) {
    const std::vector<double> edges = density_->breakpoints();
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
      const double lo = std::asin(edges[s]);
      const double hi = std::asin(edges[s + 1]);
      const quad::Rule r = quad::gauss_legendre(order, lo, hi);
      for (std::size_t k = 0; k < r.size(); ++k) {
        const double b = std::sin(r.nodes[k]);
        const double w = kFourPi * b * b * (*density_)(b) * std::cos(r.nodes[k]) * r.weights[k];
        rule.radius.push_back(b);
        rule.weight.push_back(w);
      }
    }
  }
  return rule;
}

// ------------------------------------------------------------------ integrals

double moment_I(const RadialRule& rule, int twice_alpha) {
  if (twice_alpha < 0) throw Error(Errc::invalid_argument, "moment exponent must be >= 0");
  double acc = 0.0;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    acc += rule.weight[j] * half_power(quarter_defect(rule.radius[j]), twice_alpha);
  }
  return acc;
}

double moment_I(const RadialPrior& prior, int twice_alpha, int order) {
  const RadialRule rule = prior.rule(order);
  if (std::abs(rule.total() - 1.0) > kNormalizationTolerance) {
    throw Error(Errc::unnormalized_prior, "radial quadrature mass " + format_number(rule.total()));
  }
  return moment_I(rule, twice_alpha);
}

GIntegrals g_integrals(const RadialRule& rule, int copies, int twice_s) {
  if (copies < 1 || twice_s < 0 || twice_s > copies) {
    throw Error(Errc::invalid_argument, "sector requires 0 <= 2s <= N");
  }
  if ((copies - twice_s) % 2 != 0) {
    throw Error(Errc::parity_mismatch, "2s and N must have equal parity");
  }
  // The u-integrand is a polynomial of degree 2s + 1: exact with 2s/2 + 2 nodes.
  const quad::Rule u = quad::gauss_legendre(twice_s / 2 + 2);
  GIntegrals g;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double b = rule.radius[j];
    double a_avg = 0.0;
    double b_avg = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double bu = b * u.nodes[k];
      const double p = std::pow(0.5 * (1.0 + bu), twice_s);
      a_avg += 0.5 * u.weights[k] * p;
      b_avg += 0.5 * u.weights[k] * p * 0.5 * bu;
    }
    const double x = quarter_defect(b);
    g.g1 += rule.weight[j] * half_power(x, copies + 1 - twice_s) * a_avg;
    g.g2 += rule.weight[j] * half_power(x, copies - twice_s) * b_avg;
  }
  return g;
}

GIntegrals g_integrals(const RadialPrior& prior, int copies, int twice_s, int order) {
  return g_integrals(prior.rule(order), copies, twice_s);
}

// -------------------------------------------------------------------- loading

RadialPrior load_prior(std::string_view json_text, std::string id) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::schema_violation, std::string("prior is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::schema_violation, "prior document must be an object");
  if (!doc.contains("points") && !doc.contains("density")) {
    throw Error(Errc::schema_violation, "prior needs \"points\" and/or \"density\"");
  }
  if (doc.contains("id")) {
    if (!doc["id"].is_string()) throw Error(Errc::schema_violation, "\"id\" must be a string");
    id = doc["id"].get<std::string>();
  }

  std::vector<PointMass> points;
  double point_total = 0.0;
  if (doc.contains("points")) {
    const auto& arr = doc["points"];
    if (!arr.is_array()) throw Error(Errc::schema_violation, "\"points\" must be an array");
    for (const auto& p : arr) {
      if (!p.is_object() || !p.contains("b") || !p.contains("mass") || !p["b"].is_number() ||
          !p["mass"].is_number()) {
        throw Error(Errc::schema_violation, "each point needs numeric \"b\" and \"mass\"");
      }
      points.push_back({p["b"].get<double>(), p["mass"].get<double>()});
      point_total += points.back().mass;
    }
  }

  std::optional<RadialDensity> density;
  if (doc.contains("density")) {
    const auto& d = doc["density"];
    if (!d.is_object() || !d.contains("kind") || !d["kind"].is_string()) {
      throw Error(Errc::schema_violation, "\"density\" needs a string \"kind\"");
    }
    double weight = 1.0 - point_total;
    if (d.contains("weight")) {
      if (!d["weight"].is_number()) throw Error(Errc::schema_violation, "\"weight\" must be a number");
      weight = d["weight"].get<double>();
    }
    if (!(weight > 0.0)) {
      throw Error(Errc::unnormalized_prior, "points already carry all the probability mass");
    }
    const std::string kind = d["kind"].get<std::string>();
    if (kind == "uniform-ball") {
      density = RadialDensity::uniform_ball(weight);
    } else if (kind == "table") {
      if (!d.contains("b") || !d.contains("f") || !d["b"].is_array() || !d["f"].is_array()) {
        throw Error(Errc::schema_violation, "table density needs arrays \"b\" and \"f\"");
      }
      std::vector<double> b;
      std::vector<double> f;
      for (const auto& v : d["b"]) {
        if (!v.is_number()) throw Error(Errc::schema_violation, "table \"b\" must be numeric");
        b.push_back(v.get<double>());
      }
      for (const auto& v : d["f"]) {
        if (!v.is_number()) throw Error(Errc::schema_violation, "table \"f\" must be numeric");
        f.push_back(v.get<double>());
      }
      density = RadialDensity::table(std::move(b), std::move(f), weight);
    } else {
      throw Error(Errc::schema_violation, "unknown density kind \"" + kind + "\"");
    }
  }
  return RadialPrior(std::move(points), std::move(density), std::move(id));
}

RadialPrior load_prior_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read prior file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_prior(buf.str(), path.stem().string());
}

RadialPrior parse_prior_spec(std::string_view spec) {
  if (spec == "pure") return RadialPrior::pure();
  if (spec == "random") return RadialPrior::random();
  if (spec == "uniform-ball") return RadialPrior::uniform_ball();
  if (spec == "two-point") return RadialPrior::two_point(0.1, 0.0, 0.9, 1.0);
  constexpr std::string_view prefix = "two-point:";
  if (spec.starts_with(prefix)) {
    // m1@b1,m2@b2[,...]
    std::vector<PointMass> points;
    std::string body(spec.substr(prefix.size()));
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto at = item.find('@');
      if (at == std::string::npos) {
        throw Error(Errc::schema_violation, "expected mass@radius, got \"" + item + "\"");
      }
      try {
        std::size_t used_m = 0;
        std::size_t used_b = 0;
        const std::string ms = item.substr(0, at);
        const std::string bs = item.substr(at + 1);
        const double m = std::stod(ms, &used_m);
        const double b = std::stod(bs, &used_b);
        if (used_m != ms.size() || used_b != bs.size()) throw std::invalid_argument(item);
        points.push_back({b, m});
      } catch (const std::logic_error&) {
        throw Error(Errc::schema_violation, "cannot parse \"" + item + "\" as mass@radius");
      }
    }
    if (points.empty()) throw Error(Errc::schema_violation, "two-point prior needs entries");
    return RadialPrior(std::move(points), std::nullopt, std::string(spec));
  }
  return load_prior_file(std::filesystem::path(spec));
}

}  // namespace minmeas
