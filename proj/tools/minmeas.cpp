// minmeas: mean fidelities, minimal POVMs, direction sets and verification
// reports from the command line.
//
// Exit status: 0 success, 1 a requested check failed, 2 usage or
// configuration error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "minmeas/cloning.hpp"
#include "minmeas/design.hpp"
#include "minmeas/error.hpp"
#include "minmeas/fidelity.hpp"
#include "minmeas/json_io.hpp"
#include "minmeas/oracle.hpp"
#include "minmeas/povm.hpp"
#include "minmeas/prior.hpp"

namespace {

using namespace minmeas;

constexpr int kExitOk = 0;
constexpr int kExitCheck = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::identity_residual:
    case Errc::convergence_failure:
    case Errc::quadrature_nonconvergence:
    case Errc::optimizer_nonconvergence:
    case Errc::not_positive_semidefinite:
      return kExitCheck;
    default:
      return kExitUsage;
  }
}

int default_quad_order() {
  const char* env = std::getenv("MINMEAS_QUAD_ORDER");
  if (env == nullptr || *env == '\0') return kDefaultQuadratureOrder;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 2 || v > 4096) {
    throw UsageError(std::string("MINMEAS_QUAD_ORDER must be an integer in [2, 4096], got '") +
                     env + "'");
  }
  return static_cast<int>(v);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  out << text;
}

DirectionCatalog catalog_with(const std::vector<std::string>& design_files) {
  DirectionCatalog catalog = DirectionCatalog::standard();
  for (const std::string& f : design_files) catalog.set(load_direction_set_file(f));
  return catalog;
}

// ---------------------------------------------------------------- commands

struct Common {
  int copies = 0;
  std::string prior = "pure";
  std::vector<std::string> designs;
  int quad_order = 0;
};

int cmd_fidelity(const Common& c, const std::string& method, bool precise) {
  const RadialPrior prior = parse_prior_spec(c.prior);
  sectors(c.copies);  // range check before any work
  FidelityReport rep = fbar_max_closed(prior, c.copies, c.quad_order);
  if (method != "closed") {
    PovmOptions popts;
    popts.quadrature_order = c.quad_order;
    const Povm povm = build_povm(c.copies, prior, catalog_with(c.designs), popts);
    DirectOptions dopts;
    dopts.radial_order = c.quad_order;
    rep.value_direct = fbar_direct(povm, prior, dopts);
  }
  if (method == "direct") {
    std::cout << (precise ? io::fmt17(*rep.value_direct) : io::fmt6(*rep.value_direct)) << "\n";
    return kExitOk;
  }
  std::vector<FidelityReport> rows{rep};
  std::cout << fidelity_table_csv(rows, precise);
  if (rep.value_direct && std::abs(*rep.value_direct - rep.value_closed) > 1e-8) {
    std::cerr << "closed and direct values differ by "
              << std::abs(*rep.value_direct - rep.value_closed) << "\n";
    return kExitCheck;
  }
  return kExitOk;
}

int cmd_povm(const Common& c, const std::string& out, bool with_matrices) {
  const RadialPrior prior = parse_prior_spec(c.prior);
  PovmOptions popts;
  popts.quadrature_order = c.quad_order;
  const Povm povm = build_povm(c.copies, prior, catalog_with(c.designs), popts);
  write_output(out, povm_to_json(povm, with_matrices));
  if (!out.empty() && out != "-") {
    std::cerr << povm.elements.size() << " elements, identity residual "
              << povm.identity_residual << ", written to " << out << "\n";
  }
  return kExitOk;
}

int cmd_verify(const Common& c, std::uint64_t seed, int trials, const std::string& json_path) {
  const RadialPrior prior = parse_prior_spec(c.prior);
  sectors(c.copies);
  VerifyOptions vopts;
  vopts.copies = c.copies;
  vopts.seed = seed;
  vopts.quadrature_order = c.quad_order;
  vopts.perturb_trials = trials;
  const VerifyReport rep = verify_suite(prior, catalog_with(c.designs), vopts);
  std::cout << rep.to_text();
  if (!json_path.empty()) write_output(json_path, rep.to_json());
  return rep.pass() ? kExitOk : kExitCheck;
}

int cmd_design(int twice_s, int count, std::uint64_t seed, int restarts, const std::string& weights,
               const std::string& out) {
  SolverOptions opts;
  opts.restarts = restarts;
  opts.weights = weights == "free" ? WeightMode::free
                 : weights == "uniform" ? WeightMode::uniform
                                        : WeightMode::automatic;
  const SolveResult res = solve_direction_set(twice_s, count, seed, opts);
  write_output(out, direction_set_to_json(res.set, res));
  std::cerr << "2s=" << twice_s << " count=" << count << " seed=" << seed << " restart="
            << res.restart << " residual=" << res.residual
            << (res.report.pass ? " (verified)" : " (FAILED verification)") << "\n";
  return res.report.pass ? kExitOk : kExitCheck;
}

int cmd_table(int max_copies, const std::vector<std::string>& priors, const std::string& method,
              const std::string& out, const std::vector<std::string>& designs, int quad_order) {
  sectors(max_copies);
  std::vector<FidelityReport> rows;
  std::optional<DirectionCatalog> catalog;
  for (const std::string& spec : priors) {
    const RadialPrior prior = parse_prior_spec(spec);
    for (int n = 1; n <= max_copies; ++n) {
      FidelityReport rep = fbar_max_closed(prior, n, quad_order);
      if (method == "both") {
        if (!catalog) catalog = catalog_with(designs);
        PovmOptions popts;
        popts.quadrature_order = quad_order;
        DirectOptions dopts;
        dopts.radial_order = quad_order;
        rep.value_direct = fbar_direct(build_povm(n, prior, *catalog, popts), prior, dopts);
      }
      rows.push_back(std::move(rep));
    }
  }
  std::cout << fidelity_table_csv(rows, false);
  if (!out.empty()) write_output(out, fidelity_table_csv(rows, true));
  return kExitOk;
}

int cmd_clone(const std::string& prior_spec, double eta, double t, bool scan, int quad_order) {
  if (scan) {
    std::vector<double> etas;
    for (int i = 0; i <= 20; ++i) etas.push_back(i / 20.0);
    std::cout << "eta,t,min_eigenvalue,physical\n";
    for (const PhysicalityPoint& p : cloner_physicality_scan(etas)) {
      std::cout << io::fmt6(p.eta) << "," << io::fmt6(p.t) << "," << io::fmt6(p.min_eigenvalue)
                << "," << (p.physical ? "yes" : "no") << "\n";
    }
    return kExitOk;
  }
  const RadialPrior prior = parse_prior_spec(prior_spec);
  DirectOptions dopts;
  dopts.radial_order = quad_order;
  const double via_clone = fbar_via_clone(prior, {eta, t}, dopts);
  const double single = fbar_max_closed(prior, 1, quad_order).value_closed;
  std::cout << "prior,eta,t,fbar_via_clone,fbar_single_copy,abs_diff\n"
            << prior.id() << "," << io::fmt6(eta) << "," << io::fmt6(t) << "," << io::fmt6(via_clone)
            << "," << io::fmt6(single) << "," << io::fmt6(std::abs(via_clone - single)) << "\n";
  const bool optimal = eta == kOptimalCloner.eta && t == kOptimalCloner.t;
  return (!optimal || std::abs(via_clone - single) <= 1e-8) ? kExitOk : kExitCheck;
}

int cmd_scan(const Common& c, const std::string& kind, int twice_s, double step, int mass_steps,
             int radius_steps) {
  if (kind == "two-point") {
    const TwoPointScan s = scan_two_point_priors(c.copies, mass_steps, radius_steps);
    std::cout << "min fbar " << io::fmt17(s.best_value) << " at " << io::fmt6(s.mass0) << "@"
              << io::fmt6(s.radius0) << "," << io::fmt6(1.0 - s.mass0) << "@"
              << io::fmt6(s.radius1) << " (" << s.evaluated << " priors)\n";
    return kExitOk;
  }
  const RadialPrior prior = parse_prior_spec(c.prior);
  if (kind == "axis") {
    const AxisScan s = vonneumann_exhaustive_n1(prior, 7, 12, c.quad_order);
    std::cout << "axes " << s.axes.size() << " mean " << io::fmt17(s.mean) << " variance "
              << s.variance << " closed " << io::fmt17(s.closed) << "\n";
    return (s.variance < 1e-10 && std::abs(s.mean - s.closed) < 1e-8) ? kExitOk : kExitCheck;
  }
  std::vector<int> which;
  for (const SpinSector& s : sectors(c.copies)) {
    if (twice_s < 0 || s.twice_s == twice_s) which.push_back(s.twice_s);
  }
  if (which.empty()) throw UsageError("no sector 2s = " + std::to_string(twice_s));
  bool ok = true;
  std::cout << "twice_s,argmax,r_closed,gap,flat\n";
  for (int ts : which) {
    const ScanResult s = scan_guess_magnitude(prior, c.copies, ts, step, c.quad_order);
    ok = ok && s.gap <= step + 1e-12;
    std::cout << ts << "," << io::fmt6(s.best_parameter) << "," << io::fmt6(s.closed_prediction)
              << "," << io::fmt6(s.gap) << "," << (s.flat ? "yes" : "no") << "\n";
  }
  return ok ? kExitOk : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal optimal measurements for mixed-state qubit estimation"};
  app.require_subcommand(1);

  Common c;
  auto add_copies = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("-N,--copies", c.copies, "Number of copies")
                    ->check(CLI::Range(1, 1000000));
    if (required) opt->required();
  };
  auto add_prior = [&](CLI::App* sub) {
    sub->add_option("-p,--prior", c.prior,
                    "pure | random | uniform-ball | two-point[:m@b,m@b] | prior JSON file")
        ->capture_default_str();
  };
  auto add_design = [&](CLI::App* sub) {
    sub->add_option("--design", c.designs, "Direction-set file overriding the catalog entry");
  };

  std::string method = "closed";
  bool precise = false;
  auto* fid = app.add_subcommand("fidelity", "Maximal mean fidelity for N copies");
  add_copies(fid, true);
  add_prior(fid);
  add_design(fid);
  fid->add_option("--method", method, "closed | direct | both")
      ->check(CLI::IsMember({"closed", "direct", "both"}))
      ->capture_default_str();
  fid->add_flag("--precise", precise, "Print 17 significant digits");

  std::string out;
  bool with_matrices = false;
  auto* povm = app.add_subcommand("povm", "Write the minimal POVM as JSON");
  add_copies(povm, true);
  add_prior(povm);
  add_design(povm);
  povm->add_option("-o,--out", out, "Output file (default stdout)");
  povm->add_flag("--with-matrices", with_matrices, "Include dense operators");

  std::uint64_t seed = 1;
  int trials = 20;
  std::string json_path;
  auto* verify = app.add_subcommand("verify", "Run the invariant and oracle checks");
  add_copies(verify, true);
  add_prior(verify);
  add_design(verify);
  verify->add_option("--seed", seed, "Seed for randomized checks")->capture_default_str();
  verify->add_option("--trials", trials, "Perturbation trials")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  verify->add_option("--json", json_path, "Also write a JSON report here");

  int twice_s = -1;
  int count = 0;
  int restarts = 64;
  std::string weights = "auto";
  auto* design = app.add_subcommand("design", "Solve for a weighted direction set");
  design->add_option("--twice-s", twice_s, "2s")->required()->check(CLI::Range(1, 10));
  design->add_option("--count", count, "Number of directions")->required()->check(CLI::PositiveNumber);
  design->add_option("--seed", seed, "Solver seed")->capture_default_str();
  design->add_option("--restarts", restarts, "Restart budget")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  design->add_option("--weights", weights, "auto | free | uniform")
      ->check(CLI::IsMember({"auto", "free", "uniform"}))
      ->capture_default_str();
  design->add_option("-o,--out", out, "Output file (default stdout)");

  int max_copies = 0;
  std::vector<std::string> table_priors;
  std::string table_method = "closed";
  auto* table = app.add_subcommand("table", "Fidelity table for N = 1..max");
  table->add_option("--max-copies", max_copies, "Largest N")->required()->check(CLI::Range(1, 1000000));
  table->add_option("-p,--prior", table_priors, "Prior (repeatable)");
  table->add_option("--method", table_method, "closed | both")
      ->check(CLI::IsMember({"closed", "both"}))
      ->capture_default_str();
  table->add_option("-o,--out", out, "Also write a 17-digit CSV here");
  add_design(table);

  double eta = kOptimalCloner.eta;
  double t = kOptimalCloner.t;
  bool phys_scan = false;
  auto* clone_cmd = app.add_subcommand("clone", "Measure two clones instead of one copy");
  add_prior(clone_cmd);
  clone_cmd->add_option("--eta", eta, "Shrinking factor");
  clone_cmd->add_option("--t", t, "Correlation coefficient");
  clone_cmd->add_flag("--physicality-scan", phys_scan, "Scan eta with t = eta/2");

  std::string kind = "guess";
  double step = 1e-3;
  int mass_steps = 20;
  int radius_steps = 10;
  auto* scan = app.add_subcommand("scan", "Brute-force scans");
  scan->add_option("--kind", kind, "guess | axis | two-point")
      ->check(CLI::IsMember({"guess", "axis", "two-point"}))
      ->capture_default_str();
  add_copies(scan, false);
  add_prior(scan);
  scan->add_option("--twice-s", twice_s, "Sector for --kind guess (default: all)");
  scan->add_option("--step", step, "Grid step for --kind guess")->capture_default_str();
  scan->add_option("--mass-steps", mass_steps, "Mass grid for --kind two-point")->capture_default_str();
  scan->add_option("--radius-steps", radius_steps, "Radius grid for --kind two-point")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    c.quad_order = default_quad_order();
    if (*fid) return cmd_fidelity(c, method, precise);
    if (*povm) return cmd_povm(c, out, with_matrices);
    if (*verify) return cmd_verify(c, seed, trials, json_path);
    if (*design) return cmd_design(twice_s, count, seed, restarts, weights, out);
    if (*table) {
      if (table_priors.empty()) table_priors.push_back("pure");
      return cmd_table(max_copies, table_priors, table_method, out, c.designs, c.quad_order);
    }
    if (*clone_cmd) return cmd_clone(c.prior, eta, t, phys_scan, c.quad_order);
    if (*scan) {
      if (c.copies == 0) c.copies = 1;
      return cmd_scan(c, kind, twice_s, step, mass_steps, radius_steps);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
