#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "crbeam/evaluate.hpp"
#include "crbeam/extract.hpp"
#include "crbeam/formulations.hpp"
#include "crbeam/hermitian.hpp"
#include "crbeam/scenario_io.hpp"
#include "crbeam/version.hpp"

namespace fs = std::filesystem;
using namespace crbeam;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolver = 2;
constexpr int kExitViolations = 3;

struct RunManifest {
  std::string command;
  std::string scenario_path;
  std::vector<FormulationKind> methods;
  SolverSettings solver;
  std::uint64_t seed = 12345;
  std::string out_dir = ".";
  long samples = 10000;
  std::vector<std::string> solution_paths;
  std::vector<double> gamma_grid_db;
  std::vector<double> ip_levels_db;
  bool angular = false;
  double angle_range_deg = 5.0;
};

std::vector<FormulationKind> parse_methods(const std::string& method) {
  if (method == "all")
    return {FormulationKind::Lbcs, FormulationKind::Sbcs, FormulationKind::Excs};
  return {parse_formulation(method)};
}

bool scenario_is_robust(const ScenarioConfig& s) {
  for (const auto& u : s.su_uncertainty)
    if (u.matrix_radius > 0.0) return true;
  for (const auto& u : s.pu_uncertainty)
    if (u.matrix_radius > 0.0) return true;
  return false;
}

FileMeta make_meta(const ScenarioConfig& s, std::uint64_t seed) {
  FileMeta meta;
  meta.version = kVersionString;
  meta.scenario_hash = scenario_hash_hex(s);
  meta.seed = seed;
  return meta;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int cmd_design(const RunManifest& m) {
  const ScenarioConfig s = load_scenario(m.scenario_path);
  fs::create_directories(m.out_dir);
  FileMeta meta = make_meta(s, m.seed);
  meta.label = scenario_is_robust(s) ? "robust" : "non-robust";

  auto summary = open_out(fs::path(m.out_dir) / "design_summary.txt");
  summary << "# design summary\n";
  summary << "version " << meta.version << "\n";
  summary << "scenario_hash " << meta.scenario_hash << "\n";
  summary << "seed " << meta.seed << "\n";
  summary << "label " << meta.label << "\n";

  int solved = 0;
  for (FormulationKind kind : m.methods) {
    const ConicProgram program = build_formulation(kind, s);
    const SolverResult result = solve(program, m.solver);
    const PrecoderSolution sol = extract_solution(s, kind, result);
    const fs::path out_path = fs::path(m.out_dir) / ("solution_" + std::string(to_string(kind)) + ".txt");
    write_solution_file(out_path.string(), sol, meta);

    summary << "method " << to_string(kind) << " status " << to_string(result.status);
    if (result.status == SolverStatus::Optimal || result.status == SolverStatus::Inaccurate) {
      ++solved;
      const ResidualTriple res = kkt_report(program, result);
      summary << " objective " << fmt(sol.objective) << " txp_db "
              << fmt(linear_to_db(sol.objective / s.noise_power)) << " kkt_max " << fmt(res.max());
      summary << " defects";
      for (double d : sol.rank1_defects) summary << " " << fmt(d);
      if (sol.repaired) summary << " repair_alpha " << fmt(sol.repair_alpha);
    }
    summary << "\n";
    std::cout << to_string(kind) << ": " << to_string(result.status);
    if (result.status == SolverStatus::Optimal)
      std::cout << "  TxP = " << sol.objective << " (" << linear_to_db(sol.objective / s.noise_power)
                << " dB over noise)";
    std::cout << "\n";
  }
  summary << "end\n";
  return solved > 0 ? kExitOk : kExitSolver;
}

int cmd_verify(const RunManifest& m) {
  const ScenarioConfig s = load_scenario(m.scenario_path);
  fs::create_directories(m.out_dir);
  const FileMeta meta = make_meta(s, m.seed);

  MonteCarloOptions opts;
  opts.angular_mode = m.angular;
  opts.angle_range_deg = m.angle_range_deg;

  bool violations = false;
  for (const std::string& path : m.solution_paths) {
    const PrecoderSolution sol = read_solution_file(path);
    if (static_cast<int>(sol.weights.size()) != s.num_su())
      throw std::runtime_error("solution " + path + " has " + std::to_string(sol.weights.size()) +
                               " users, scenario has " + std::to_string(s.num_su()));
    for (size_t k = 0; k < sol.weights.size(); ++k)
      if (sol.weights[k].size() != s.n_antennas)
        throw std::runtime_error("solution " + path + " weight for user " + std::to_string(k) +
                                 " has length " + std::to_string(sol.weights[k].size()) +
                                 ", scenario needs " + std::to_string(s.n_antennas));

    const RobustnessReport rep = monte_carlo(s, sol, m.samples, m.seed, opts);
    const std::string method = to_string(sol.formulation);
    const fs::path dir = m.solution_paths.size() > 1 ? fs::path(m.out_dir) / method
                                                     : fs::path(m.out_dir);
    fs::create_directories(dir);
    for (size_t k = 0; k < rep.su_sinr.size(); ++k) {
      auto out = open_out(dir / ("hist_sinr_" + std::to_string(k) + ".csv"));
      write_hist_csv(out, rep.su_sinr[k].histogram, meta);
    }
    for (size_t l = 0; l < rep.pu_ip.size(); ++l) {
      auto out = open_out(dir / ("hist_ip_" + std::to_string(l) + ".csv"));
      write_hist_csv(out, rep.pu_ip[l].histogram, meta);
    }
    auto summary = open_out(dir / "verify_summary.txt");
    write_report_summary(summary, "verify " + method, rep, meta);

    double worst_sinr = 1e300, worst_ip = -1e300;
    for (const auto& st : rep.su_sinr) {
      violations = violations || st.violation_fraction > 0.0;
      worst_sinr = std::min(worst_sinr, st.min);
    }
    for (const auto& st : rep.pu_ip) {
      violations = violations || st.violation_fraction > 0.0;
      worst_ip = std::max(worst_ip, st.max);
    }
    std::cout << method << ": sampled min C_sinr = " << worst_sinr
              << ", sampled max C_ip = " << worst_ip << " over " << rep.n_samples << " samples\n";
  }
  return violations ? kExitViolations : kExitOk;
}

int cmd_sweep(const RunManifest& m) {
  const ScenarioConfig s = load_scenario(m.scenario_path);
  fs::create_directories(m.out_dir);
  const FileMeta meta = make_meta(s, m.seed);
  const SweepTable table = power_sweep(s, m.gamma_grid_db, m.ip_levels_db, m.solver);
  auto out = open_out(fs::path(m.out_dir) / "sweep.csv");
  write_sweep_csv(out, table, meta);
  for (const auto& row : table.rows) {
    std::cout << "gamma " << row.gamma_db << " dB, level " << row.ip_level_db << " dB, "
              << to_string(row.method) << ": " << to_string(row.status);
    if (row.has_power()) std::cout << ", TxP " << row.txp_db << " dB";
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_gain(const RunManifest& m) {
  const ScenarioConfig s = load_scenario(m.scenario_path);
  fs::create_directories(m.out_dir);
  const FileMeta meta = make_meta(s, m.seed);
  const std::vector<double> grid = default_theta_grid();
  for (const std::string& path : m.solution_paths) {
    const PrecoderSolution sol = read_solution_file(path);
    const std::string method = to_string(sol.formulation);
    const fs::path dir = m.solution_paths.size() > 1 ? fs::path(m.out_dir) / method
                                                     : fs::path(m.out_dir);
    fs::create_directories(dir);
    for (size_t k = 0; k < sol.weights.size(); ++k) {
      auto out = open_out(dir / ("gain_" + std::to_string(k) + ".csv"));
      write_gain_csv(out, grid, array_gain(sol.weights[k], grid), meta);
    }
  }
  return kExitOk;
}

struct SelfCheck {
  std::string name;
  bool pass;
};

int cmd_selftest(const RunManifest& m) {
  std::vector<SelfCheck> checks;
  auto add = [&checks](const std::string& name, bool pass) {
    checks.push_back({name, pass});
  };

  {  // analytic SDP: min t, [[t,1],[1,t]] PSD
    ConicProgram p;
    p.num_vars = 1;
    p.cones = {{ConeKind::Psd, 2}};
    p.c = Eigen::VectorXd::Constant(1, 1.0);
    p.b = Eigen::VectorXd::Zero(3);
    p.b(1) = std::sqrt(2.0);
    p.add_entry(0, 0, -1.0);
    p.add_entry(2, 0, -1.0);
    const SolverResult r = solve(p, m.solver);
    add("sdp 2x2 t*=1", r.status == SolverStatus::Optimal && std::abs(r.objective - 1.0) <= 1e-6);
  }
  {  // analytic SOC: min x, ||(3,4)|| <= x
    ConicProgram p;
    p.num_vars = 3;
    p.cones = {{ConeKind::Zero, 2}, {ConeKind::Soc, 3}};
    p.c = Eigen::Vector3d(1.0, 0.0, 0.0);
    p.b = Eigen::VectorXd::Zero(5);
    p.b(0) = 3.0;
    p.b(1) = 4.0;
    p.add_entry(0, 1, 1.0);
    p.add_entry(1, 2, 1.0);
    p.add_entry(2, 0, -1.0);
    p.add_entry(3, 1, -1.0);
    p.add_entry(4, 2, -1.0);
    const SolverResult r = solve(p, m.solver);
    add("soc x*=5", r.status == SolverStatus::Optimal && std::abs(r.objective - 5.0) <= 1e-6);
  }
  {  // analytic LP: min -x, 0 <= x <= 2
    ConicProgram p;
    p.num_vars = 1;
    p.cones = {{ConeKind::NonNeg, 2}};
    p.c = Eigen::VectorXd::Constant(1, -1.0);
    p.b = Eigen::VectorXd::Zero(2);
    p.b(0) = 2.0;
    p.add_entry(0, 0, 1.0);
    p.add_entry(1, 0, -1.0);
    const SolverResult r = solve(p, m.solver);
    add("lp x*=2", r.status == SolverStatus::Optimal && std::abs(r.objective + 2.0) <= 1e-6);
  }
  {  // single-user SDP optimum s2*g/||h||^2
    ScenarioConfig s;
    s.n_antennas = 8;
    s.noise_power = 0.01;
    s.su_channels = {ula_steering(20.0, 8)};
    s.su_uncertainty = {UncertaintyBall::from_matrix_radius(0.0, s.su_channels[0])};
    s.sinr_thresholds = {10.0};
    const SolverResult r = solve(build_lbcs(s), m.solver);
    add("single-user sdp", r.status == SolverStatus::Optimal &&
                               std::abs(r.objective - 0.01 * 10.0 / 8.0) <= 1e-6);
  }
  {  // Prop 1/2 closed forms against ball sampling
    std::mt19937_64 rng(m.seed);
    auto hermitian = [&rng](int n) {
      HermitianMat g(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          g(i, j) = Complex(static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5,
                            static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5);
      return HermitianMat(0.5 * (g + g.adjoint().eval()));
    };
    bool ok = true;
    const double eps = 0.2;
    for (int trial = 0; trial < 5 && ok; ++trial) {
      const HermitianMat w = hermitian(4);
      const HermitianMat wk = w * w.adjoint();
      const HermitianMat o = hermitian(4);
      const HermitianMat other = o * o.adjoint();
      HermitianMat mk = wk - 1.5 * other;
      const double lo1 = ((outer_product(ComplexVec::Ones(4)) + prop1_min_delta(wk, eps)) * wk)
                             .trace().real();
      const double hi1 = ((outer_product(ComplexVec::Ones(4)) + prop1_max_delta(wk, eps)) * wk)
                             .trace().real();
      const double lo2 = (prop2_min_delta(wk, {other}, 1.5, eps) * mk).trace().real();
      for (int draw = 0; draw < 2000 && ok; ++draw) {
        HermitianMat d = hermitian(4);
        d *= eps * (1.0 - 4e-16) / d.norm();
        const double base =
            ((outer_product(ComplexVec::Ones(4)) + d) * wk).trace().real();
        ok = ok && base >= lo1 - 1e-9 && base <= hi1 + 1e-9;
        ok = ok && (d * mk).trace().real() >= lo2 - 1e-9;
      }
    }
    add("prop oracles bound 2000 samples", ok);
  }
  {  // lift/unlift round trip
    const ComplexVec h = ula_steering(42.0, 6);
    bool ok = true;
    for (double d = 0.0; d <= 10.0; d += 0.25)
      ok = ok && std::abs(unlift_radius(lift_radius(d, h), h) - d) <= 1e-10;
    add("lift/unlift round trip", ok);
  }

  bool all = true;
  std::printf("%-34s result\n", "check");
  for (const auto& c : checks) {
    std::printf("%-34s %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL");
    all = all && c.pass;
  }
  return all ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("crbeam ") + kVersion +
               " - robust downlink beamforming designer and verifier"};
  app.require_subcommand(1);

  RunManifest m;
  std::string method = "all";

  auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
    if (needs_scenario)
      cmd->add_option("--scenario", m.scenario_path, "scenario file")->required();
    cmd->add_option("--out", m.out_dir, "output directory");
    cmd->add_option("--seed", m.seed, "rng seed recorded in outputs");
    cmd->add_option("--tol", m.solver.tolerance, "solver tolerance");
    cmd->add_option("--max-iters", m.solver.max_iterations, "solver iteration cap");
  };

  CLI::App* design = app.add_subcommand("design", "solve the robust designs and extract weights");
  add_common(design, true);
  design->add_option("--method", method, "lbcs|sbcs|excs|all");

  CLI::App* verify = app.add_subcommand("verify", "Monte-Carlo robustness verification");
  add_common(verify, true);
  verify->add_option("--solution", m.solution_paths, "solution file (repeatable)")->required();
  verify->add_option("--samples", m.samples, "number of perturbation samples");
  verify->add_flag("--angular", m.angular, "perturb synthesis angles instead of vector balls");
  verify->add_option("--angle-range", m.angle_range_deg, "angular mode range in degrees");

  CLI::App* sweep = app.add_subcommand("sweep", "power versus SINR threshold sweep");
  add_common(sweep, true);
  sweep->add_option("--gamma-db", m.gamma_grid_db, "SINR thresholds in dB")
      ->expected(-1);
  sweep->add_option("--ip-level-db", m.ip_levels_db, "relative IP levels in dB")
      ->expected(-1);

  CLI::App* gain = app.add_subcommand("gain", "array gain over the 0..180 degree grid");
  add_common(gain, true);
  gain->add_option("--solution", m.solution_paths, "solution file (repeatable)")->required();

  CLI::App* selftest = app.add_subcommand("selftest", "run built-in numerical checks");
  add_common(selftest, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    m.methods = parse_methods(method);
    if (m.gamma_grid_db.empty())
      for (int g = 6; g <= 14; ++g) m.gamma_grid_db.push_back(g);
    if (m.ip_levels_db.empty()) m.ip_levels_db = {0.0, -4.0};
    if (m.samples < 1) throw std::invalid_argument("--samples must be >= 1");

    if (design->parsed()) return cmd_design(m);
    if (verify->parsed()) return cmd_verify(m);
    if (sweep->parsed()) return cmd_sweep(m);
    if (gain->parsed()) return cmd_gain(m);
    if (selftest->parsed()) return cmd_selftest(m);
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
