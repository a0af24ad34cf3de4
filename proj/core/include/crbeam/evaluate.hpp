#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "crbeam/extract.hpp"
#include "crbeam/formulations.hpp"
#include "crbeam/model.hpp"

namespace crbeam {

struct Histogram {
  std::vector<double> edges;   // n_bins + 1 boundaries spanning [min, max]
  std::vector<long> counts;    // per bin, summing to the sample count
};

struct ConstraintStats {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  // Closed-form worst case over the conservative matrix ball; sampled values
  // live in the smaller vector-generated set and cannot undercut it.
  double worst_case_bound = 0.0;
  double violation_fraction = 0.0;
  Histogram histogram;
};

struct RobustnessReport {
  std::vector<ConstraintStats> su_sinr;  // C^sinr per SU, violated when < 1
  std::vector<ConstraintStats> pu_ip;    // C^ip per PU, violated when > 1
  long n_samples = 0;
  std::uint64_t seed = 0;
  bool angular_mode = false;
};

/// C_k = |w_k' h|^2 / (sigma2 gamma) - sum_{i != k} |w_i' h|^2 / sigma2;
/// C_k >= 1 exactly when SINR_k >= gamma.
double normalized_sinr(const std::vector<ComplexVec>& weights, const ComplexVec& h, double sigma2,
                       double gamma, int k);

/// C_l = sum_k |w_k' g|^2 / kappa; satisfied when <= 1.
double normalized_ip(const std::vector<ComplexVec>& weights, const ComplexVec& g, double kappa);

struct MonteCarloOptions {
  PerturbationOptions perturbation;
  int n_bins = 50;
  // Optional angular experiment: perturb the synthesis angles uniformly in
  // +/- angle_range_deg instead of drawing from the vector balls. Requires a
  // scenario built from angles.
  bool angular_mode = false;
  double angle_range_deg = 5.0;
};

/// Perturbs every SU and PU channel independently within its vector ball
/// (radius from the unlifted matrix radius), evaluates both normalized
/// constraints per sample, and attaches the closed-form matrix-ball worst
/// cases. Deterministic given the seed.
RobustnessReport monte_carlo(const ScenarioConfig& s, const PrecoderSolution& sol, long n_samples,
                             std::uint64_t seed, const MonteCarloOptions& opts = {});

/// gain(theta) = |w' h(theta)|^2 with h the ULA steering vector.
std::vector<double> array_gain(const ComplexVec& w, const std::vector<double>& theta_grid_deg);

/// 0..180 degrees in 0.25 degree steps.
std::vector<double> default_theta_grid();

struct SweepRow {
  double gamma_db = 0.0;
  double ip_level_db = 0.0;  // 10 log10(kappa / sigma_n^2)
  FormulationKind method = FormulationKind::Lbcs;
  SolverStatus status = SolverStatus::MaxIters;
  double txp_db = 0.0;  // 10 log10(TxP / sigma_n^2); NaN when not solved
  bool has_power() const;
};

struct SweepTable {
  std::vector<SweepRow> rows;
};

/// One row per (gamma, level, formulation); solve failures are recorded as
/// rows, never aborting the sweep.
SweepTable power_sweep(const ScenarioConfig& s, const std::vector<double>& gamma_grid_db,
                       const std::vector<double>& ip_levels_db, const SolverSettings& settings = {});

void write_gain_csv(std::ostream& out, const std::vector<double>& theta_grid,
                    const std::vector<double>& gains, const FileMeta& meta);
void write_hist_csv(std::ostream& out, const Histogram& hist, const FileMeta& meta);
void write_sweep_csv(std::ostream& out, const SweepTable& table, const FileMeta& meta);
void write_report_summary(std::ostream& out, const std::string& title,
                          const RobustnessReport& report, const FileMeta& meta);

}  // namespace crbeam
