#include "crbeam/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "crbeam/hermitian.hpp"

namespace crbeam {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_meta(std::ostream& out, const FileMeta& meta) {
  out << "# version " << meta.version << "\n";
  out << "# scenario_hash " << meta.scenario_hash << "\n";
  out << "# seed " << meta.seed << "\n";
}

Histogram make_histogram(const std::vector<double>& values, int n_bins) {
  Histogram h;
  if (values.empty() || n_bins < 1) return h;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  const double width = hi > lo ? (hi - lo) : 1.0;
  h.edges.resize(static_cast<size_t>(n_bins) + 1);
  for (int i = 0; i <= n_bins; ++i)
    h.edges[static_cast<size_t>(i)] = lo + width * i / n_bins;
  h.edges.back() = hi > lo ? hi : h.edges.back();
  h.counts.assign(static_cast<size_t>(n_bins), 0);
  for (double v : values) {
    int bin = static_cast<int>((v - lo) / width * n_bins);
    bin = std::clamp(bin, 0, n_bins - 1);
    ++h.counts[static_cast<size_t>(bin)];
  }
  return h;
}

ConstraintStats make_stats(const std::vector<double>& values, double worst_case, bool violated_below,
                           int n_bins) {
  ConstraintStats st;
  st.worst_case_bound = worst_case;
  if (values.empty()) return st;
  st.min = *std::min_element(values.begin(), values.end());
  st.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  long violations = 0;
  for (double v : values) {
    sum += v;
    if (violated_below ? v < 1.0 : v > 1.0) ++violations;
  }
  st.mean = sum / static_cast<double>(values.size());
  st.violation_fraction = static_cast<double>(violations) / static_cast<double>(values.size());
  st.histogram = make_histogram(values, n_bins);
  return st;
}

}  // namespace

double normalized_sinr(const std::vector<ComplexVec>& weights, const ComplexVec& h, double sigma2,
                       double gamma, int k) {
  if (!(sigma2 > 0.0) || !(gamma > 0.0))
    throw std::invalid_argument("normalized_sinr: sigma2 and gamma must be positive");
  if (k < 0 || k >= static_cast<int>(weights.size()))
    throw std::invalid_argument("normalized_sinr: user index out of range");
  const double signal = std::norm(weights[static_cast<size_t>(k)].dot(h));
  double interference = 0.0;
  for (size_t i = 0; i < weights.size(); ++i)
    if (static_cast<int>(i) != k) interference += std::norm(weights[i].dot(h));
  return signal / (sigma2 * gamma) - interference / sigma2;
}

double normalized_ip(const std::vector<ComplexVec>& weights, const ComplexVec& g, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("normalized_ip: kappa must be positive");
  double ip = 0.0;
  for (const auto& w : weights) ip += std::norm(w.dot(g));
  return ip / kappa;
}

RobustnessReport monte_carlo(const ScenarioConfig& s, const PrecoderSolution& sol, long n_samples,
                             std::uint64_t seed, const MonteCarloOptions& opts) {
  s.validate();
  if (n_samples < 1) throw std::invalid_argument("monte_carlo: n_samples must be >= 1");
  const int n_users = s.num_su();
  const int n_pu = s.num_pu();
  if (static_cast<int>(sol.weights.size()) != n_users)
    throw std::invalid_argument("monte_carlo: solution weight count != K");
  for (int k = 0; k < n_users; ++k)
    if (sol.weights[static_cast<size_t>(k)].size() != s.n_antennas)
      throw std::invalid_argument("monte_carlo: weight length mismatch for user " +
                                  std::to_string(k));
  if (opts.angular_mode &&
      (s.su_angles_deg.empty() || (n_pu > 0 && s.pu_angles_deg.empty())))
    throw std::invalid_argument("monte_carlo: angular mode needs a scenario built from angles");

  std::vector<std::vector<double>> sinr_values(static_cast<size_t>(n_users));
  std::vector<std::vector<double>> ip_values(static_cast<size_t>(n_pu));
  for (auto& v : sinr_values) v.reserve(static_cast<size_t>(n_samples));
  for (auto& v : ip_values) v.reserve(static_cast<size_t>(n_samples));

  for (long i = 0; i < n_samples; ++i) {
    const std::uint64_t base = seed_mix(seed, static_cast<std::uint64_t>(i));
    for (int k = 0; k < n_users; ++k) {
      std::mt19937_64 rng(seed_mix(base, static_cast<std::uint64_t>(k)));
      ComplexVec h;
      if (opts.angular_mode) {
        const double lo = s.su_angles_deg[static_cast<size_t>(k)] - opts.angle_range_deg;
        const double span = 2.0 * opts.angle_range_deg;
        const double theta = lo + span * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        h = ula_steering(theta, s.n_antennas);
      } else {
        h = s.su_channels[static_cast<size_t>(k)] +
            sample_perturbation(s.su_uncertainty[static_cast<size_t>(k)].vector_radius,
                                s.n_antennas, rng, opts.perturbation);
      }
      sinr_values[static_cast<size_t>(k)].push_back(normalized_sinr(
          sol.weights, h, s.noise_power, s.sinr_thresholds[static_cast<size_t>(k)], k));
    }
    for (int l = 0; l < n_pu; ++l) {
      std::mt19937_64 rng(seed_mix(base, 0x10000ULL + static_cast<std::uint64_t>(l)));
      ComplexVec g;
      if (opts.angular_mode) {
        const double lo = s.pu_angles_deg[static_cast<size_t>(l)] - opts.angle_range_deg;
        const double span = 2.0 * opts.angle_range_deg;
        const double phi = lo + span * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        g = ula_steering(phi, s.n_antennas);
      } else {
        g = s.pu_channels[static_cast<size_t>(l)] +
            sample_perturbation(s.pu_uncertainty[static_cast<size_t>(l)].vector_radius,
                                s.n_antennas, rng, opts.perturbation);
      }
      ip_values[static_cast<size_t>(l)].push_back(
          normalized_ip(sol.weights, g, s.ip_thresholds[static_cast<size_t>(l)]));
    }
  }

  // Closed-form matrix-ball worst cases at W_k = w_k w_k'.
  std::vector<HermitianMat> cov(static_cast<size_t>(n_users));
  for (int k = 0; k < n_users; ++k) cov[static_cast<size_t>(k)] = outer_product(sol.weights[static_cast<size_t>(k)]);
  HermitianMat cov_sum = HermitianMat::Zero(s.n_antennas, s.n_antennas);
  for (const auto& w : cov) cov_sum += w;

  RobustnessReport rep;
  rep.n_samples = n_samples;
  rep.seed = seed;
  rep.angular_mode = opts.angular_mode;
  rep.su_sinr.resize(static_cast<size_t>(n_users));
  rep.pu_ip.resize(static_cast<size_t>(n_pu));

  for (int k = 0; k < n_users; ++k) {
    const double gamma = s.sinr_thresholds[static_cast<size_t>(k)];
    const double eps = s.su_uncertainty[static_cast<size_t>(k)].matrix_radius;
    const HermitianMat h_nom = outer_product(s.su_channels[static_cast<size_t>(k)]);
    HermitianMat m = cov[static_cast<size_t>(k)];
    for (int i = 0; i < n_users; ++i)
      if (i != k) m -= gamma * cov[static_cast<size_t>(i)];
    const double worst =
        ((h_nom * m).trace().real() - eps * m.norm()) / (s.noise_power * gamma);
    rep.su_sinr[static_cast<size_t>(k)] =
        make_stats(sinr_values[static_cast<size_t>(k)], worst, /*violated_below=*/true, opts.n_bins);
  }
  for (int l = 0; l < n_pu; ++l) {
    const double xi = s.pu_uncertainty[static_cast<size_t>(l)].matrix_radius;
    const HermitianMat g_nom = outer_product(s.pu_channels[static_cast<size_t>(l)]);
    const double worst = ((g_nom * cov_sum).trace().real() + xi * cov_sum.norm()) /
                         s.ip_thresholds[static_cast<size_t>(l)];
    rep.pu_ip[static_cast<size_t>(l)] =
        make_stats(ip_values[static_cast<size_t>(l)], worst, /*violated_below=*/false, opts.n_bins);
  }
  return rep;
}

std::vector<double> array_gain(const ComplexVec& w, const std::vector<double>& theta_grid_deg) {
  if (theta_grid_deg.empty()) throw std::invalid_argument("array_gain: grid must be nonempty");
  std::vector<double> gains;
  gains.reserve(theta_grid_deg.size());
  const int n = static_cast<int>(w.size());
  for (double theta : theta_grid_deg)
    gains.push_back(std::norm(w.dot(ula_steering(theta, n))));
  return gains;
}

std::vector<double> default_theta_grid() {
  std::vector<double> grid;
  grid.reserve(721);
  for (int i = 0; i <= 720; ++i) grid.push_back(0.25 * i);
  return grid;
}

bool SweepRow::has_power() const { return std::isfinite(txp_db); }

SweepTable power_sweep(const ScenarioConfig& s, const std::vector<double>& gamma_grid_db,
                       const std::vector<double>& ip_levels_db, const SolverSettings& settings) {
  s.validate();
  if (gamma_grid_db.empty() || ip_levels_db.empty())
    throw std::invalid_argument("power_sweep: grids must be nonempty");
  SweepTable table;
  for (double level : ip_levels_db) {
    ScenarioConfig run = s;
    const double kappa = s.noise_power * db_to_linear(level);
    for (auto& k : run.ip_thresholds) k = kappa;
    for (double gamma_db : gamma_grid_db) {
      for (auto& g : run.sinr_thresholds) g = db_to_linear(gamma_db);
      for (FormulationKind kind :
           {FormulationKind::Lbcs, FormulationKind::Sbcs, FormulationKind::Excs}) {
        SweepRow row;
        row.gamma_db = gamma_db;
        row.ip_level_db = level;
        row.method = kind;
        row.txp_db = std::numeric_limits<double>::quiet_NaN();
        const SolverResult res = solve(build_formulation(kind, run), settings);
        row.status = res.status;
        if (res.status == SolverStatus::Optimal || res.status == SolverStatus::Inaccurate)
          row.txp_db = linear_to_db(res.objective / run.noise_power);
        table.rows.push_back(row);
      }
    }
  }
  return table;
}

void write_gain_csv(std::ostream& out, const std::vector<double>& theta_grid,
                    const std::vector<double>& gains, const FileMeta& meta) {
  if (theta_grid.size() != gains.size())
    throw std::invalid_argument("write_gain_csv: grid and gain lengths differ");
  write_meta(out, meta);
  out << "theta_deg,gain\n";
  for (size_t i = 0; i < gains.size(); ++i)
    out << fmt(theta_grid[i]) << "," << fmt(gains[i]) << "\n";
}

void write_hist_csv(std::ostream& out, const Histogram& hist, const FileMeta& meta) {
  write_meta(out, meta);
  out << "bin_lo,bin_hi,count\n";
  for (size_t i = 0; i < hist.counts.size(); ++i)
    out << fmt(hist.edges[i]) << "," << fmt(hist.edges[i + 1]) << "," << hist.counts[i] << "\n";
}

void write_sweep_csv(std::ostream& out, const SweepTable& table, const FileMeta& meta) {
  write_meta(out, meta);
  out << "gamma_db,ip_level_db,method,status,txp_db\n";
  for (const auto& row : table.rows) {
    out << fmt(row.gamma_db) << "," << fmt(row.ip_level_db) << "," << to_string(row.method) << ","
        << to_string(row.status) << ",";
    if (row.has_power()) out << fmt(row.txp_db);
    out << "\n";
  }
}

void write_report_summary(std::ostream& out, const std::string& title,
                          const RobustnessReport& report, const FileMeta& meta) {
  out << "# " << title << "\n";
  out << "version " << meta.version << "\n";
  out << "scenario_hash " << meta.scenario_hash << "\n";
  out << "seed " << report.seed << "\n";
  out << "n_samples " << report.n_samples << "\n";
  out << "sampling " << (report.angular_mode ? "angular" : "ball") << "\n";
  for (size_t k = 0; k < report.su_sinr.size(); ++k) {
    const auto& st = report.su_sinr[k];
    out << "su " << k << " min " << fmt(st.min) << " mean " << fmt(st.mean) << " max "
        << fmt(st.max) << " worst_case_bound " << fmt(st.worst_case_bound)
        << " violation_fraction " << fmt(st.violation_fraction) << "\n";
  }
  for (size_t l = 0; l < report.pu_ip.size(); ++l) {
    const auto& st = report.pu_ip[l];
    out << "pu " << l << " min " << fmt(st.min) << " mean " << fmt(st.mean) << " max "
        << fmt(st.max) << " worst_case_bound " << fmt(st.worst_case_bound)
        << " violation_fraction " << fmt(st.violation_fraction) << "\n";
  }
  out << "end\n";
}

}  // namespace crbeam
