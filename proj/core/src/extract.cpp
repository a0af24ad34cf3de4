#include "crbeam/extract.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "crbeam/hermitian.hpp"

namespace crbeam {

namespace {

constexpr double kMarginTol = 1e-6;
constexpr double kDefectThreshold = 1e-6;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double trace_product(const HermitianMat& a, const HermitianMat& b) {
  return (a * b).trace().real();
}

}  // namespace

PrincipalWeight principal_weight(const HermitianMat& w) {
  const int n = static_cast<int>(w.rows());
  const double trace = w.trace().real();
  if (!(trace > 0.0)) throw std::invalid_argument("principal_weight: trace must be positive");

  const EigenSym es = jacobi_eigensym(embed_hermitian(w));
  const double scale = std::max(1.0, w.norm());
  if (es.values(0) < -1e-8 * scale)
    throw std::invalid_argument("principal_weight: input is not PSD");

  // Ascending order; ties keep the embedding's original column order, so a
  // strict scan from the top picks the lowest-index eigenvector of the tie.
  int best = 2 * n - 1;
  for (int i = 2 * n - 2; i >= 0; --i)
    if (es.values(i) >= es.values(best)) best = i;
  const double lam = std::max(0.0, es.values(best));

  ComplexVec u(n);
  for (int i = 0; i < n; ++i) u(i) = Complex(es.vectors(i, best), es.vectors(n + i, best));
  // The embedding doubles each eigenvalue; either paired eigenvector maps to
  // the same complex direction up to a global phase.
  int argmax = 0;
  u.cwiseAbs().maxCoeff(&argmax);
  const Complex top = u(argmax);
  if (std::abs(top) > 0.0) u *= std::conj(top) / std::abs(top);

  PrincipalWeight out;
  out.w = std::sqrt(lam) * u;
  out.defect = std::min(1.0, std::max(0.0, 1.0 - lam / trace));
  return out;
}

CertificationReport certify_weights(const ScenarioConfig& s, const std::vector<ComplexVec>& weights,
                                    FormulationKind kind) {
  s.validate();
  const int n_users = s.num_su();
  const int n_pu = s.num_pu();
  if (static_cast<int>(weights.size()) != n_users)
    throw std::invalid_argument("certify_weights: weight count != K");
  for (const auto& w : weights)
    if (w.size() != s.n_antennas)
      throw std::invalid_argument("certify_weights: weight length != n_antennas");

  std::vector<HermitianMat> cov(weights.size());
  for (size_t k = 0; k < weights.size(); ++k) cov[k] = outer_product(weights[k]);

  CertificationReport rep;
  rep.sinr_margins.resize(static_cast<size_t>(n_users));
  rep.ip_margins.resize(static_cast<size_t>(n_pu));

  for (int k = 0; k < n_users; ++k) {
    const double gamma = s.sinr_thresholds[static_cast<size_t>(k)];
    const double eps = s.su_uncertainty[static_cast<size_t>(k)].matrix_radius;
    const HermitianMat h = outer_product(s.su_channels[static_cast<size_t>(k)]);
    HermitianMat m = cov[static_cast<size_t>(k)];
    for (int i = 0; i < n_users; ++i)
      if (i != k) m -= gamma * cov[static_cast<size_t>(i)];
    double robust_term = 0.0;
    switch (kind) {
      case FormulationKind::Lbcs: {
        double tr = cov[static_cast<size_t>(k)].trace().real();
        for (int i = 0; i < n_users; ++i)
          if (i != k) tr += gamma * cov[static_cast<size_t>(i)].trace().real();
        robust_term = eps * tr;
        break;
      }
      case FormulationKind::Sbcs: {
        double norms = cov[static_cast<size_t>(k)].norm();
        for (int i = 0; i < n_users; ++i)
          if (i != k) norms += gamma * cov[static_cast<size_t>(i)].norm();
        robust_term = eps * norms;
        break;
      }
      case FormulationKind::Excs:
        robust_term = eps * m.norm();
        break;
    }
    rep.sinr_margins[static_cast<size_t>(k)] =
        trace_product(h, m) - robust_term - s.noise_power * gamma;
  }

  for (int l = 0; l < n_pu; ++l) {
    const double xi = s.pu_uncertainty[static_cast<size_t>(l)].matrix_radius;
    const HermitianMat g = outer_product(s.pu_channels[static_cast<size_t>(l)]);
    double ip = 0.0;
    for (int k = 0; k < n_users; ++k) {
      ip += trace_product(g, cov[static_cast<size_t>(k)]);
      ip += xi * (kind == FormulationKind::Lbcs ? cov[static_cast<size_t>(k)].trace().real()
                                                : cov[static_cast<size_t>(k)].norm());
    }
    rep.ip_margins[static_cast<size_t>(l)] = s.ip_thresholds[static_cast<size_t>(l)] - ip;
  }

  rep.certified = true;
  for (double m : rep.sinr_margins)
    if (m < -kMarginTol) rep.certified = false;
  for (double m : rep.ip_margins)
    if (m < -kMarginTol) rep.certified = false;
  return rep;
}

RepairResult repair_by_scaling(const ScenarioConfig& s, const std::vector<ComplexVec>& weights,
                               FormulationKind kind) {
  double power = 0.0;
  for (const auto& w : weights) power += w.squaredNorm();
  if (!(power > 0.0)) throw std::invalid_argument("repair_by_scaling: weights must be nonzero");

  auto scaled = [&weights](double alpha) {
    std::vector<ComplexVec> out(weights.size());
    for (size_t k = 0; k < weights.size(); ++k) out[k] = alpha * weights[k];
    return out;
  };
  auto sinr_ok = [&](double alpha) {
    const CertificationReport rep = certify_weights(s, scaled(alpha), kind);
    for (double m : rep.sinr_margins)
      if (m < -kMarginTol) return false;
    return true;
  };

  RepairResult out;
  double alpha = 1.0;
  if (!sinr_ok(1.0)) {
    if (!sinr_ok(10.0)) {
      out.reason = "no amplitude factor <= 10 certifies the SINR constraints";
      out.cert = certify_weights(s, weights, kind);
      return out;
    }
    double lo = 1.0, hi = 10.0;
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      (sinr_ok(mid) ? hi : lo) = mid;
    }
    alpha = hi;
  }

  const auto w = scaled(alpha);
  const CertificationReport rep = certify_weights(s, w, kind);
  for (double m : rep.ip_margins) {
    if (m < -kMarginTol) {
      out.reason = "IP constraint violated at the smallest SINR-feasible amplitude";
      out.alpha = alpha;
      out.cert = rep;
      return out;
    }
  }
  out.success = true;
  out.alpha = alpha;
  out.weights = w;
  out.cert = rep;
  return out;
}

PrecoderSolution extract_solution(const ScenarioConfig& s, FormulationKind kind,
                                  const SolverResult& result) {
  const VariableLayout layout = VariableLayout::make(kind, s.n_antennas, s.num_su());
  PrecoderSolution sol;
  sol.formulation = kind;
  sol.solver_status = result.status;

  if (result.status != SolverStatus::Optimal && result.status != SolverStatus::Inaccurate) {
    sol.objective = std::numeric_limits<double>::quiet_NaN();
    return sol;
  }
  if (result.x.size() != layout.total_vars())
    throw std::invalid_argument("extract_solution: result does not match scenario layout");

  const int n_users = s.num_su();
  sol.covariances.resize(static_cast<size_t>(n_users));
  sol.weights.resize(static_cast<size_t>(n_users));
  sol.rank1_defects.resize(static_cast<size_t>(n_users));
  sol.objective = 0.0;
  for (int k = 0; k < n_users; ++k) {
    HermitianMat w = layout.unpack(result.x, k);
    // Symmetrize away solver roundoff before decomposition.
    w = 0.5 * (w + w.adjoint().eval());
    sol.objective += w.trace().real();
    const PrincipalWeight pw = principal_weight(w);
    sol.covariances[static_cast<size_t>(k)] = std::move(w);
    sol.weights[static_cast<size_t>(k)] = pw.w;
    sol.rank1_defects[static_cast<size_t>(k)] = pw.defect;
  }

  CertificationReport cert = certify_weights(s, sol.weights, kind);
  double max_defect = 0.0;
  for (double d : sol.rank1_defects) max_defect = std::max(max_defect, d);
  if (!cert.certified || max_defect > kDefectThreshold) {
    const RepairResult rep = repair_by_scaling(s, sol.weights, kind);
    if (rep.success) {
      sol.weights = rep.weights;
      sol.repair_alpha = rep.alpha;
      sol.repaired = true;
      cert = rep.cert;
    }
  }
  sol.sinr_margins = cert.sinr_margins;
  sol.ip_margins = cert.ip_margins;
  return sol;
}

void write_solution(std::ostream& out, const PrecoderSolution& sol, const FileMeta& meta) {
  out << "# crbeam solution file\n";
  out << "version " << meta.version << "\n";
  out << "scenario_hash " << meta.scenario_hash << "\n";
  out << "seed " << meta.seed << "\n";
  if (!meta.label.empty()) out << "label " << meta.label << "\n";
  out << "formulation " << to_string(sol.formulation) << "\n";
  out << "status " << to_string(sol.solver_status) << "\n";
  if (std::isfinite(sol.objective)) out << "objective " << fmt(sol.objective) << "\n";
  out << "repair_alpha " << fmt(sol.repair_alpha) << "\n";
  out << "repaired " << (sol.repaired ? 1 : 0) << "\n";
  const int n_users = static_cast<int>(sol.weights.size());
  const int n = n_users > 0 ? static_cast<int>(sol.weights[0].size()) : 0;
  out << "n_antennas " << n << "\n";
  out << "n_users " << n_users << "\n";
  for (int k = 0; k < n_users; ++k) {
    out << "weight " << k;
    for (int i = 0; i < n; ++i)
      out << " " << fmt(sol.weights[static_cast<size_t>(k)](i).real()) << " "
          << fmt(sol.weights[static_cast<size_t>(k)](i).imag());
    out << "\n";
  }
  for (size_t k = 0; k < sol.rank1_defects.size(); ++k)
    out << "defect " << k << " " << fmt(sol.rank1_defects[k]) << "\n";
  for (size_t k = 0; k < sol.sinr_margins.size(); ++k)
    out << "sinr_margin " << k << " " << fmt(sol.sinr_margins[k]) << "\n";
  for (size_t l = 0; l < sol.ip_margins.size(); ++l)
    out << "ip_margin " << l << " " << fmt(sol.ip_margins[l]) << "\n";
  out << "end\n";
}

void write_solution_file(const std::string& path, const PrecoderSolution& sol,
                         const FileMeta& meta) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_solution(out, sol, meta);
}

PrecoderSolution read_solution(std::istream& in, FileMeta* meta) {
  PrecoderSolution sol;
  FileMeta m;
  int n = 0, n_users = 0;
  std::string line;
  int lineno = 0;
  bool saw_end = false;
  auto fail = [&lineno](const std::string& msg) {
    throw std::runtime_error("solution parse error at line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    if (key == "version") std::getline(ls >> std::ws, m.version);
    else if (key == "scenario_hash") ls >> m.scenario_hash;
    else if (key == "seed") ls >> m.seed;
    else if (key == "label") ls >> m.label;
    else if (key == "formulation") {
      std::string v;
      ls >> v;
      sol.formulation = parse_formulation(v);
    } else if (key == "status") {
      std::string v;
      ls >> v;
      sol.solver_status = parse_solver_status(v);
    } else if (key == "objective") ls >> sol.objective;
    else if (key == "repair_alpha") ls >> sol.repair_alpha;
    else if (key == "repaired") {
      int v = 0;
      ls >> v;
      sol.repaired = v != 0;
    } else if (key == "n_antennas") ls >> n;
    else if (key == "n_users") {
      ls >> n_users;
      sol.weights.assign(static_cast<size_t>(n_users), ComplexVec());
      sol.rank1_defects.assign(static_cast<size_t>(n_users), 0.0);
      sol.sinr_margins.assign(static_cast<size_t>(n_users), 0.0);
    } else if (key == "weight") {
      int k = -1;
      if (!(ls >> k) || k < 0 || k >= n_users) fail("weight index out of range");
      ComplexVec w(n);
      for (int i = 0; i < n; ++i) {
        double re, im;
        if (!(ls >> re >> im)) fail("weight " + std::to_string(k) + " needs " +
                                    std::to_string(n) + " re/im pairs");
        w(i) = Complex(re, im);
      }
      sol.weights[static_cast<size_t>(k)] = std::move(w);
    } else if (key == "defect") {
      int k = -1;
      double v = 0;
      if (!(ls >> k >> v) || k < 0 || k >= n_users) fail("defect index out of range");
      sol.rank1_defects[static_cast<size_t>(k)] = v;
    } else if (key == "sinr_margin") {
      int k = -1;
      double v = 0;
      if (!(ls >> k >> v) || k < 0 || k >= n_users) fail("sinr_margin index out of range");
      sol.sinr_margins[static_cast<size_t>(k)] = v;
    } else if (key == "ip_margin") {
      int l = -1;
      double v = 0;
      if (!(ls >> l >> v) || l < 0) fail("ip_margin index out of range");
      if (static_cast<size_t>(l) >= sol.ip_margins.size())
        sol.ip_margins.resize(static_cast<size_t>(l) + 1, 0.0);
      sol.ip_margins[static_cast<size_t>(l)] = v;
    } else if (key == "end") {
      saw_end = true;
      break;
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!saw_end) throw std::runtime_error("solution parse error: missing end marker");
  for (size_t k = 0; k < sol.weights.size(); ++k)
    if (sol.weights[k].size() != n)
      throw std::runtime_error("solution parse error: missing weight for user " + std::to_string(k));
  if (meta) *meta = m;
  return sol;
}

PrecoderSolution read_solution_file(const std::string& path, FileMeta* meta) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_solution(in, meta);
}

}  // namespace crbeam
