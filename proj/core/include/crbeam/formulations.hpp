#pragma once

#include <string>
#include <vector>

#include "crbeam/conic.hpp"
#include "crbeam/model.hpp"

namespace crbeam {

enum class FormulationKind { Lbcs, Sbcs, Excs };

const char* to_string(FormulationKind k);
FormulationKind parse_formulation(const std::string& name);

/// Maps every Hermitian W_k (N diagonal reals, then the real and imaginary
/// parts of the strict lower triangle) and the per-user epigraph scalars of
/// the norm-bounded formulations into one flat real decision vector.
struct VariableLayout {
  int n_antennas = 0;
  int n_users = 0;
  bool with_epigraph = false;

  static VariableLayout make(FormulationKind kind, int n_antennas, int n_users);

  int params_per_user() const { return n_antennas * n_antennas; }
  int w_offset(int k) const { return k * params_per_user(); }
  int diag_index(int k, int i) const;
  int re_index(int k, int i, int j) const;  // strict lower triangle, i > j
  int im_index(int k, int i, int j) const;  // strict lower triangle, i > j
  int t_index(int k) const;                 // epigraph scalar t_k >= ||W_k||_F
  int total_vars() const;

  HermitianMat unpack(const Eigen::VectorXd& x, int k) const;
  void pack(const HermitianMat& w, int k, Eigen::VectorXd& x) const;
};

/// Trace-bound robust SDP: SINR rows
///   Tr(H_k (W_k - g_k sum W_i)) - eps_k Tr(W_k + g_k sum W_i) >= s2 g_k,
/// IP rows Tr((G_l + xi_l I) sum W_k) <= kappa_l, W_k complex PSD via the
/// real embedding. The rank-one constraint is dropped.
ConicProgram build_lbcs(const ScenarioConfig& s);

/// Per-term exact Frobenius bounds: SINR rows
///   Tr(H_k (W_k - g_k sum W_i)) - eps_k (t_k + g_k sum t_i) >= s2 g_k,
/// IP rows sum_k (Tr(G_l W_k) + xi_l t_k) <= kappa_l, with shared epigraphs
/// ||W_k||_F <= t_k as second-order cone rows.
ConicProgram build_sbcs(const ScenarioConfig& s);

/// Joint-term exact bound: SINR row k is the single second-order cone
///   eps_k ||M_k||_F <= Tr(H_k M_k) - s2 g_k,  M_k = W_k - g_k sum_{i!=k} W_i;
/// IP rows identical to build_sbcs.
ConicProgram build_excs(const ScenarioConfig& s);

ConicProgram build_formulation(FormulationKind kind, const ScenarioConfig& s);

/// Minimizer of Tr((H + D) W) over ||D||_F <= eps: D = -eps W' / ||W||.
/// Throws std::invalid_argument when W == 0 (every D is then optimal).
HermitianMat prop1_min_delta(const HermitianMat& w, double eps);

/// Maximizer counterpart: D = +eps W' / ||W||.
HermitianMat prop1_max_delta(const HermitianMat& w, double eps);

/// Minimizer of Tr((H + D) M) with M = W_k - gamma sum(others), over
/// ||D||_F <= eps: D = -eps M' / ||M||. Throws when M == 0.
HermitianMat prop2_min_delta(const HermitianMat& w_k, const std::vector<HermitianMat>& others,
                             double gamma, double eps);

}  // namespace crbeam
