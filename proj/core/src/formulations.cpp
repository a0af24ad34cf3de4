#include "crbeam/formulations.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "crbeam/hermitian.hpp"

namespace crbeam {

const char* to_string(FormulationKind k) {
  switch (k) {
    case FormulationKind::Lbcs: return "lbcs";
    case FormulationKind::Sbcs: return "sbcs";
    case FormulationKind::Excs: return "excs";
  }
  return "unknown";
}

FormulationKind parse_formulation(const std::string& name) {
  if (name == "lbcs") return FormulationKind::Lbcs;
  if (name == "sbcs") return FormulationKind::Sbcs;
  if (name == "excs") return FormulationKind::Excs;
  throw std::invalid_argument("unknown formulation '" + name + "'");
}

VariableLayout VariableLayout::make(FormulationKind kind, int n_antennas, int n_users) {
  VariableLayout l;
  l.n_antennas = n_antennas;
  l.n_users = n_users;
  l.with_epigraph = kind != FormulationKind::Lbcs;
  return l;
}

int VariableLayout::diag_index(int k, int i) const { return w_offset(k) + i; }

int VariableLayout::re_index(int k, int i, int j) const {
  // Strict lower triangle, column major: pairs (i, j), j < i.
  const int n = n_antennas;
  const int tri = j * (2 * n - j - 1) / 2 + (i - j - 1);
  return w_offset(k) + n + tri;
}

int VariableLayout::im_index(int k, int i, int j) const {
  const int n = n_antennas;
  return re_index(k, i, j) + n * (n - 1) / 2;
}

int VariableLayout::t_index(int k) const {
  if (!with_epigraph) throw std::logic_error("layout has no epigraph scalars");
  return n_users * params_per_user() + k;
}

int VariableLayout::total_vars() const {
  return n_users * params_per_user() + (with_epigraph ? n_users : 0);
}

HermitianMat VariableLayout::unpack(const Eigen::VectorXd& x, int k) const {
  const int n = n_antennas;
  HermitianMat w(n, n);
  for (int i = 0; i < n; ++i) w(i, i) = x(diag_index(k, i));
  for (int j = 0; j < n; ++j) {
    for (int i = j + 1; i < n; ++i) {
      const Complex v(x(re_index(k, i, j)), x(im_index(k, i, j)));
      w(i, j) = v;
      w(j, i) = std::conj(v);
    }
  }
  return w;
}

void VariableLayout::pack(const HermitianMat& w, int k, Eigen::VectorXd& x) const {
  const int n = n_antennas;
  for (int i = 0; i < n; ++i) x(diag_index(k, i)) = w(i, i).real();
  for (int j = 0; j < n; ++j) {
    for (int i = j + 1; i < n; ++i) {
      x(re_index(k, i, j)) = w(i, j).real();
      x(im_index(k, i, j)) = w(i, j).imag();
    }
  }
}

namespace {

// Accumulates one linear functional coef'x over the flat decision vector.
struct RowAccum {
  std::map<int, double> coef;
  void add(int idx, double v) {
    if (v != 0.0) coef[idx] += v;
  }
};

// coef'x += scale * Tr(H W_k) for Hermitian H.
void add_trace(RowAccum& row, const VariableLayout& l, int k, const HermitianMat& h, double scale) {
  const int n = l.n_antennas;
  for (int i = 0; i < n; ++i) row.add(l.diag_index(k, i), scale * h(i, i).real());
  for (int j = 0; j < n; ++j) {
    for (int i = j + 1; i < n; ++i) {
      row.add(l.re_index(k, i, j), scale * 2.0 * h(i, j).real());
      row.add(l.im_index(k, i, j), scale * 2.0 * h(i, j).imag());
    }
  }
}

// coef'x += scale * Tr(W_k).
void add_trace_identity(RowAccum& row, const VariableLayout& l, int k, double scale) {
  for (int i = 0; i < l.n_antennas; ++i) row.add(l.diag_index(k, i), scale);
}

// Per-user coefficients of M_k = W_k - gamma_k sum_{i != k} W_i.
std::vector<double> mk_combination(int n_users, int k, double gamma) {
  std::vector<double> c(static_cast<size_t>(n_users), -gamma);
  c[static_cast<size_t>(k)] = 1.0;
  return c;
}

// Rows of scale * svec(M) with M = sum_u combo[u] W_u; the scaled
// parametrization (diagonal as-is, off-diagonal parts times sqrt(2)) makes
// the Euclidean length of these rows the Frobenius norm of M.
void append_svec_rows(std::vector<std::pair<RowAccum, double>>& rows, const VariableLayout& l,
                      const std::vector<double>& combo, double scale) {
  const int n = l.n_antennas;
  const int n_users = l.n_users;
  const double rt2 = std::sqrt(2.0);
  auto emit = [&](auto index_of, double entry_scale) {
    RowAccum row;
    for (int u = 0; u < n_users; ++u) {
      const double c = combo[static_cast<size_t>(u)];
      if (c != 0.0) row.add(index_of(u), scale * entry_scale * c);
    }
    rows.emplace_back(std::move(row), 0.0);
  };
  for (int i = 0; i < n; ++i)
    emit([&](int u) { return l.diag_index(u, i); }, 1.0);
  for (int j = 0; j < n; ++j) {
    for (int i = j + 1; i < n; ++i) {
      emit([&](int u) { return l.re_index(u, i, j); }, rt2);
      emit([&](int u) { return l.im_index(u, i, j); }, rt2);
    }
  }
}

class ProgramBuilder {
 public:
  ProgramBuilder(const VariableLayout& layout) : layout_(layout) {
    prog_.num_vars = layout.total_vars();
    prog_.c = Eigen::VectorXd::Zero(prog_.num_vars);
  }

  // coef'x >= rhs as one nonnegative row: s = coef'x - rhs.
  void add_ge(const RowAccum& row, double rhs) {
    begin_segment(ConeKind::NonNeg, 1);
    for (const auto& [idx, v] : row.coef) prog_.add_entry(next_row_, idx, -v);
    b_.push_back(-rhs);
    ++next_row_;
  }

  // coef'x <= rhs: s = rhs - coef'x.
  void add_le(const RowAccum& row, double rhs) {
    begin_segment(ConeKind::NonNeg, 1);
    for (const auto& [idx, v] : row.coef) prog_.add_entry(next_row_, idx, v);
    b_.push_back(rhs);
    ++next_row_;
  }

  // Second-order cone ||tail|| <= head over affine rows; each row given as
  // (coefficients, constant): s_row = coef'x + constant.
  void add_soc(const std::vector<std::pair<RowAccum, double>>& rows) {
    begin_segment(ConeKind::Soc, static_cast<int>(rows.size()));
    for (const auto& [row, constant] : rows) {
      for (const auto& [idx, v] : row.coef) prog_.add_entry(next_row_, idx, -v);
      b_.push_back(constant);
      ++next_row_;
    }
  }

  // W_k complex PSD via svec of the real embedding [[Re,-Im],[Im,Re]].
  void add_psd_block(int k) {
    const int n = layout_.n_antennas;
    const int side = 2 * n;
    begin_segment(ConeKind::Psd, side);
    const double rt2 = std::sqrt(2.0);
    // svec order: columns q, rows p >= q of the embedded matrix.
    for (int q = 0; q < side; ++q) {
      for (int p = q; p < side; ++p) {
        const double scale = p == q ? 1.0 : rt2;
        add_embed_entry(k, p, q, scale);
        b_.push_back(0.0);
        ++next_row_;
      }
    }
  }

  ConicProgram take() {
    prog_.b = Eigen::Map<Eigen::VectorXd>(b_.data(), static_cast<long>(b_.size()));
    return std::move(prog_);
  }

  Eigen::VectorXd& objective() { return prog_.c; }

 private:
  void begin_segment(ConeKind kind, int dim) {
    // Merge adjacent scalar rows into one segment.
    if (kind == ConeKind::NonNeg && !prog_.cones.empty() &&
        prog_.cones.back().kind == ConeKind::NonNeg) {
      prog_.cones.back().dim += dim;
      return;
    }
    prog_.cones.push_back({kind, dim});
  }

  // Entry (p, q) of embed(W_k) as +/- one layout parameter; row s = value.
  void add_embed_entry(int k, int p, int q, double scale) {
    const int n = layout_.n_antennas;
    const bool pr = p < n, qr = q < n;
    const int i = pr ? p : p - n;
    const int j = qr ? q : q - n;
    int idx = -1;
    double sign = 1.0;
    if (pr == qr) {
      // Re W block (top-left or bottom-right): i >= j in the lower triangle.
      if (i == j) idx = layout_.diag_index(k, i);
      else idx = layout_.re_index(k, i, j);
    } else {
      // Bottom-left block: Im W_{ij}; skew-symmetric, zero diagonal.
      if (i == j) return;
      if (i > j) idx = layout_.im_index(k, i, j);
      else {
        idx = layout_.im_index(k, j, i);
        sign = -1.0;
      }
    }
    prog_.add_entry(next_row_, idx, -sign * scale);
  }

  VariableLayout layout_;
  ConicProgram prog_;
  std::vector<double> b_;
  int next_row_ = 0;
};

// Shared scaffold: objective, SINR + IP scalar rows per formulation flavor,
// epigraph cones, PSD blocks.
ConicProgram build_program(FormulationKind kind, const ScenarioConfig& s) {
  s.validate();
  const int n = s.n_antennas;
  const int n_users = s.num_su();
  const int n_pu = s.num_pu();
  const VariableLayout layout = VariableLayout::make(kind, n, n_users);
  ProgramBuilder builder(layout);

  // Objective: total transmit power sum_k Tr(W_k).
  for (int k = 0; k < n_users; ++k)
    for (int i = 0; i < n; ++i) builder.objective()(layout.diag_index(k, i)) = 1.0;

  std::vector<HermitianMat> h_outer(static_cast<size_t>(n_users));
  for (int k = 0; k < n_users; ++k) h_outer[static_cast<size_t>(k)] = outer_product(s.su_channels[static_cast<size_t>(k)]);
  std::vector<HermitianMat> g_outer(static_cast<size_t>(n_pu));
  for (int l = 0; l < n_pu; ++l) g_outer[static_cast<size_t>(l)] = outer_product(s.pu_channels[static_cast<size_t>(l)]);

  // SINR rows.
  for (int k = 0; k < n_users; ++k) {
    const double gamma = s.sinr_thresholds[static_cast<size_t>(k)];
    const double eps = s.su_uncertainty[static_cast<size_t>(k)].matrix_radius;
    const double rhs = s.noise_power * gamma;
    const auto combo = mk_combination(n_users, k, gamma);
    if (kind == FormulationKind::Excs) {
      // eps ||M_k|| <= Tr(H_k M_k) - rhs as one SOC block.
      std::vector<std::pair<RowAccum, double>> rows;
      RowAccum head;
      for (int i = 0; i < n_users; ++i)
        add_trace(head, layout, i, h_outer[static_cast<size_t>(k)], combo[static_cast<size_t>(i)]);
      rows.emplace_back(std::move(head), -rhs);
      append_svec_rows(rows, layout, combo, eps);
      builder.add_soc(rows);
    } else {
      RowAccum row;
      for (int i = 0; i < n_users; ++i)
        add_trace(row, layout, i, h_outer[static_cast<size_t>(k)], combo[static_cast<size_t>(i)]);
      if (kind == FormulationKind::Lbcs) {
        for (int i = 0; i < n_users; ++i)
          add_trace_identity(row, layout, i, i == k ? -eps : -eps * gamma);
      } else {
        for (int i = 0; i < n_users; ++i)
          row.add(layout.t_index(i), i == k ? -eps : -eps * gamma);
      }
      builder.add_ge(row, rhs);
    }
  }

  // IP rows.
  for (int l = 0; l < n_pu; ++l) {
    const double xi = s.pu_uncertainty[static_cast<size_t>(l)].matrix_radius;
    const double kappa = s.ip_thresholds[static_cast<size_t>(l)];
    RowAccum row;
    for (int k = 0; k < n_users; ++k) {
      add_trace(row, layout, k, g_outer[static_cast<size_t>(l)], 1.0);
      if (kind == FormulationKind::Lbcs) add_trace_identity(row, layout, k, xi);
      else row.add(layout.t_index(k), xi);
    }
    builder.add_le(row, kappa);
  }

  // Epigraph cones ||W_k||_F <= t_k.
  if (layout.with_epigraph) {
    for (int k = 0; k < n_users; ++k) {
      std::vector<std::pair<RowAccum, double>> rows;
      RowAccum head;
      head.add(layout.t_index(k), 1.0);
      rows.emplace_back(std::move(head), 0.0);
      std::vector<double> combo(static_cast<size_t>(n_users), 0.0);
      combo[static_cast<size_t>(k)] = 1.0;
      append_svec_rows(rows, layout, combo, 1.0);
      builder.add_soc(rows);
    }
  }

  for (int k = 0; k < n_users; ++k) builder.add_psd_block(k);

  ConicProgram p = builder.take();
  p.validate();
  return p;
}

}  // namespace

ConicProgram build_lbcs(const ScenarioConfig& s) { return build_program(FormulationKind::Lbcs, s); }
ConicProgram build_sbcs(const ScenarioConfig& s) { return build_program(FormulationKind::Sbcs, s); }
ConicProgram build_excs(const ScenarioConfig& s) { return build_program(FormulationKind::Excs, s); }

ConicProgram build_formulation(FormulationKind kind, const ScenarioConfig& s) {
  return build_program(kind, s);
}

HermitianMat prop1_min_delta(const HermitianMat& w, double eps) {
  if (eps < 0.0) throw std::invalid_argument("prop1: eps must be nonnegative");
  const double norm = w.norm();
  if (norm <= 0.0) throw std::invalid_argument("prop1: W must be nonzero");
  return (-eps / norm) * w.adjoint();
}

HermitianMat prop1_max_delta(const HermitianMat& w, double eps) {
  if (eps < 0.0) throw std::invalid_argument("prop1: eps must be nonnegative");
  const double norm = w.norm();
  if (norm <= 0.0) throw std::invalid_argument("prop1: W must be nonzero");
  return (eps / norm) * w.adjoint();
}

HermitianMat prop2_min_delta(const HermitianMat& w_k, const std::vector<HermitianMat>& others,
                             double gamma, double eps) {
  if (eps < 0.0) throw std::invalid_argument("prop2: eps must be nonnegative");
  HermitianMat m = w_k;
  for (const auto& w : others) m -= gamma * w;
  const double norm = m.norm();
  if (norm <= 0.0) throw std::invalid_argument("prop2: W_k - gamma*sum(others) must be nonzero");
  return (-eps / norm) * m.adjoint();
}

}  // namespace crbeam
