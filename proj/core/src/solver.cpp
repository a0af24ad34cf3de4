#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <vector>

#include "crbeam/conic.hpp"

namespace crbeam {

namespace {

// Rows of a SOC or PSD segment must share one scale factor or the scaled
// slack would leave the cone; zero/nonneg rows scale independently.
std::vector<int> row_group_ids(const std::vector<ConeSeg>& cones, int m) {
  std::vector<int> group(static_cast<size_t>(m), 0);
  int at = 0, gid = 0;
  for (const auto& seg : cones) {
    const int rows = seg.rows();
    const bool coupled = seg.kind == ConeKind::Soc || seg.kind == ConeKind::Psd;
    for (int r = 0; r < rows; ++r) group[static_cast<size_t>(at + r)] = coupled ? gid : gid + r;
    gid += coupled ? 1 : rows;
    at += rows;
  }
  return group;
}

double clamp_scale(double v) {
  if (v < 1e-10) return 1e-10;
  if (v > 1e10) return 1e10;
  return v;
}

struct Equilibration {
  Eigen::VectorXd row;  // D diagonal
  Eigen::VectorXd col;  // E diagonal
};

// Ruiz equilibration with cone-uniform row groups. The rhs participates in
// the row maxima so a vacuous row with a huge constant (for example a slack
// interference cap) is scaled down with its slack instead of dominating the
// iterate magnitudes.
Equilibration ruiz(std::vector<Eigen::Triplet<double>>& entries, Eigen::VectorXd& b,
                   const std::vector<ConeSeg>& cones, int m, int n, int iters) {
  Equilibration eq{Eigen::VectorXd::Ones(m), Eigen::VectorXd::Ones(n)};
  const std::vector<int> group = row_group_ids(cones, m);
  int n_groups = 0;
  for (int g : group) n_groups = std::max(n_groups, g + 1);

  std::vector<double> gmax(static_cast<size_t>(n_groups));
  std::vector<double> cmax(static_cast<size_t>(n));
  for (int it = 0; it < iters; ++it) {
    std::fill(gmax.begin(), gmax.end(), 0.0);
    std::fill(cmax.begin(), cmax.end(), 0.0);
    for (const auto& t : entries) {
      const double av = std::abs(t.value());
      auto& gm = gmax[static_cast<size_t>(group[static_cast<size_t>(t.row())])];
      gm = std::max(gm, av);
      auto& cm = cmax[static_cast<size_t>(t.col())];
      cm = std::max(cm, av);
    }
    for (int i = 0; i < m; ++i) {
      auto& gm = gmax[static_cast<size_t>(group[static_cast<size_t>(i)])];
      gm = std::max(gm, std::abs(b(i)));
    }
    bool changed = false;
    Eigen::VectorXd dr(m), de(n);
    for (int i = 0; i < m; ++i) {
      const double g = gmax[static_cast<size_t>(group[static_cast<size_t>(i)])];
      dr(i) = g > 0.0 ? 1.0 / std::sqrt(clamp_scale(g)) : 1.0;
      if (std::abs(dr(i) - 1.0) > 1e-3) changed = true;
    }
    for (int j = 0; j < n; ++j) {
      const double g = cmax[static_cast<size_t>(j)];
      de(j) = g > 0.0 ? 1.0 / std::sqrt(clamp_scale(g)) : 1.0;
      if (std::abs(de(j) - 1.0) > 1e-3) changed = true;
    }
    for (auto& t : entries)
      t = Eigen::Triplet<double>(t.row(), t.col(), t.value() * dr(t.row()) * de(t.col()));
    b.array() *= dr.array();
    eq.row.array() *= dr.array();
    eq.col.array() *= de.array();
    if (!changed) break;
  }
  return eq;
}

struct Candidate {
  Eigen::VectorXd x, y, s;
  ResidualTriple res{1e308, 1e308, 1e308};
  double objective = 0.0;
};

SolverBackend g_external_backend = nullptr;

}  // namespace

void register_solver_backend(SolverBackend backend) { g_external_backend = backend; }

SolverResult solve(const ConicProgram& p, const SolverSettings& settings) {
  if (settings.backend == "external") {
    if (!g_external_backend)
      throw std::invalid_argument("solve: no external backend registered");
    return g_external_backend(p, settings);
  }
  if (settings.backend != "internal")
    throw std::invalid_argument("solve: unknown backend '" + settings.backend + "'");
  p.validate();
  if (!(settings.tolerance > 0.0)) throw std::invalid_argument("solve: tolerance must be > 0");
  const int n = p.num_vars;
  const int m = p.num_rows();

  const Eigen::SparseMatrix<double> a_orig = p.a_matrix();
  const double b_norm = p.b.norm();
  const double c_norm = p.c.norm();

  // ----- scaling -----
  Eigen::VectorXd d = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd e = Eigen::VectorXd::Ones(n);
  std::vector<Eigen::Triplet<double>> scaled_entries = p.entries;
  Eigen::VectorXd bs = p.b;
  if (settings.scaling && m > 0 && n > 0) {
    const Equilibration eq = ruiz(scaled_entries, bs, p.cones, m, n, 10);
    d = eq.row;
    e = eq.col;
  }
  Eigen::SparseMatrix<double> a(m, n);
  a.setFromTriplets(scaled_entries.begin(), scaled_entries.end());
  const Eigen::SparseMatrix<double> at = a.transpose();

  Eigen::VectorXd cs = e.asDiagonal() * p.c;
  // Normalize b by the median nonzero magnitude rather than the norm: one
  // huge-but-slack rhs entry must not drown the scale of the binding rows.
  const double balance = settings.balance > 0.0 ? settings.balance : 1.0;
  double b_scale = 0.0;
  if (settings.scaling) {
    std::vector<double> mags;
    for (int i = 0; i < m; ++i)
      if (bs(i) != 0.0) mags.push_back(std::abs(bs(i)));
    if (!mags.empty()) {
      std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
      b_scale = mags[mags.size() / 2];
    }
  }
  double sb = (settings.scaling ? 1.0 / (1.0 + b_scale) : 1.0) * balance;
  const double sc = settings.scaling ? 1.0 / (1.0 + cs.norm()) : 1.0;
  bs *= sb;
  cs *= sc;

  // ----- factor I + A'A once -----
  Eigen::SparseMatrix<double> gram(n, n);
  {
    Eigen::SparseMatrix<double> ident(n, n);
    ident.setIdentity();
    gram = ident;
    if (m > 0) gram = gram + Eigen::SparseMatrix<double>(at * a);
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.compute(gram);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("solve: factorization of I + A'A failed");

  auto solve_m = [&](const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& zx,
                     Eigen::VectorXd& zy) {
    zx = ldlt.solve(m > 0 ? Eigen::VectorXd(r1 - at * r2) : r1);
    if (m > 0) zy = r2 + a * zx;
  };

  Eigen::VectorXd qx(n), qy(m);
  solve_m(cs, bs, qx, qy);
  const double qdenom = std::max(1.0 + cs.dot(qx) + bs.dot(qy), 1e-12);

  // ----- iterate -----
  Eigen::VectorXd ux = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd uy = Eigen::VectorXd::Zero(m);
  double utau = 1.0;
  Eigen::VectorXd vy = Eigen::VectorXd::Zero(m);
  double vtau = 1.0;

  Eigen::VectorXd wx(n), wy(m), px(n), py(m), tx(n), ty(m);
  Eigen::VectorXd cert(std::max(m, n)), work(std::max(m, n));

  Candidate best;
  best.x = Eigen::VectorXd::Zero(n);
  best.y = Eigen::VectorXd::Zero(m);
  best.s = Eigen::VectorXd::Zero(m);

  const double alpha = std::clamp(settings.relaxation, 0.1, 1.95);
  const int check_every = std::max(1, settings.check_interval);
  int pinf_count = 0, dinf_count = 0;
  SolverResult out;

  auto finish = [&](SolverStatus status, const Candidate& cand, int iter) {
    out.status = status;
    out.x = cand.x;
    out.y = cand.y;
    out.s = cand.s;
    out.objective = cand.objective;
    out.primal_residual = cand.res.primal;
    out.dual_residual = cand.res.dual;
    out.gap_residual = cand.res.gap;
    out.iterations = iter;
    return out;
  };

  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    // (i) projection onto the affine subspace v = Qu via the cached factor
    wx = ux;  // + vx, which stays identically zero
    wy = uy + vy;
    const double wtau = utau + vtau;
    solve_m(wx, wy, px, py);
    const double ttau = (wtau + cs.dot(px) + bs.dot(py)) / qdenom;
    tx = px - ttau * qx;
    ty = py - ttau * qy;

    // over-relaxation
    tx = alpha * tx + (1.0 - alpha) * ux;
    ty = alpha * ty + (1.0 - alpha) * uy;
    const double rtau = alpha * ttau + (1.0 - alpha) * utau;

    // (ii) cone projection
    ux = tx;
    uy = ty - vy;
    project_cone_product(p.cones, uy, /*dual=*/true);
    const double new_utau = std::max(0.0, rtau - vtau);

    // (iii) dual update
    vy += uy - ty;
    vtau += new_utau - rtau;
    utau = new_utau;

    // infeasibility certificates, held for settings.infeas_hold iterations
    if (m > 0) {
      if (b_norm > 0.0) {
        cert.head(m) = d.asDiagonal() * uy / sc;
        const double by = p.b.dot(cert.head(m));
        bool hit = false;
        if (by < 0.0) {
          work.head(n) = a_orig.transpose() * cert.head(m);
          hit = work.head(n).norm() * b_norm / (-by) <= settings.infeas_tolerance;
        }
        pinf_count = hit ? pinf_count + 1 : 0;
        if (pinf_count >= settings.infeas_hold) {
          Candidate cand;
          cand.y = cert.head(m) / (-by);
          cand.x = Eigen::VectorXd::Zero(n);
          cand.s = Eigen::VectorXd::Zero(m);
          cand.objective = std::numeric_limits<double>::quiet_NaN();
          return finish(SolverStatus::PrimalInfeasible, cand, iter);
        }
      }
      if (c_norm > 0.0) {
        cert.head(n) = e.asDiagonal() * ux / sb;
        const double cx = p.c.dot(cert.head(n));
        bool hit = false;
        double scale = 1.0;
        if (cx < 0.0) {
          scale = -cx;
          work.head(m) = a_orig * cert.head(n) + Eigen::VectorXd(d.asDiagonal().inverse() * vy / sb);
          hit = work.head(m).norm() * c_norm / scale <= settings.infeas_tolerance;
        }
        dinf_count = hit ? dinf_count + 1 : 0;
        if (dinf_count >= settings.infeas_hold) {
          Candidate cand;
          cand.x = cert.head(n) / scale;
          cand.s = Eigen::VectorXd(d.asDiagonal().inverse() * vy / sb) / scale;
          cand.y = Eigen::VectorXd::Zero(m);
          cand.objective = -std::numeric_limits<double>::infinity();
          return finish(SolverStatus::DualInfeasible, cand, iter);
        }
      }
    }

    // optimality check on the unscaled candidate
    if (iter % check_every == 0 || iter == settings.max_iterations) {
      if (utau > 1e-12) {
        Candidate cand;
        cand.x = e.asDiagonal() * ux / (sb * utau);
        cand.y = d.asDiagonal() * uy / (sc * utau);
        cand.s = d.asDiagonal().inverse() * vy / (sb * utau);
        cand.res.primal = (a_orig * cand.x + cand.s - p.b).norm() / (1.0 + b_norm);
        cand.res.dual = (a_orig.transpose() * cand.y + p.c).norm() / (1.0 + c_norm);
        const double cx = p.c.dot(cand.x);
        const double by = m > 0 ? p.b.dot(cand.y) : 0.0;
        cand.res.gap = std::abs(cx + by) / (1.0 + std::abs(cx) + std::abs(by));
        cand.objective = cx;
        if (cand.res.max() < best.res.max()) best = cand;
        if (settings.verbosity > 0 && iter % (check_every * 40) == 0) {
          std::printf("iter %6d  pres %.3e  dres %.3e  gap %.3e\n", iter, cand.res.primal,
                      cand.res.dual, cand.res.gap);
        }
        if (cand.res.primal <= settings.tolerance && cand.res.dual <= settings.tolerance &&
            cand.res.gap <= settings.tolerance) {
          return finish(SolverStatus::Optimal, cand, iter);
        }
      }
    }
  }

  const SolverStatus status = best.res.max() <= settings.inaccurate_tolerance
                                  ? SolverStatus::Inaccurate
                                  : SolverStatus::MaxIters;
  return finish(status, best, settings.max_iterations);
}

}  // namespace crbeam
