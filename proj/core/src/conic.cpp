#include "crbeam/conic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "crbeam/hermitian.hpp"

namespace crbeam {

int ConicProgram::num_rows() const {
  int m = 0;
  for (const auto& seg : cones) m += seg.rows();
  return m;
}

void ConicProgram::add_entry(int row, int col, double value) {
  if (value != 0.0) entries.emplace_back(row, col, value);
}

Eigen::SparseMatrix<double> ConicProgram::a_matrix() const {
  Eigen::SparseMatrix<double> a(num_rows(), num_vars);
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

void ConicProgram::validate() const {
  const int m = num_rows();
  if (num_vars < 0) throw std::invalid_argument("program: negative variable count");
  if (c.size() != num_vars) throw std::invalid_argument("program: objective length != num_vars");
  if (b.size() != m) throw std::invalid_argument("program: rhs length != cone rows");
  for (const auto& seg : cones) {
    if (seg.dim <= 0) throw std::invalid_argument("program: cone segment with dim <= 0");
  }
  if (!c.allFinite() || !b.allFinite())
    throw std::invalid_argument("program: non-finite objective or rhs");
  std::vector<char> touched(static_cast<size_t>(num_vars), 0);
  for (const auto& t : entries) {
    if (t.row() < 0 || t.row() >= m || t.col() < 0 || t.col() >= num_vars)
      throw std::invalid_argument("program: entry outside A dimensions");
    if (!std::isfinite(t.value())) throw std::invalid_argument("program: non-finite entry in A");
    touched[static_cast<size_t>(t.col())] = 1;
  }
  for (int j = 0; j < num_vars; ++j) {
    if (!touched[static_cast<size_t>(j)])
      throw std::invalid_argument("program: variable " + std::to_string(j) +
                                  " appears in no constraint row");
  }
}

const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Optimal: return "optimal";
    case SolverStatus::PrimalInfeasible: return "primal_infeasible";
    case SolverStatus::DualInfeasible: return "dual_infeasible";
    case SolverStatus::MaxIters: return "max_iters";
    case SolverStatus::Inaccurate: return "inaccurate";
  }
  return "unknown";
}

SolverStatus parse_solver_status(const std::string& name) {
  for (SolverStatus s : {SolverStatus::Optimal, SolverStatus::PrimalInfeasible,
                         SolverStatus::DualInfeasible, SolverStatus::MaxIters,
                         SolverStatus::Inaccurate}) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown solver status '" + name + "'");
}

double ResidualTriple::max() const { return std::max(primal, std::max(dual, gap)); }

ResidualTriple kkt_report(const ConicProgram& p, const SolverResult& r) {
  const int m = p.num_rows();
  if (r.x.size() != p.num_vars || r.y.size() != m || r.s.size() != m)
    throw std::invalid_argument("kkt_report: result vectors do not match program dimensions");
  const Eigen::SparseMatrix<double> a = p.a_matrix();
  ResidualTriple t;
  t.primal = (a * r.x + r.s - p.b).norm() / (1.0 + p.b.norm());
  t.dual = (a.transpose() * r.y + p.c).norm() / (1.0 + p.c.norm());
  const double cx = p.c.dot(r.x);
  const double by = p.b.dot(r.y);
  t.gap = std::abs(cx + by) / (1.0 + std::abs(cx) + std::abs(by));
  return t;
}

namespace {

void soc_project(Eigen::Ref<Eigen::VectorXd> z) {
  const int n = static_cast<int>(z.size());
  if (n == 1) {
    z(0) = std::max(0.0, z(0));
    return;
  }
  const double t = z(0);
  const double nz = z.tail(n - 1).norm();
  if (nz <= t) return;
  if (nz <= -t) {
    z.setZero();
    return;
  }
  const double alpha = 0.5 * (t + nz);
  z(0) = alpha;
  z.tail(n - 1) *= alpha / nz;
}

}  // namespace

void project_cone_product(const std::vector<ConeSeg>& cones, Eigen::Ref<Eigen::VectorXd> z,
                          bool dual) {
  int at = 0;
  for (const auto& seg : cones) {
    const int rows = seg.rows();
    switch (seg.kind) {
      case ConeKind::Zero:
        // Dual of {0} is the free cone.
        if (!dual) z.segment(at, rows).setZero();
        break;
      case ConeKind::NonNeg:
        z.segment(at, rows) = z.segment(at, rows).cwiseMax(0.0);
        break;
      case ConeKind::Soc:
        soc_project(z.segment(at, rows));
        break;
      case ConeKind::Psd:
        psd_project(z.segment(at, rows));
        break;
    }
    at += rows;
  }
}

void dump_program(const ConicProgram& p, std::ostream& out) {
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "conicprogram 1\n";
  out << "dims " << p.num_rows() << " " << p.num_vars << "\n";
  for (const auto& seg : p.cones) {
    switch (seg.kind) {
      case ConeKind::Zero: out << "cone zero "; break;
      case ConeKind::NonNeg: out << "cone nonneg "; break;
      case ConeKind::Soc: out << "cone soc "; break;
      case ConeKind::Psd: out << "cone psd "; break;
    }
    out << seg.dim << "\n";
  }
  for (int j = 0; j < p.num_vars; ++j)
    if (p.c(j) != 0.0) out << "c " << j << " " << fmt(p.c(j)) << "\n";
  for (int i = 0; i < p.b.size(); ++i)
    if (p.b(i) != 0.0) out << "b " << i << " " << fmt(p.b(i)) << "\n";
  for (const auto& t : p.entries)
    out << "A " << t.row() << " " << t.col() << " " << fmt(t.value()) << "\n";
  out << "end\n";
}

ConicProgram load_program(std::istream& in) {
  ConicProgram p;
  std::string line;
  int lineno = 0;
  int declared_rows = -1;
  bool saw_header = false, saw_dims = false, saw_end = false;
  auto fail = [&lineno](const std::string& msg) {
    throw std::runtime_error("program load error at line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;
    if (!saw_header) {
      int ver = 0;
      if (tok != "conicprogram" || !(ls >> ver) || ver != 1) fail("expected 'conicprogram 1' header");
      saw_header = true;
      continue;
    }
    if (tok == "dims") {
      if (!(ls >> declared_rows >> p.num_vars)) fail("malformed dims");
      p.c = Eigen::VectorXd::Zero(p.num_vars);
      p.b = Eigen::VectorXd::Zero(declared_rows);
      saw_dims = true;
    } else if (tok == "cone") {
      if (!saw_dims) fail("cone before dims");
      std::string kind;
      int dim = 0;
      if (!(ls >> kind >> dim)) fail("malformed cone");
      ConeSeg seg;
      seg.dim = dim;
      if (kind == "zero") seg.kind = ConeKind::Zero;
      else if (kind == "nonneg") seg.kind = ConeKind::NonNeg;
      else if (kind == "soc") seg.kind = ConeKind::Soc;
      else if (kind == "psd") seg.kind = ConeKind::Psd;
      else fail("unknown cone kind '" + kind + "'");
      p.cones.push_back(seg);
    } else if (tok == "c") {
      int j; double v;
      if (!(ls >> j >> v)) fail("malformed c entry");
      if (j < 0 || j >= p.num_vars) fail("c index out of range");
      p.c(j) = v;
    } else if (tok == "b") {
      int i; double v;
      if (!(ls >> i >> v)) fail("malformed b entry");
      if (i < 0 || i >= declared_rows) fail("b index out of range");
      p.b(i) = v;
    } else if (tok == "A") {
      int i, j; double v;
      if (!(ls >> i >> j >> v)) fail("malformed A triplet");
      p.entries.emplace_back(i, j, v);
    } else if (tok == "end") {
      saw_end = true;
      break;
    } else {
      fail("unknown directive '" + tok + "'");
    }
  }
  if (!saw_header || !saw_dims || !saw_end)
    throw std::runtime_error("program load error: truncated file");
  if (p.num_rows() != declared_rows)
    throw std::runtime_error("program load error: cone rows disagree with dims");
  p.validate();
  return p;
}

void save_program(const ConicProgram& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  dump_program(p, out);
}

ConicProgram load_program_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_program(in);
}

}  // namespace crbeam
