#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace crbeam {

enum class ConeKind { Zero, NonNeg, Soc, Psd };

/// One segment of the cone product. dim is the row count for Zero/NonNeg/Soc
/// and the block side for Psd (which covers svec_len(dim) rows of scaled
/// lower-triangular vectorization).
struct ConeSeg {
  ConeKind kind = ConeKind::Zero;
  int dim = 0;
  int rows() const { return kind == ConeKind::Psd ? dim * (dim + 1) / 2 : dim; }
};

/// Standard form: minimize c'x subject to Ax + s = b, s in K,
/// K the ordered product of the cone segments.
struct ConicProgram {
  int num_vars = 0;
  std::vector<ConeSeg> cones;
  Eigen::VectorXd c;
  Eigen::VectorXd b;
  std::vector<Eigen::Triplet<double>> entries;

  int num_rows() const;
  void add_entry(int row, int col, double value);
  Eigen::SparseMatrix<double> a_matrix() const;

  /// Throws std::invalid_argument on inconsistent dimensions, non-finite
  /// data, or a decision variable no constraint row touches.
  void validate() const;
};

enum class SolverStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIters, Inaccurate };

const char* to_string(SolverStatus s);
SolverStatus parse_solver_status(const std::string& name);

struct SolverSettings {
  double tolerance = 1e-8;     // relative KKT residual target
  int max_iterations = 50000;
  bool scaling = true;         // Ruiz equilibration of A plus b/c normalization
  int verbosity = 0;
  double relaxation = 1.8;     // over-relaxation factor in (0, 2)
  double balance = 100.0;      // primal/dual scale on the normalized rhs
  int check_interval = 25;     // optimality check cadence (iterations)
  double infeas_tolerance = 1e-9;
  int infeas_hold = 50;        // consecutive iterations before declaring
  double inaccurate_tolerance = 1e-4;
  std::string backend = "internal";  // or "external" for a registered hook
};

struct SolverResult {
  SolverStatus status = SolverStatus::MaxIters;
  Eigen::VectorXd x;  // primal; infeasibility certificate direction when DualInfeasible
  Eigen::VectorXd y;  // dual; infeasibility certificate when PrimalInfeasible
  Eigen::VectorXd s;  // primal slack, in K
  double objective = std::numeric_limits<double>::quiet_NaN();
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
  double gap_residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

/// Operator-splitting solve of the homogeneous self-dual embedding:
/// alternate a factored linear-system projection, Euclidean cone projection,
/// and dual update until the three KKT residuals meet settings.tolerance.
SolverResult solve(const ConicProgram& p, const SolverSettings& settings = {});

/// Cross-validation seam: a third-party solver adapter invoked by solve()
/// when settings.backend == "external". Pass nullptr to unregister. The
/// internal method stays the default and carries all contracts.
using SolverBackend = SolverResult (*)(const ConicProgram&, const SolverSettings&);
void register_solver_backend(SolverBackend backend);

struct ResidualTriple {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double max() const;
};

/// Recomputes ||Ax+s-b||/(1+||b||), ||A'y+c||/(1+||c||) and
/// |c'x+b'y|/(1+|c'x|+|b'y|) from the program data and result vectors,
/// independent of the solver's bookkeeping.
ResidualTriple kkt_report(const ConicProgram& p, const SolverResult& r);

/// Euclidean projection of z onto the cone product (dual=false) or onto its
/// dual (dual=true; Zero becomes free, the others are self-dual). In place.
void project_cone_product(const std::vector<ConeSeg>& cones, Eigen::Ref<Eigen::VectorXd> z,
                          bool dual = false);

/// Plain-text sparse triplet format: header with dims and cone list, body of
/// row/col/value triplets for objective, rhs and A.
void dump_program(const ConicProgram& p, std::ostream& out);
ConicProgram load_program(std::istream& in);
void save_program(const ConicProgram& p, const std::string& path);
ConicProgram load_program_file(const std::string& path);

}  // namespace crbeam
