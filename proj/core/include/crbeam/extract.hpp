#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crbeam/conic.hpp"
#include "crbeam/formulations.hpp"
#include "crbeam/model.hpp"

namespace crbeam {

/// Relaxed covariance solution together with the extracted beamforming
/// weights and their rank-one diagnostics.
struct PrecoderSolution {
  FormulationKind formulation = FormulationKind::Lbcs;
  SolverStatus solver_status = SolverStatus::MaxIters;
  std::vector<HermitianMat> covariances;  // W_k from the solver
  std::vector<ComplexVec> weights;        // w_k, repaired when needed
  // Total transmit power sum Tr(W_k); NaN when the solve failed.
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> rank1_defects;      // 1 - lambda_max/Tr per user
  double repair_alpha = 1.0;              // amplitude factor applied by repair
  bool repaired = false;
  std::vector<double> sinr_margins;       // worst-case margins at the weights
  std::vector<double> ip_margins;
};

struct PrincipalWeight {
  ComplexVec w;     // sqrt(lambda_max) * unit eigenvector, phase-normalized
  double defect;    // 1 - lambda_max / Tr(W)
};

/// Principal eigenpair extraction w = sqrt(lambda_max) e_max. The returned
/// vector has its largest-magnitude entry rotated to be real nonnegative.
/// Throws std::invalid_argument for zero trace or markedly non-PSD input.
PrincipalWeight principal_weight(const HermitianMat& w);

struct CertificationReport {
  std::vector<double> sinr_margins;  // worst-case LHS - sigma^2 gamma_k
  std::vector<double> ip_margins;    // kappa_l - worst-case IP
  bool certified = false;            // all margins >= -1e-6
};

/// Evaluates the formulation's own worst-case constraint expressions at
/// W_k = w_k w_k'.
CertificationReport certify_weights(const ScenarioConfig& s,
                                    const std::vector<ComplexVec>& weights,
                                    FormulationKind kind);

struct RepairResult {
  bool success = false;
  double alpha = 1.0;                // common amplitude factor, >= 1
  std::vector<ComplexVec> weights;   // alpha * input on success
  CertificationReport cert;          // certification at the returned weights
  std::string reason;                // set on failure
};

/// Smallest alpha in [1, 10] (bisection to 1e-9) making all worst-case SINR
/// margins nonnegative; fails when none exists or IP is violated there.
RepairResult repair_by_scaling(const ScenarioConfig& s, const std::vector<ComplexVec>& weights,
                               FormulationKind kind);

/// Unpacks a solver result into covariances, extracts weights, certifies,
/// and repairs by scaling when the defect exceeds 1e-6 or certification
/// fails. Non-optimal solver statuses yield a solution without weights.
PrecoderSolution extract_solution(const ScenarioConfig& s, FormulationKind kind,
                                  const SolverResult& result);

struct FileMeta {
  std::string version;
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string label;  // "robust" / "non-robust" run annotation
};

void write_solution(std::ostream& out, const PrecoderSolution& sol, const FileMeta& meta);
void write_solution_file(const std::string& path, const PrecoderSolution& sol, const FileMeta& meta);
PrecoderSolution read_solution(std::istream& in, FileMeta* meta = nullptr);
PrecoderSolution read_solution_file(const std::string& path, FileMeta* meta = nullptr);

}  // namespace crbeam
