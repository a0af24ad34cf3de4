#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "crbeam/extract.hpp"
#include "crbeam/hermitian.hpp"

using namespace crbeam;

namespace {

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

ComplexVec random_cvec(int n, std::mt19937_64& rng) {
  ComplexVec v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(uniform(rng) - 0.5, uniform(rng) - 0.5);
  return v;
}

ScenarioConfig two_user_scenario() {
  ScenarioConfig s;
  s.n_antennas = 4;
  s.noise_power = 0.01;
  s.su_channels = {ula_steering(30.0, 4), ula_steering(70.0, 4)};
  s.su_uncertainty = {UncertaintyBall::from_matrix_radius(0.05, s.su_channels[0]),
                      UncertaintyBall::from_matrix_radius(0.05, s.su_channels[1])};
  s.sinr_thresholds = {db_to_linear(6.0), db_to_linear(6.0)};
  s.pu_channels = {ula_steering(110.0, 4)};
  s.pu_uncertainty = {UncertaintyBall::from_matrix_radius(0.05, s.pu_channels[0])};
  s.ip_thresholds = {0.01};
  return s;
}

}  // namespace

TEST_CASE("principal_weight recovers a rank-one factor") {
  std::mt19937_64 rng(43);
  const ComplexVec v = random_cvec(5, rng);
  const PrincipalWeight pw = principal_weight(outer_product(v));
  CHECK(pw.defect <= 1e-12);
  CHECK(pw.w.squaredNorm() == doctest::Approx(v.squaredNorm()).epsilon(1e-9));
  // Same vector up to a global phase.
  CHECK(std::abs(pw.w.dot(v)) == doctest::Approx(v.squaredNorm()).epsilon(1e-9));
  // Phase convention: largest-magnitude entry real nonnegative.
  int argmax = 0;
  pw.w.cwiseAbs().maxCoeff(&argmax);
  CHECK(pw.w(argmax).imag() == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(pw.w(argmax).real() >= 0.0);
}

TEST_CASE("principal_weight on the maximally degenerate diag(1,1)") {
  const PrincipalWeight pw = principal_weight(HermitianMat::Identity(2, 2));
  CHECK(pw.defect == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pw.w.norm() == doctest::Approx(1.0).epsilon(1e-12));
  // Tie broken toward the first axis.
  CHECK(std::abs(pw.w(0) - Complex(1.0, 0.0)) < 1e-9);
}

TEST_CASE("principal_weight is phase invariant and rejects bad input") {
  std::mt19937_64 rng(47);
  const ComplexVec v = random_cvec(4, rng);
  const Complex phase = std::polar(1.0, 1.234);
  const PrincipalWeight a = principal_weight(outer_product(v));
  const PrincipalWeight b = principal_weight(outer_product(ComplexVec(phase * v)));
  CHECK(a.defect == doctest::Approx(b.defect).epsilon(1e-12));
  CHECK(a.w.norm() == doctest::Approx(b.w.norm()).epsilon(1e-12));
  CHECK((a.w - b.w).norm() < 1e-9);  // same canonical phase

  CHECK_THROWS_AS(principal_weight(HermitianMat::Zero(3, 3)), std::invalid_argument);
  HermitianMat indefinite = HermitianMat::Identity(2, 2);
  indefinite(1, 1) = Complex(-1.0, 0.0);
  indefinite(0, 0) = Complex(3.0, 0.0);
  CHECK_THROWS_AS(principal_weight(indefinite), std::invalid_argument);
}

TEST_CASE("certify_weights margins behave as contracted") {
  const ScenarioConfig s = two_user_scenario();
  const SolverResult r = solve(build_excs(s));
  REQUIRE(r.status == SolverStatus::Optimal);
  const PrecoderSolution sol = extract_solution(s, FormulationKind::Excs, r);
  REQUIRE(sol.weights.size() == 2);

  const CertificationReport rep = certify_weights(s, sol.weights, FormulationKind::Excs);
  CHECK(rep.certified);
  for (double m : rep.sinr_margins) CHECK(m >= -1e-6);
  for (double m : rep.ip_margins) CHECK(m >= -1e-6);

  // Doubling the amplitudes doubles powers and must break the active IP cap
  // whenever it was appreciably loaded; here it is.
  std::vector<ComplexVec> doubled = sol.weights;
  for (auto& w : doubled) w *= std::sqrt(2.0);
  const CertificationReport rep2 = certify_weights(s, doubled, FormulationKind::Excs);
  const double ip_used = s.ip_thresholds[0] - rep.ip_margins[0];
  if (2.0 * ip_used > s.ip_thresholds[0]) CHECK(rep2.ip_margins[0] < 0.0);

  // Zero weights: every SINR margin is exactly -s2*gamma.
  std::vector<ComplexVec> zeros = {ComplexVec::Zero(4), ComplexVec::Zero(4)};
  const CertificationReport rep3 = certify_weights(s, zeros, FormulationKind::Excs);
  for (int k = 0; k < 2; ++k)
    CHECK(rep3.sinr_margins[static_cast<size_t>(k)] ==
          doctest::Approx(-s.noise_power * s.sinr_thresholds[static_cast<size_t>(k)]).epsilon(1e-12));
}

TEST_CASE("repair_by_scaling restores shrunk weights") {
  const ScenarioConfig s = two_user_scenario();
  const SolverResult r = solve(build_excs(s));
  REQUIRE(r.status == SolverStatus::Optimal);
  const PrecoderSolution sol = extract_solution(s, FormulationKind::Excs, r);

  // Already feasible: alpha stays 1.
  const RepairResult ok = repair_by_scaling(s, sol.weights, FormulationKind::Excs);
  CHECK(ok.success);
  CHECK(ok.alpha == 1.0);

  // Shrunk by 0.9: bisection lands near 1/0.9 (margins scale with alpha^2
  // and the solve leaves them only slightly positive).
  std::vector<ComplexVec> shrunk = sol.weights;
  for (auto& w : shrunk) w *= 0.9;
  const RepairResult rep = repair_by_scaling(s, shrunk, FormulationKind::Excs);
  CHECK(rep.success);
  CHECK(rep.alpha >= 1.0);
  CHECK(rep.alpha <= 1.0 / 0.9 + 1e-6);
  CHECK(rep.alpha == doctest::Approx(1.0 / 0.9).epsilon(0.05));
  for (double m : rep.cert.sinr_margins) CHECK(m >= -1e-6);
  for (double m : rep.cert.ip_margins) CHECK(m >= -1e-6);

  // Weights orthogonal to every SU channel cannot be repaired by scaling.
  Eigen::MatrixXcd blockers(4, 2);
  blockers.col(0) = s.su_channels[0];
  blockers.col(1) = s.su_channels[1];
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(blockers);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(4, 2);
  std::mt19937_64 rng2(53);
  ComplexVec off = random_cvec(4, rng2);
  off -= q * (q.adjoint() * off);
  std::vector<ComplexVec> hopeless = {off, off};
  const RepairResult fail = repair_by_scaling(s, hopeless, FormulationKind::Excs);
  CHECK_FALSE(fail.success);
  CHECK_FALSE(fail.reason.empty());

  CHECK_THROWS_AS(
      repair_by_scaling(s, {ComplexVec::Zero(4), ComplexVec::Zero(4)}, FormulationKind::Excs),
      std::invalid_argument);
}

TEST_CASE("extract_solution produces certified weights and diagnostics") {
  const ScenarioConfig s = two_user_scenario();
  for (FormulationKind kind :
       {FormulationKind::Lbcs, FormulationKind::Sbcs, FormulationKind::Excs}) {
    const SolverResult r = solve(build_formulation(kind, s));
    REQUIRE(r.status == SolverStatus::Optimal);
    const PrecoderSolution sol = extract_solution(s, kind, r);
    CHECK(sol.objective == doctest::Approx(r.objective).epsilon(1e-9));
    REQUIRE(sol.rank1_defects.size() == 2);
    for (double d : sol.rank1_defects) {
      CHECK(d >= 0.0);
      CHECK(d <= 1.0);
    }
    for (double m : sol.sinr_margins) CHECK(m >= -1e-6);
    for (double m : sol.ip_margins) CHECK(m >= -1e-6);
    // Covariances are PSD up to solver tolerance.
    for (const auto& w : sol.covariances)
      CHECK(hermitian_eigenvalues(w)(0) >= -1e-8 * (1.0 + w.norm()));
  }
}

TEST_CASE("certify margins match solver row slacks for clean rank-one solves") {
  const ScenarioConfig s = two_user_scenario();
  const ConicProgram p = build_excs(s);
  const SolverResult r = solve(p);
  REQUIRE(r.status == SolverStatus::Optimal);
  const PrecoderSolution sol = extract_solution(s, FormulationKind::Excs, r);
  double max_defect = 0.0;
  for (double d : sol.rank1_defects) max_defect = std::max(max_defect, d);
  if (max_defect <= 1e-6 && !sol.repaired) {
    // Worst-case SINR margin equals the SOC head slack row by construction.
    const VariableLayout l = VariableLayout::make(FormulationKind::Excs, 4, 2);
    std::vector<HermitianMat> w(2);
    for (int k = 0; k < 2; ++k) w[static_cast<size_t>(k)] = l.unpack(r.x, k);
    for (int k = 0; k < 2; ++k) {
      const double gamma = s.sinr_thresholds[static_cast<size_t>(k)];
      const double eps = s.su_uncertainty[static_cast<size_t>(k)].matrix_radius;
      const HermitianMat h = outer_product(s.su_channels[static_cast<size_t>(k)]);
      HermitianMat m = w[static_cast<size_t>(k)];
      for (int i = 0; i < 2; ++i)
        if (i != k) m -= gamma * w[static_cast<size_t>(i)];
      const double row_margin =
          (h * m).trace().real() - eps * m.norm() - s.noise_power * gamma;
      CHECK(sol.sinr_margins[static_cast<size_t>(k)] ==
            doctest::Approx(row_margin).epsilon(1e-5));
    }
  }
}

TEST_CASE("solution file round trip") {
  const ScenarioConfig s = two_user_scenario();
  const SolverResult r = solve(build_sbcs(s));
  REQUIRE(r.status == SolverStatus::Optimal);
  const PrecoderSolution sol = extract_solution(s, FormulationKind::Sbcs, r);

  FileMeta meta;
  meta.version = "crbeam test";
  meta.scenario_hash = "0123456789abcdef";
  meta.seed = 424242;
  meta.label = "robust";

  std::stringstream ss;
  write_solution(ss, sol, meta);
  FileMeta meta2;
  const PrecoderSolution back = read_solution(ss, &meta2);

  CHECK(meta2.version == meta.version);
  CHECK(meta2.scenario_hash == meta.scenario_hash);
  CHECK(meta2.seed == meta.seed);
  CHECK(meta2.label == meta.label);
  CHECK(back.formulation == sol.formulation);
  CHECK(back.solver_status == sol.solver_status);
  CHECK(back.objective == sol.objective);  // %.17g survives the round trip
  REQUIRE(back.weights.size() == sol.weights.size());
  for (size_t k = 0; k < sol.weights.size(); ++k)
    CHECK((back.weights[k] - sol.weights[k]).norm() == 0.0);
  CHECK(back.rank1_defects == sol.rank1_defects);
  CHECK(back.sinr_margins == sol.sinr_margins);
  CHECK(back.ip_margins == sol.ip_margins);

  std::stringstream truncated("version x\n");
  CHECK_THROWS(read_solution(truncated));
}
