#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "crbeam/conic.hpp"
#include "crbeam/hermitian.hpp"

using namespace crbeam;

namespace {

Eigen::VectorXd random_vec(int n, std::mt19937_64& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 4.0 - 2.0;
  return v;
}

}  // namespace

TEST_CASE("cone projections are idempotent and 1-Lipschitz") {
  const std::vector<ConeSeg> cones = {
      {ConeKind::Zero, 2}, {ConeKind::NonNeg, 3}, {ConeKind::Soc, 4}, {ConeKind::Psd, 3}};
  int rows = 0;
  for (const auto& seg : cones) rows += seg.rows();
  std::mt19937_64 rng(61);
  for (bool dual : {false, true}) {
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd a = random_vec(rows, rng);
      Eigen::VectorXd b = random_vec(rows, rng);
      Eigen::VectorXd pa = a, pb = b;
      project_cone_product(cones, pa, dual);
      project_cone_product(cones, pb, dual);
      Eigen::VectorXd paa = pa;
      project_cone_product(cones, paa, dual);
      CHECK((paa - pa).norm() <= 1e-10);
      CHECK((pa - pb).norm() <= (a - b).norm() + 1e-10);
    }
  }
}

TEST_CASE("soc projection cases") {
  const std::vector<ConeSeg> soc = {{ConeKind::Soc, 3}};
  Eigen::VectorXd inside(3);
  inside << 5.0, 3.0, 4.0;
  Eigen::VectorXd p = inside;
  project_cone_product(soc, p);
  CHECK((p - inside).norm() == 0.0);

  Eigen::VectorXd polar(3);
  polar << -5.0, 3.0, -4.0;
  p = polar;
  project_cone_product(soc, p);
  CHECK(p.norm() == 0.0);

  Eigen::VectorXd outside(3);
  outside << 0.0, 3.0, 4.0;
  p = outside;
  project_cone_product(soc, p);
  CHECK(p(0) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(p.tail(2).norm() == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("program validate flags inconsistencies") {
  ConicProgram p;
  p.num_vars = 2;
  p.cones = {{ConeKind::NonNeg, 1}};
  p.c = Eigen::VectorXd::Ones(2);
  p.b = Eigen::VectorXd::Zero(1);
  p.add_entry(0, 0, 1.0);
  // Variable 1 untouched.
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.add_entry(0, 1, -1.0);
  CHECK_NOTHROW(p.validate());
  p.b = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("program dump/load round trip") {
  ConicProgram p;
  p.num_vars = 3;
  p.cones = {{ConeKind::Zero, 1}, {ConeKind::NonNeg, 2}, {ConeKind::Soc, 3}, {ConeKind::Psd, 2}};
  p.c = Eigen::Vector3d(1.0, -0.5, 1e-3);
  p.b = Eigen::VectorXd::Zero(p.num_rows());
  p.b(0) = 3.0;
  p.b(1) = -1.25;
  p.b(6) = std::sqrt(2.0);
  p.add_entry(0, 0, 1.0);
  p.add_entry(1, 1, -2.0);
  p.add_entry(2, 2, 0.125);
  p.add_entry(3, 0, -1.0);
  p.add_entry(4, 1, -1.0);
  p.add_entry(5, 2, -1.0);
  p.add_entry(6, 0, -0.7071067811865476);
  p.add_entry(7, 1, 1.0 / 3.0);
  p.add_entry(8, 2, -1.0);
  p.validate();

  std::stringstream ss;
  dump_program(p, ss);
  const ConicProgram q = load_program(ss);
  CHECK(q.num_vars == p.num_vars);
  REQUIRE(q.cones.size() == p.cones.size());
  for (size_t i = 0; i < p.cones.size(); ++i) {
    CHECK(q.cones[i].kind == p.cones[i].kind);
    CHECK(q.cones[i].dim == p.cones[i].dim);
  }
  CHECK((q.b - p.b).norm() == 0.0);
  CHECK((q.c - p.c).norm() == 0.0);
  CHECK((Eigen::MatrixXd(q.a_matrix()) - Eigen::MatrixXd(p.a_matrix())).norm() == 0.0);
}

TEST_CASE("load_program rejects malformed input") {
  std::stringstream bad1("nonsense\n");
  CHECK_THROWS(load_program(bad1));
  std::stringstream bad2("conicprogram 1\ndims 1 1\ncone nonneg 2\nA 0 0 1\nend\n");
  CHECK_THROWS(load_program(bad2));  // cone rows disagree with dims
  std::stringstream bad3("conicprogram 1\ndims 1 1\ncone nonneg 1\nA 0 5 1\nend\n");
  CHECK_THROWS(load_program(bad3));  // entry out of range
}

TEST_CASE("kkt_report on the zero program and perturbation growth") {
  ConicProgram p;
  p.num_vars = 0;
  p.c = Eigen::VectorXd(0);
  p.b = Eigen::VectorXd(0);
  SolverResult r;
  r.x = Eigen::VectorXd(0);
  r.y = Eigen::VectorXd(0);
  r.s = Eigen::VectorXd(0);
  const ResidualTriple t = kkt_report(p, r);
  CHECK(t.primal == 0.0);
  CHECK(t.dual == 0.0);
  CHECK(t.gap == 0.0);

  // One-variable LP; perturbing x strictly increases the primal residual.
  ConicProgram lp;
  lp.num_vars = 1;
  lp.cones = {{ConeKind::NonNeg, 1}};
  lp.c = Eigen::VectorXd::Constant(1, -1.0);
  lp.b = Eigen::VectorXd::Constant(1, 2.0);
  lp.add_entry(0, 0, 1.0);
  SolverResult res = solve(lp);
  REQUIRE(res.status == SolverStatus::Optimal);
  const double base = kkt_report(lp, res).primal;
  res.x(0) += 1e-3;
  CHECK(kkt_report(lp, res).primal > base);
}
