#include "crbeam/hermitian.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace crbeam {

bool is_hermitian(const HermitianMat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_symmetric(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

Eigen::MatrixXd embed_hermitian(const HermitianMat& h) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (!is_hermitian(h, 1e-12 * scale))
    throw std::invalid_argument("embed_hermitian: input is not Hermitian");
  const int n = static_cast<int>(h.rows());
  Eigen::MatrixXd e(2 * n, 2 * n);
  const Eigen::MatrixXd re = h.real();
  const Eigen::MatrixXd im = h.imag();
  e.topLeftCorner(n, n) = re;
  e.topRightCorner(n, n) = -im;
  e.bottomLeftCorner(n, n) = im;
  e.bottomRightCorner(n, n) = re;
  return e;
}

EigenSym jacobi_eigensym(const Eigen::MatrixXd& s) {
  const int n = static_cast<int>(s.rows());
  if (n == 0) return {Eigen::VectorXd(), Eigen::MatrixXd()};
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if (!is_symmetric(s, 1e-12 * scale))
    throw std::invalid_argument("jacobi_eigensym: input is not symmetric");

  Eigen::MatrixXd a = s;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  auto off_norm2 = [&a, n]() {
    double sum = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) sum += a(p, q) * a(p, q);
    return sum;
  };

  const double fro2 = a.squaredNorm();
  const double stop = 1e-28 * std::max(fro2, 1e-300);
  const int max_sweeps = 64;

  for (int sweep = 0; sweep < max_sweeps && off_norm2() > stop; ++sweep) {
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double sgn = theta >= 0.0 ? 1.0 : -1.0;
        const double t = sgn / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        const double tau = sn / (1.0 + c);

        const double app = a(p, p);
        const double aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = a(r, p);
            const double arq = a(r, q);
            a(r, p) = a(p, r) = arp - sn * (arq + tau * arp);
            a(r, q) = a(q, r) = arq + sn * (arp - tau * arq);
          }
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = vrp - sn * (vrq + tau * vrp);
          v(r, q) = vrq + sn * (vrp - tau * vrq);
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&a](int i, int j) { return a(i, i) < a(j, j); });

  EigenSym out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

Eigen::VectorXd hermitian_eigenvalues(const HermitianMat& h) {
  const int n = static_cast<int>(h.rows());
  const EigenSym es = jacobi_eigensym(embed_hermitian(h));
  // Each eigenvalue of h appears twice in the embedding; take every other.
  Eigen::VectorXd vals(n);
  for (int i = 0; i < n; ++i) vals(i) = es.values(2 * i);
  return vals;
}

int svec_len(int n) { return n * (n + 1) / 2; }

Eigen::VectorXd svec(const Eigen::MatrixXd& s) {
  const int n = static_cast<int>(s.rows());
  const double rt2 = std::sqrt(2.0);
  Eigen::VectorXd v(svec_len(n));
  int k = 0;
  for (int j = 0; j < n; ++j) {
    v(k++) = s(j, j);
    for (int i = j + 1; i < n; ++i) v(k++) = rt2 * s(i, j);
  }
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v) {
  const int len = static_cast<int>(v.size());
  const int n = static_cast<int>(std::round((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
  if (svec_len(n) != len) throw std::invalid_argument("smat: length is not triangular");
  const double inv_rt2 = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd s(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    s(j, j) = v(k++);
    for (int i = j + 1; i < n; ++i) {
      const double x = inv_rt2 * v(k++);
      s(i, j) = x;
      s(j, i) = x;
    }
  }
  return s;
}

void psd_project(Eigen::Ref<Eigen::VectorXd> block) {
  Eigen::MatrixXd s = smat(block);
  const int n = static_cast<int>(s.rows());
  EigenSym es = jacobi_eigensym(s);
  Eigen::MatrixXd rebuilt = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double lam = es.values(i);
    if (lam > 0.0) rebuilt.noalias() += lam * es.vectors.col(i) * es.vectors.col(i).transpose();
  }
  block = svec(rebuilt);
}

}  // namespace crbeam
