#pragma once

#include <Eigen/Dense>

#include "crbeam/model.hpp"

namespace crbeam {

bool is_hermitian(const HermitianMat& m, double tol = 1e-12);
bool is_symmetric(const Eigen::MatrixXd& m, double tol = 1e-12);

/// [[Re H, -Im H], [Im H, Re H]]: real symmetric 2Nx2N with the eigenvalues
/// of H doubled in multiplicity. H >= 0 iff embed_hermitian(H) >= 0.
/// Throws std::invalid_argument when H is not Hermitian to 1e-12.
Eigen::MatrixXd embed_hermitian(const HermitianMat& h);

/// Eigenvalues ascending, vectors as matching orthonormal columns.
struct EigenSym {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Cyclic Jacobi sweep eigensolver for dense symmetric matrices (intended
/// range: up to 64x64). Throws std::invalid_argument when S is not
/// symmetric to 1e-12.
EigenSym jacobi_eigensym(const Eigen::MatrixXd& s);

/// Eigenvalues of a Hermitian matrix, ascending, via the real embedding.
Eigen::VectorXd hermitian_eigenvalues(const HermitianMat& h);

/// Scaled symmetric vectorization: lower triangle, column major, off-diagonal
/// entries times sqrt(2), so dot(svec(X), svec(Y)) = Tr(XY) and
/// ||svec(X)|| = ||X||_F.
int svec_len(int n);
Eigen::VectorXd svec(const Eigen::MatrixXd& s);
Eigen::MatrixXd smat(const Eigen::VectorXd& v);

/// Euclidean projection of an svec'd block onto the PSD cone (negative
/// eigenvalues clipped). In place.
void psd_project(Eigen::Ref<Eigen::VectorXd> block);

}  // namespace crbeam
