#ifndef BMSENSE_LINALG_HPP
#define BMSENSE_LINALG_HPP

#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "bmsense/scalar.hpp"

namespace bmsense {

// ---------------------------------------------------------------------------
// Complex-to-real embedding.
//
// A Hermitian A = B + iC maps to the symmetric 2d x 2d matrix
//   [B  C^T]
//   [C  B  ]
// and a factor X = U + iV maps to [U; V].  The embedding preserves the
// pairing <A, XX^*> and positive semidefiniteness, and commutes with
// J = [0 -I; I 0] (multiplication by i).
// ---------------------------------------------------------------------------

inline MatrixXd embed_complex_to_real(const MatrixXc& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("embed: not square");
  const Eigen::Index d = a.rows();
  MatrixXd b = a.real();
  MatrixXd c = a.imag();
  MatrixXd out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = b;
  out.topRightCorner(d, d) = c.transpose();
  out.bottomLeftCorner(d, d) = c;
  out.bottomRightCorner(d, d) = b;
  return out;
}

inline MatrixXd embed_factor(const MatrixXc& x) {
  MatrixXd out(2 * x.rows(), x.cols());
  out.topRows(x.rows()) = x.real();
  out.bottomRows(x.rows()) = x.imag();
  return out;
}

inline MatrixXc unembed_factor(const MatrixXd& xt) {
  if (xt.rows() % 2 != 0) throw std::invalid_argument("unembed: odd rows");
  const Eigen::Index d = xt.rows() / 2;
  return xt.topRows(d) + Complex(0, 1) * xt.bottomRows(d);
}

// ---------------------------------------------------------------------------
// Tangent space of rank-r PSD matrices at Z_* = U Lambda U^*.
// ---------------------------------------------------------------------------

template <class Scalar>
struct TangentSpaceBasis {
  MatrixX<Scalar> u;       // d x r, orthonormal columns
  VectorXd eigenvalues;    // r positive eigenvalues, descending

  Eigen::Index dim() const { return u.rows(); }
  Eigen::Index rank() const { return u.cols(); }

  MatrixX<Scalar> projector_range() const { return u * u.adjoint(); }
  MatrixX<Scalar> projector_complement() const {
    return MatrixX<Scalar>::Identity(dim(), dim()) - projector_range();
  }
  // Orthonormal basis of range(Z_*)^perp, d x (d - r).
  MatrixX<Scalar> complement_basis() const {
    Eigen::HouseholderQR<MatrixX<Scalar>> qr(u);
    MatrixX<Scalar> q = qr.householderQ();
    return q.rightCols(dim() - rank());
  }
};

// Builds the tangent basis from a Hermitian PSD Z_* of (numerical) rank r.
template <class Scalar>
TangentSpaceBasis<Scalar> tangent_basis(const MatrixX<Scalar>& z_star,
                                        Eigen::Index r) {
  if (z_star.rows() != z_star.cols())
    throw std::invalid_argument("tangent_basis: not square");
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(z_star);
  const Eigen::Index d = z_star.rows();
  TangentSpaceBasis<Scalar> basis;
  basis.u.resize(d, r);
  basis.eigenvalues.resize(r);
  // Eigen sorts ascending; take the top r pairs in descending order.
  for (Eigen::Index k = 0; k < r; ++k) {
    basis.u.col(k) = es.eigenvectors().col(d - 1 - k);
    basis.eigenvalues(k) = es.eigenvalues()(d - 1 - k);
  }
  return basis;
}

// P_T(S) = S P_U + P_U S P_U^perp,  P_{T^perp}(S) = P_U^perp S P_U^perp.
template <class Scalar>
std::pair<MatrixX<Scalar>, MatrixX<Scalar>> project_tangent(
    const MatrixX<Scalar>& s, const TangentSpaceBasis<Scalar>& basis) {
  if (s.rows() != basis.dim() || s.cols() != basis.dim())
    throw std::invalid_argument("project_tangent: dimension mismatch");
  const MatrixX<Scalar> pu = basis.projector_range();
  const MatrixX<Scalar> pperp = basis.projector_complement();
  MatrixX<Scalar> s_tperp = pperp * s * pperp;
  MatrixX<Scalar> s_t = s - s_tperp;
  return {std::move(s_t), std::move(s_tperp)};
}

// ---------------------------------------------------------------------------
// Error metrics and norms.
// ---------------------------------------------------------------------------

// min over unit-modulus s of ||x_hat - s x_star||.  The phase set is {+-1}
// over the reals and the unit circle over the complexes; both give
// dist^2 = ||x_hat||^2 + ||x_star||^2 - 2 |<x_hat, x_star>|.
template <class Scalar>
double phase_aligned_distance(const VectorX<Scalar>& x_hat,
                              const VectorX<Scalar>& x_star) {
  if (x_hat.size() != x_star.size())
    throw std::invalid_argument("phase_aligned_distance: dimension mismatch");
  const double cross = Eigen::numext::abs(x_hat.dot(x_star));
  const double sq = x_hat.squaredNorm() + x_star.squaredNorm() - 2.0 * cross;
  return std::sqrt(std::max(sq, 0.0));
}

// Best rank-1 PSD approximation of a Hermitian Z: sqrt(max(lambda_1, 0)) u_1.
template <class Scalar>
VectorX<Scalar> rank_one_truncation(const MatrixX<Scalar>& z) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(z);
  const Eigen::Index top = z.rows() - 1;
  const double lam = std::max(es.eigenvalues()(top), 0.0);
  return std::sqrt(lam) * es.eigenvectors().col(top);
}

struct MatrixNorms {
  double frobenius;
  double operator_norm;  // max |eigenvalue|
  double nuclear;        // sum |eigenvalue|
  double trace;
};

template <class Scalar>
MatrixNorms matrix_norms(const MatrixX<Scalar>& s) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(s, Eigen::EigenvaluesOnly);
  const VectorXd ev = es.eigenvalues();
  MatrixNorms out;
  out.frobenius = s.norm();
  out.operator_norm = ev.cwiseAbs().maxCoeff();
  out.nuclear = ev.cwiseAbs().sum();
  out.trace = Eigen::numext::real(s.trace());
  return out;
}

template <class Scalar>
double operator_norm(const MatrixX<Scalar>& s) {
  return matrix_norms(s).operator_norm;
}

}  // namespace bmsense

#endif
