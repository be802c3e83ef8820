#ifndef BMSENSE_OBJECTIVE_HPP
#define BMSENSE_OBJECTIVE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "bmsense/measurement.hpp"
#include "bmsense/scalar.hpp"

namespace bmsense {

// f_p(X) = ||y - A(X X^*)||^2 with the conventional constants kept:
// gradient 4 A^*(c(X)) X for residual c(X) = A(X X^*) - y, and Hessian
// quadratic form 4 <A^*(c), Xd Xd^*> + 2 ||A(X Xd^* + Xd X^*)||^2.
//
// In the complex case the gradient encodes the real-pair gradient: the
// directional derivative along Xd is re_inner(grad, Xd).

struct CriticalityCertificate {
  double grad_norm = 0.0;
  double min_curvature = 0.0;  // smallest Ritz value of the Hessian form
  int probes_used = 0;
  bool converged = false;
};

template <class Scalar>
class Objective {
 public:
  explicit Objective(const Problem<Scalar>& problem, Eigen::Index p)
      : problem_(&problem), p_(p) {
    if (p < 1) throw std::invalid_argument("Objective: p >= 1");
  }

  const Problem<Scalar>& problem() const { return *problem_; }
  Eigen::Index p() const { return p_; }
  Eigen::Index d() const { return problem_->d(); }

  // Real dimension of the variable space (2dp complex, dp real).
  Eigen::Index real_dim() const {
    return d() * p_ * (is_complex_v<Scalar> ? 2 : 1);
  }

  VectorXd residual(const MatrixX<Scalar>& x) const {
    check(x);
    return apply_operator_gram(problem_->measurements, x) - problem_->y;
  }

  double value(const MatrixX<Scalar>& x) const {
    return residual(x).squaredNorm();
  }

  MatrixX<Scalar> gradient(const MatrixX<Scalar>& x) const {
    return 4.0 * apply_adjoint_times(problem_->measurements, residual(x), x);
  }

  MatrixX<Scalar> gradient(const MatrixX<Scalar>& x,
                           const VectorXd& cached_residual) const {
    return 4.0 *
           apply_adjoint_times(problem_->measurements, cached_residual, x);
  }

  // HVP(Xd) = 4 A^*(w) X + 4 A^*(c) Xd with w = A(X Xd^* + Xd X^*).
  MatrixX<Scalar> hessian_vector_product(const MatrixX<Scalar>& x,
                                         const MatrixX<Scalar>& xdot,
                                         const VectorXd& cached_residual) const {
    check(x);
    check(xdot);
    const auto& m = problem_->measurements;
    VectorXd w = VectorXd::Zero(m.n);
    for (const auto& f : m.factor_blocks) {
      const MatrixX<Scalar> bx = f.adjoint() * x;
      const MatrixX<Scalar> bd = f.adjoint() * xdot;
      w += 2.0 * bx.conjugate().cwiseProduct(bd).rowwise().sum().real();
    }
    return 4.0 * apply_adjoint_times(m, w, x) +
           4.0 * apply_adjoint_times(m, cached_residual, xdot);
  }

  MatrixX<Scalar> hessian_vector_product(const MatrixX<Scalar>& x,
                                         const MatrixX<Scalar>& xdot) const {
    return hessian_vector_product(x, xdot, residual(x));
  }

  // max(1, ||A^*(y)||_op); the scale against which criticality tolerances
  // are measured.
  double scale() const {
    if (scale_ < 0.0) {
      const MatrixX<Scalar> ay =
          apply_adjoint(problem_->measurements, problem_->y);
      scale_ = std::max(1.0, operator_norm(ay));
    }
    return scale_;
  }

  CriticalityCertificate certify_second_order(const MatrixX<Scalar>& x,
                                              double eps_g, double eps_H,
                                              int max_probes,
                                              std::uint64_t seed,
                                              MatrixX<Scalar>* ritz_vector =
                                                  nullptr) const;

  bool certificate_passes(const CriticalityCertificate& cert, double eps_g,
                          double eps_H) const {
    const double s = scale();
    return cert.grad_norm <= eps_g * s && cert.min_curvature >= -eps_H * s;
  }

 private:
  void check(const MatrixX<Scalar>& x) const {
    if (x.rows() != d() || x.cols() != p_)
      throw std::invalid_argument("Objective: factor dimension mismatch");
  }

  const Problem<Scalar>* problem_;
  Eigen::Index p_;
  mutable double scale_ = -1.0;
};

// Lanczos iteration on the Hessian quadratic form over the realified factor
// space, with full reorthogonalization.  Probe matrices play the role of
// basis vectors; re_inner is the inner product.  Returns the smallest Ritz
// value (and optionally the corresponding Ritz vector for saddle escape).
template <class Scalar>
CriticalityCertificate Objective<Scalar>::certify_second_order(
    const MatrixX<Scalar>& x, double eps_g, double eps_H, int max_probes,
    std::uint64_t seed, MatrixX<Scalar>* ritz_vector) const {
  if (!x.allFinite())
    throw std::invalid_argument("certify_second_order: non-finite X");

  CriticalityCertificate cert;
  const VectorXd c = residual(x);
  cert.grad_norm = gradient(x, c).norm();

  const Eigen::Index dim = real_dim();
  const int iters = static_cast<int>(
      std::min<Eigen::Index>({2 * d() * p_, max_probes, dim}));

  Rng rng(derive_seed(seed, 0x1a2));
  std::vector<MatrixX<Scalar>> basis;
  std::vector<double> alpha, beta;
  MatrixX<Scalar> q = rng.gaussian_matrix<Scalar>(d(), p_);
  q /= q.norm();

  double prev_ritz = std::numeric_limits<double>::infinity();
  int stable = 0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> tri_es;

  for (int k = 0; k < iters; ++k) {
    basis.push_back(q);
    MatrixX<Scalar> hq = hessian_vector_product(x, q, c);
    alpha.push_back(re_inner(q, hq));
    // Full reorthogonalization keeps the small Ritz values trustworthy.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) hq -= Scalar(re_inner(b, hq)) * b;
    const double bnorm = hq.norm();

    // Tridiagonal Ritz values so far.
    const int m = static_cast<int>(alpha.size());
    MatrixXd t = MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    tri_es.compute(t);
    const double ritz = tri_es.eigenvalues()(0);

    cert.probes_used = m;
    cert.min_curvature = ritz;
    stable = std::abs(ritz - prev_ritz) < 1e-9 * std::max(1.0, std::abs(ritz))
                 ? stable + 1
                 : 0;
    prev_ritz = ritz;
    if (stable >= 5 || bnorm < 1e-12) {
      cert.converged = true;
      break;
    }
    beta.push_back(bnorm);
    q = hq / bnorm;
  }

  if (ritz_vector != nullptr && !basis.empty()) {
    const VectorXd coeffs = tri_es.eigenvectors().col(0);
    MatrixX<Scalar> v = MatrixX<Scalar>::Zero(d(), p_);
    for (size_t i = 0; i < basis.size(); ++i)
      v += Scalar(coeffs(static_cast<Eigen::Index>(i))) * basis[i];
    v /= v.norm();
    *ritz_vector = v;
  }
  (void)eps_g;
  (void)eps_H;
  return cert;
}

}  // namespace bmsense

#endif
