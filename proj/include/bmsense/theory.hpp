#ifndef BMSENSE_THEORY_HPP
#define BMSENSE_THEORY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "bmsense/linalg.hpp"
#include "bmsense/measurement.hpp"
#include "bmsense/objective.hpp"
#include "bmsense/special_functions.hpp"

namespace bmsense {

// ---------------------------------------------------------------------------
// Critical-point inequality chain.
//
// At a second-order critical point X, with R = X^dagger X_*:
//   ||A(XX^* - Z_*)||^2
//     <= <xi, A(XX^* - Z_*)> + 2/(p+2) <y, A((X_* - XR)(X_* - XR)^*)>
//     <= <xi, A(XX^* - Z_*)> + 2 ||A^*(y)||_op / (p+2) ||X_* - XR||_F^2.
// The check reports all three chain quantities; exactness holds only at
// exact critical points, so callers compare slack against a tolerance that
// scales with the certification residuals.
// ---------------------------------------------------------------------------

struct BasicInequalityReport {
  double lhs = 0.0;
  double rhs_mid = 0.0;
  double rhs_final = 0.0;
  double slack = 0.0;  // rhs_final - lhs
  double slack_mid = 0.0;  // rhs_mid - lhs
  double residual_norm = 0.0;  // ||X_* - X R||_F
};

template <class Scalar>
BasicInequalityReport check_basic_inequality(const Problem<Scalar>& problem,
                                             const MatrixX<Scalar>& x) {
  const auto& m = problem.measurements;
  const MatrixX<Scalar> h = x * x.adjoint() - problem.z_star();
  const VectorXd ah = apply_operator(m, h);

  // Least-squares minimizer R = X^dagger X_*.
  const MatrixX<Scalar> r_mat =
      x.completeOrthogonalDecomposition().solve(problem.truth_factor);
  const MatrixX<Scalar> diff = problem.truth_factor - x * r_mat;
  const VectorXd a_diff = apply_operator_gram(m, diff);

  BasicInequalityReport rep;
  rep.lhs = ah.squaredNorm();
  const double noise_term = problem.noise.dot(ah);
  const double p = static_cast<double>(x.cols());
  rep.rhs_mid = noise_term + 2.0 / (p + 2.0) * problem.y.dot(a_diff);
  const double ay_op = operator_norm(apply_adjoint(m, problem.y));
  rep.residual_norm = diff.norm();
  rep.rhs_final =
      noise_term + 2.0 * ay_op / (p + 2.0) * diff.squaredNorm();
  rep.slack = rep.rhs_final - rep.lhs;
  rep.slack_mid = rep.rhs_mid - rep.lhs;
  return rep;
}

// Slack tolerance first-order in the certification residuals.
template <class Scalar>
double basic_inequality_tolerance(const Problem<Scalar>& problem,
                                  const MatrixX<Scalar>& x,
                                  const CriticalityCertificate& cert,
                                  const BasicInequalityReport& rep) {
  // Rough operator norm of A as a map H_d -> R^n via power iteration on
  // S -> A^*(A(S)).
  const auto& m = problem.measurements;
  Rng rng(derive_seed(problem.seed, 0xA0B));
  MatrixX<Scalar> s = rng.gaussian_matrix<Scalar>(m.d, m.d);
  s = ((s + s.adjoint()) / 2.0).eval();
  double norm_sq = 1.0;
  for (int it = 0; it < 12; ++it) {
    s /= s.norm();
    s = apply_adjoint(m, apply_operator(m, s));
    norm_sq = s.norm();
  }
  const double a_probe = std::sqrt(norm_sq);
  return 10.0 * (cert.grad_norm * x.norm() * a_probe +
                 std::abs(std::min(cert.min_curvature, 0.0)) *
                     rep.residual_norm * rep.residual_norm);
}

// ---------------------------------------------------------------------------
// Isometry constants (rank-1 theory).  Probing bounds the true infimum
// constants from above; estimates carry that one-sided flag.
// ---------------------------------------------------------------------------

struct IsometryEstimate {
  double alpha = 0.0;
  double beta = 0.0;
  double delta_L = 0.0;
  double delta_U = 0.0;
  double upper_L = 0.0;    // L with (1/n) A^*A(x x^*) <= L ||x||^2 I
  double m_estimate = 0.0; // fourth-moment parameter from trace-free probes
  int samples_used = 0;
  bool one_sided_upper = true;  // alpha, beta are upper bounds on the infima
};

template <class Scalar>
IsometryEstimate estimate_isometry_rank1(const MeasurementSet<Scalar>& m,
                                         const VectorX<Scalar>& x_star,
                                         int probes, std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("estimate_isometry_rank1: probes >= 1");
  const Eigen::Index d = m.d;
  const double n = static_cast<double>(m.n);
  const double m4 = m.spec.is_gaussian() ? m.spec.m4()
                                         : m.spec.moments().abs4 - 1.0;
  const double x_norm_sq = x_star.squaredNorm();

  IsometryEstimate est;

  // delta_U is exact given the sample: top eigenvalue of (1/n) A^* A(Z_*).
  const VectorXd az = apply_operator_gram(m, MatrixX<Scalar>(x_star));
  const MatrixX<Scalar> aaz = apply_adjoint(m, az) / n;
  const double top = operator_norm(aaz);
  est.delta_U = top / x_norm_sq - (1.0 + m4);
  est.upper_L = top / x_norm_sq;

  // delta_L (and m) from random probes x: worst ratio of
  // (1/n)||A(xx^* - Z_*)||^2 to m4 ||xx^* - Z_*||_F^2 + (||x||^2-||x_*||^2)^2,
  // refined by a local random-direction descent on the worst probe.
  Rng rng(derive_seed(seed, 0x150));
  const MatrixX<Scalar> z_star = x_star * x_star.adjoint();

  auto ratio = [&](const VectorX<Scalar>& x) {
    const MatrixX<Scalar> diff = x * x.adjoint() - z_star;
    const double denom_f = diff.squaredNorm();
    if (denom_f < 1e-12) return std::numeric_limits<double>::infinity();
    const double tr_term = x.squaredNorm() - x_norm_sq;
    const double denom = m4 * denom_f + tr_term * tr_term;
    const VectorXd a_diff = apply_operator(m, diff);
    return a_diff.squaredNorm() / n / denom;
  };
  auto trace_free_ratio = [&](const VectorX<Scalar>& x) {
    // ||x|| = ||x_*|| makes the trace term vanish; ratio estimates m4.
    const MatrixX<Scalar> diff = x * x.adjoint() - z_star;
    const double denom_f = diff.squaredNorm();
    if (denom_f < 1e-12) return m4;
    return apply_operator(m, diff).squaredNorm() / n / denom_f;
  };

  double worst = std::numeric_limits<double>::infinity();
  VectorX<Scalar> worst_x;
  double m_sum = 0.0;
  int m_count = 0;
  for (int k = 0; k < probes; ++k) {
    VectorX<Scalar> x = rng.gaussian_matrix<Scalar>(d, 1);
    // Scan magnitudes around ||x_*|| so both terms get exercised.
    const double scales[] = {0.25, 0.5, 1.0, 2.0, 4.0};
    const double base = std::sqrt(x_norm_sq) / x.norm();
    for (double sc : scales) {
      const VectorX<Scalar> xs = Scalar(sc * base) * x;
      const double rho = ratio(xs);
      if (rho < worst) {
        worst = rho;
        worst_x = xs;
      }
    }
    const VectorX<Scalar> xt = Scalar(base) * x;
    m_sum += trace_free_ratio(xt);
    ++m_count;
  }
  // Local refinement: random perturbations accepted when the ratio drops.
  if (worst_x.size() > 0) {
    double step = 0.2 * worst_x.norm();
    for (int it = 0; it < 200; ++it) {
      const VectorX<Scalar> cand =
          worst_x + Scalar(step) * rng.gaussian_matrix<Scalar>(d, 1);
      const double rho = ratio(cand);
      if (rho < worst) {
        worst = rho;
        worst_x = cand;
      } else {
        step *= 0.95;
      }
    }
  }

  est.delta_L = std::max(0.0, 1.0 - worst);
  est.alpha = (1.0 - est.delta_L) * m4;
  est.beta = 1.0 - est.delta_L;
  est.m_estimate = m_count > 0 ? m_sum / m_count : m4;
  est.samples_used = probes;
  return est;
}

// Landscape condition evaluators (exact arithmetic on the given constants).
inline bool evaluate_rank_one_condition(double m, double delta_L, double delta_U) {
  return m * m + 2.0 * m - 2.0 >
         3.0 * (m * m + 2.0 * m) * delta_L + 2.0 * (m + 1.0) * delta_U;
}

inline bool evaluate_overparam_condition(double alpha, double beta, double upper_L,
                                    double p) {
  if (alpha <= 0.0) return false;
  return (p + 2.0) * (1.0 + beta / (p * beta + alpha)) * alpha > 2.0 * upper_L;
}

// ---------------------------------------------------------------------------
// Concentration of (1/n) A^* A(Z_*) about its Gaussian expectation.
// ---------------------------------------------------------------------------

struct ConcentrationReport {
  double deviation_op = 0.0;
  double bound_form = 0.0;  // (sqrt((d+log n)/n) + (d+log n)(log n)/n) tr Z_*
  double ratio = 0.0;
};

template <class Scalar>
ConcentrationReport check_AZ_concentration(const MeasurementSet<Scalar>& m,
                                           const MatrixX<Scalar>& z_star) {
  if (!m.spec.is_gaussian())
    throw std::invalid_argument(
        "check_AZ_concentration: closed-form expectation requires a Gaussian "
        "ensemble");
  const double n = static_cast<double>(m.n);
  const double d = static_cast<double>(m.d);
  const VectorXd az = apply_operator(m, z_star);
  const MatrixX<Scalar> emp = apply_adjoint(m, az) / n;
  const MatrixX<Scalar> expected =
      expected_operator_gaussian(z_star, m.spec.m4());
  ConcentrationReport rep;
  rep.deviation_op = operator_norm<Scalar>(emp - expected);
  const double dl = d + std::log(n);
  rep.bound_form = (std::sqrt(dl / n) + dl * std::log(n) / n) *
                   Eigen::numext::real(z_star.trace());
  rep.ratio = rep.bound_form > 0.0 ? rep.deviation_op / rep.bound_form : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Dual certificate (Gaussian ensembles).
//
//   lambda_i = (1/n) (alpha - beta sum_k <A_i, E_k> 1{<A_i, E_k> <= gamma}),
//   alpha = (m4g + r m2g) beta, beta = 1/m4g,
// with truncated moments m2g, m4g of |z|^2 for a standard normal z.  Before
// rescaling E Y = P_U^perp; the sampled Y is rescaled by 1/tperp_min_eig
// when that eigenvalue lies in (0, 1), and the certificate is invalid when
// it is <= 0.
// ---------------------------------------------------------------------------

struct DualCertificateScalars {
  double epsilon = 0.0;       // ||P_T(Y)||_F
  double lambda_norm = 0.0;   // ||lambda||
  double tperp_min_eig = 0.0; // after rescale (when applied)
  double rescale_applied = 1.0;
  bool valid = false;
};

template <class Scalar>
struct DualCertificate {
  VectorXd lambda;
  MatrixX<Scalar> y;  // A^*(lambda)
  DualCertificateScalars s;
};

template <class Scalar>
DualCertificate<Scalar> build_gaussian_dual_certificate(
    const MeasurementSet<Scalar>& m, const TangentSpaceBasis<Scalar>& basis,
    double gamma = 10.0) {
  if (!m.spec.is_gaussian())
    throw std::invalid_argument(
        "build_gaussian_dual_certificate: Gaussian ensemble required");
  const Eigen::Index r = basis.rank();
  const double n = static_cast<double>(m.n);

  const TruncatedMoments tm =
      truncated_gaussian_moments(gamma, m.spec.field());
  const double beta = 1.0 / tm.m4_gamma;
  const double alpha = (tm.m4_gamma + static_cast<double>(r) * tm.m2_gamma) * beta;

  DualCertificate<Scalar> cert;
  cert.lambda.resize(m.n);
  // <A_i, E_k> = |<a_i, u_k>|^2 summed over factor blocks.
  MatrixXd overlaps = MatrixXd::Zero(m.n, r);
  for (const auto& f : m.factor_blocks)
    overlaps += (f.adjoint() * basis.u).cwiseAbs2();
  for (Eigen::Index i = 0; i < m.n; ++i) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < r; ++k) {
      const double o = overlaps(i, k);
      if (o <= gamma) acc += o;
    }
    cert.lambda(i) = (alpha - beta * acc) / n;
  }

  cert.y = apply_adjoint(m, cert.lambda);
  const auto [y_t, y_tperp] = project_tangent(cert.y, basis);
  cert.s.epsilon = y_t.norm();
  cert.s.lambda_norm = cert.lambda.norm();

  // Smallest eigenvalue of P_U^perp Y P_U^perp restricted to range(P_U^perp).
  const MatrixX<Scalar> q = basis.complement_basis();
  const MatrixX<Scalar> restricted = q.adjoint() * cert.y * q;
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(restricted,
                                                    Eigen::EigenvaluesOnly);
  double min_eig = es.eigenvalues()(0);

  if (min_eig <= 0.0) {
    cert.s.tperp_min_eig = min_eig;
    cert.s.valid = false;
    return cert;
  }
  if (min_eig < 1.0) {
    const double rescale = 1.0 / min_eig;
    cert.lambda *= rescale;
    cert.y *= rescale;
    cert.s.epsilon *= rescale;
    cert.s.lambda_norm *= rescale;
    cert.s.rescale_applied = rescale;
    min_eig = 1.0;
  }
  cert.s.tperp_min_eig = min_eig;
  cert.s.valid = min_eig >= 1.0 - 1e-9;
  return cert;
}

// ---------------------------------------------------------------------------
// Restricted lower-bound constants (mu_T, L_T), fitted over a probe family
// H = P_T(G) + t W with W PSD in T^perp.  Probing certifies necessity only:
// the fitted pair satisfies the inequality on the probes, not on all of H_d.
// ---------------------------------------------------------------------------

struct RestrictedConditioningEstimate {
  double mu_T = 0.0;
  double L_T = 0.0;
  int probes_used = 0;
};

template <class Scalar>
RestrictedConditioningEstimate estimate_restricted_conditioning(const MeasurementSet<Scalar>& m,
                                         const TangentSpaceBasis<Scalar>& basis,
                                         int probes, std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("estimate_restricted_conditioning: probes >= 1");
  const Eigen::Index d = m.d;
  const double n = static_cast<double>(m.n);
  Rng rng(derive_seed(seed, 0xA55));

  struct ProbeData {
    double a_norm;   // (1/sqrt n) ||A(H)||
    double t_fro;    // ||P_T(H)||_F
    double tp_trace; // tr P_{T^perp}(H)
  };
  std::vector<ProbeData> data;
  const double t_grid[] = {0.0, 0.1, 0.3, 1.0, 3.0};

  const MatrixX<Scalar> q = basis.complement_basis();
  for (int k = 0; k < probes; ++k) {
    MatrixX<Scalar> g = rng.gaussian_matrix<Scalar>(d, d);
    g = ((g + g.adjoint()) / 2.0).eval();
    auto [g_t, g_tperp] = project_tangent(g, basis);
    if (g_t.norm() > 0) g_t /= g_t.norm();

    // Random PSD direction in T^perp (rank varies with the probe index).
    const Eigen::Index max_rank = d - basis.rank();
    const Eigen::Index rank = 1 + (k % std::max<Eigen::Index>(max_rank, 1));
    const MatrixX<Scalar> w_fac =
        q * rng.gaussian_matrix<Scalar>(max_rank, rank);
    MatrixX<Scalar> w = w_fac * w_fac.adjoint();
    const double w_tr = Eigen::numext::real(w.trace());
    if (w_tr > 0) w /= w_tr;

    for (double t : t_grid) {
      const MatrixX<Scalar> h = g_t + Scalar(t) * w;
      ProbeData pd;
      pd.a_norm = apply_operator(m, h).norm() / std::sqrt(n);
      pd.t_fro = g_t.norm();
      pd.tp_trace = t;
      data.push_back(pd);
    }
  }

  // For a given L_T, the largest admissible mu_T over the probe set.
  auto mu_for = [&](double lt) {
    double mu = std::numeric_limits<double>::infinity();
    for (const auto& pd : data) {
      if (pd.t_fro < 1e-12) continue;
      mu = std::min(mu, (pd.a_norm + lt * pd.tp_trace) / pd.t_fro);
    }
    return std::isfinite(mu) ? std::max(mu, 0.0) : 0.0;
  };

  // L_T grid; prefer the smallest L_T whose mu_T is close to the best
  // achievable (diminishing returns beyond that).
  std::vector<double> lt_grid = {0.0};
  for (double lt = 1e-3; lt <= 2.0; lt *= 1.5) lt_grid.push_back(lt);
  const double mu_max = mu_for(lt_grid.back());
  RestrictedConditioningEstimate est;
  est.probes_used = probes;
  for (double lt : lt_grid) {
    const double mu = mu_for(lt);
    if (mu >= 0.95 * mu_max) {
      est.mu_T = mu;
      est.L_T = lt;
      return est;
    }
  }
  est.mu_T = mu_max;
  est.L_T = lt_grid.back();
  return est;
}

// ---------------------------------------------------------------------------
// Landscape verdict: tau threshold and error bound of the dual-certificate
// landscape analysis, plus the Gaussian p-threshold form with its constant
// left symbolic.
// ---------------------------------------------------------------------------

struct LandscapeVerdict {
  double tau = 0.0;
  double p_required = 0.0;  // condition is p > tau
  double error_bound = 0.0; // infinite when p <= tau
  double gauss_threshold_form = 0.0;
  bool condition_rank_one = false;
  bool condition_overparam = false;
  bool applicable = false;
  // Inputs echoed for the reports.
  double mu_T = 0.0, L_T = 0.0, epsilon = 0.0, lambda_norm = 0.0;
  double ay_op = 0.0, axi_op = 0.0, lambda_r = 0.0, trace_z = 0.0;
  double p = 0.0;
};

template <class Scalar>
LandscapeVerdict landscape_verdict(const DualCertificate<Scalar>& cert,
                                   double mu_T, double L_T,
                                   const Problem<Scalar>& problem,
                                   Eigen::Index p) {
  LandscapeVerdict v;
  v.mu_T = mu_T;
  v.L_T = L_T;
  v.epsilon = cert.s.epsilon;
  v.lambda_norm = cert.s.lambda_norm;
  v.lambda_r = problem.lambda_r;
  v.trace_z = problem.trace_z;
  v.p = static_cast<double>(p);

  const double n = static_cast<double>(problem.n());
  const double d = static_cast<double>(problem.d());
  v.ay_op = operator_norm(apply_adjoint(problem.measurements, problem.y));
  v.axi_op =
      operator_norm(apply_adjoint(problem.measurements, problem.noise));

  v.gauss_threshold_form =
      ((1.0 + d * std::log(d) / n) * v.trace_z + v.axi_op / n) / v.lambda_r;

  const double denom = mu_T - L_T * cert.s.epsilon;
  if (denom <= 0.0) {
    v.applicable = false;
    return v;
  }
  v.applicable = true;

  const double sqrt_n_lam = std::sqrt(n) * cert.s.lambda_norm;
  const double c1 = (1.0 + L_T * sqrt_n_lam) / denom;
  v.tau = 2.0 * c1 * c1 * v.ay_op / (n * v.lambda_r) - 2.0;
  v.p_required = v.tau;

  const double r = static_cast<double>(problem.r());
  if (v.p > v.tau) {
    const double c2 = (1.0 + cert.s.epsilon + sqrt_n_lam * (L_T + mu_T)) / denom;
    v.error_bound = (v.p + 2.0) / (v.p - v.tau) * c2 * c2 *
                    std::sqrt(2.0 * r) * v.axi_op / n;
  } else {
    v.error_bound = std::numeric_limits<double>::infinity();
  }
  return v;
}

// ---------------------------------------------------------------------------
// Empirical nuclear-norm lower bound: minimal observed ratio
// (1/n)||A(Z - Z_*)||_1 / ||Z - Z_*||_nuc over random PSD probes Z.
// Upper bound on the true constant.
// ---------------------------------------------------------------------------

template <class Scalar>
double estimate_nuclear_lower_bound(const MeasurementSet<Scalar>& m,
                                    const MatrixX<Scalar>& z_star, int probes,
                                    std::uint64_t seed) {
  if (probes < 1)
    throw std::invalid_argument("estimate_nuclear_lower_bound: probes >= 1");
  const Eigen::Index d = m.d;
  const double n = static_cast<double>(m.n);
  Rng rng(derive_seed(seed, 0x27C));
  const double z_scale = std::max(z_star.norm(), 1.0);

  double min_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < probes; ++k) {
    MatrixX<Scalar> z;
    const int mode = k % 3;
    if (mode == 0) {
      // Wishart of varying rank.
      const Eigen::Index rank = 1 + (k / 3) % d;
      const MatrixX<Scalar> f =
          rng.gaussian_matrix<Scalar>(d, rank, z_scale / std::sqrt(double(d)));
      z = f * f.adjoint();
    } else if (mode == 1) {
      // Perturbation of Z_* staying PSD.
      const MatrixX<Scalar> f = rng.gaussian_matrix<Scalar>(d, 1, 0.3 * z_scale);
      z = z_star + f * f.adjoint();
    } else {
      // Rank-1 spike aligned with a random basis vector.
      const Eigen::Index j = static_cast<Eigen::Index>(rng.raw() % d);
      z = MatrixX<Scalar>::Zero(d, d);
      z(j, j) = z_scale;
    }
    const MatrixX<Scalar> diff = z - z_star;
    const double nuc = matrix_norms<Scalar>(diff).nuclear;
    if (nuc < 1e-12) continue;  // 0/0 guard
    const double ratio = apply_operator(m, diff).template lpNorm<1>() / n / nuc;
    min_ratio = std::min(min_ratio, ratio);
  }
  return min_ratio;
}

}  // namespace bmsense

#endif
