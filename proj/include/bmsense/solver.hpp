#ifndef BMSENSE_SOLVER_HPP
#define BMSENSE_SOLVER_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "bmsense/linalg.hpp"
#include "bmsense/objective.hpp"

namespace bmsense {

struct SolverConfig {
  int max_iters = 500;
  double grad_tol = 1e-8;       // relative to objective scale
  double curvature_tol = 1e-6;  // relative to objective scale
  double initial_trust_radius = 1.0;
  double max_trust_radius = 1e3;
  int cg_max_iters = 250;
  int cert_max_probes = 200;
  std::uint64_t seed = 0;
  bool explicit_init_scale = false;
  double init_scale = 0.0;  // per-entry stddev when explicit_init_scale
};

enum class SolveStatus { Converged, MaxItersReached, Stalled };

struct SolveErrors {
  double frobenius = 0.0;      // ||X X^* - Z_*||_F
  double nuclear = 0.0;        // ||X X^* - Z_*||_*
  double phase_aligned = 0.0;  // r = 1 only; 0 otherwise
};

template <class Scalar>
struct SolveResult {
  MatrixX<Scalar> x_final;
  CriticalityCertificate certificate;
  int iterations = 0;
  std::vector<double> f_history;
  SolveErrors errors;
  SolveStatus status = SolveStatus::Converged;
  double final_f = 0.0;
};

// Random initialization with per-entry variance t_hat / (d p), where
// t_hat = mean(y) estimates tr Z_* (E <a a^*, Z> = tr Z for unit-variance
// entries).  So E ||X_0||_F^2 matches the scale of the ground truth.
template <class Scalar>
MatrixX<Scalar> initialize(const Problem<Scalar>& problem, Eigen::Index p,
                           const SolverConfig& config) {
  const Eigen::Index d = problem.d();
  Rng rng(derive_seed(config.seed, 0x1417));
  double stddev;
  if (config.explicit_init_scale) {
    stddev = config.init_scale;
  } else {
    const double t_hat = std::max(problem.y.mean(), 1e-12);
    stddev = std::sqrt(t_hat / static_cast<double>(d * p));
  }
  return rng.gaussian_matrix<Scalar>(d, p, stddev);
}

namespace detail {

// Steihaug truncated CG for min <g,s> + 0.5 <H s, s> subject to ||s|| <= Delta,
// in the realified factor space (re_inner as the inner product).
template <class Scalar>
MatrixX<Scalar> steihaug_cg(
    const std::function<MatrixX<Scalar>(const MatrixX<Scalar>&)>& hvp,
    const MatrixX<Scalar>& g, double radius, int max_iters, double tol) {
  MatrixX<Scalar> s = MatrixX<Scalar>::Zero(g.rows(), g.cols());
  MatrixX<Scalar> r = -g;
  MatrixX<Scalar> p = r;
  double rr = re_inner(r, r);
  const double rr0 = rr;
  if (rr0 == 0.0) return s;

  auto to_boundary = [&](const MatrixX<Scalar>& base,
                         const MatrixX<Scalar>& dir) {
    // Positive root of ||base + t dir|| = radius.
    const double aa = re_inner(dir, dir);
    const double bb = 2.0 * re_inner(base, dir);
    const double cc = re_inner(base, base) - radius * radius;
    const double disc = std::max(bb * bb - 4.0 * aa * cc, 0.0);
    return (-bb + std::sqrt(disc)) / (2.0 * aa);
  };

  for (int k = 0; k < max_iters; ++k) {
    const MatrixX<Scalar> hp = hvp(p);
    const double php = re_inner(p, hp);
    if (php <= 0.0) {
      // Negative curvature: follow p to the boundary.
      return s + Scalar(to_boundary(s, p)) * p;
    }
    const double alpha = rr / php;
    const MatrixX<Scalar> s_next = s + Scalar(alpha) * p;
    if (s_next.norm() >= radius) {
      return s + Scalar(to_boundary(s, p)) * p;
    }
    s = s_next;
    r -= Scalar(alpha) * hp;
    const double rr_next = re_inner(r, r);
    if (rr_next <= tol * tol * rr0) return s;
    p = r + Scalar(rr_next / rr) * p;
    rr = rr_next;
  }
  return s;
}

}  // namespace detail

template <class Scalar>
void fill_errors(const Problem<Scalar>& problem, SolveResult<Scalar>& result) {
  const MatrixX<Scalar> h =
      result.x_final * result.x_final.adjoint() - problem.z_star();
  const MatrixNorms norms = matrix_norms(h);
  result.errors.frobenius = norms.frobenius;
  result.errors.nuclear = norms.nuclear;
  if (problem.r() == 1) {
    const VectorX<Scalar> x_hat =
        rank_one_truncation<Scalar>(result.x_final * result.x_final.adjoint());
    result.errors.phase_aligned =
        phase_aligned_distance<Scalar>(x_hat, problem.truth_factor.col(0));
  }
}

// Trust-region solver over the (realified) factor space.  Accepted steps
// strictly decrease f; when the gradient is below tolerance but the Hessian
// has curvature below -eps_H * scale, a negative-curvature step along the
// Lanczos Ritz direction is taken instead.
template <class Scalar>
SolveResult<Scalar> solve(const Problem<Scalar>& problem, Eigen::Index p,
                          const SolverConfig& config) {
  Objective<Scalar> obj(problem, p);
  const double scale = obj.scale();
  const double eps_g = config.grad_tol * scale;

  MatrixX<Scalar> x = initialize(problem, p, config);
  double f = obj.value(x);
  double radius = config.initial_trust_radius;

  SolveResult<Scalar> result;
  result.f_history.push_back(f);
  result.status = SolveStatus::MaxItersReached;

  int iter = 0;
  for (; iter < config.max_iters; ++iter) {
    if (!std::isfinite(f)) throw std::runtime_error("solve: non-finite objective");
    const VectorXd c = obj.residual(x);
    const MatrixX<Scalar> g = obj.gradient(x, c);
    const double gnorm = g.norm();

    if (gnorm <= eps_g) {
      MatrixX<Scalar> ritz;
      CriticalityCertificate cert = obj.certify_second_order(
          x, config.grad_tol, config.curvature_tol, config.cert_max_probes,
          derive_seed(config.seed, 0xCE27, static_cast<std::uint64_t>(iter)),
          &ritz);
      if (obj.certificate_passes(cert, config.grad_tol, config.curvature_tol)) {
        result.certificate = cert;
        result.status = SolveStatus::Converged;
        break;
      }
      // Saddle escape: step of length = trust radius along the Ritz
      // direction, signed to decrease f.
      bool escaped = false;
      while (radius > 1e-14) {
        double best_f = f;
        MatrixX<Scalar> best_x;
        for (const double sign : {1.0, -1.0}) {
          const MatrixX<Scalar> cand = x + Scalar(sign * radius) * ritz;
          const double fc = obj.value(cand);
          if (fc < best_f) {
            best_f = fc;
            best_x = cand;
          }
        }
        if (best_f < f) {
          x = best_x;
          f = best_f;
          result.f_history.push_back(f);
          escaped = true;
          break;
        }
        radius *= 0.25;
      }
      if (!escaped) {
        // Cannot make progress along the certified negative direction.
        result.certificate = cert;
        result.status = SolveStatus::Stalled;
        break;
      }
      continue;
    }

    auto hvp = [&](const MatrixX<Scalar>& v) {
      return obj.hessian_vector_product(x, v, c);
    };
    const double cg_tol = std::min(0.5, std::sqrt(gnorm / scale));
    const MatrixX<Scalar> s = detail::steihaug_cg<Scalar>(
        hvp, g, radius, config.cg_max_iters, cg_tol);

    const double pred = -(re_inner(g, s) + 0.5 * re_inner(hvp(s), s));
    const MatrixX<Scalar> x_next = x + s;
    const double f_next = obj.value(x_next);
    const double actual = f - f_next;
    const double rho = pred > 0.0 ? actual / pred : -1.0;

    if (rho > 0.1 && actual > 0.0) {
      const double snorm = s.norm();
      x = x_next;
      f = f_next;
      result.f_history.push_back(f);
      if (rho > 0.75 && snorm >= 0.99 * radius)
        radius = std::min(2.0 * radius, config.max_trust_radius);
    } else {
      radius *= 0.25;
      if (radius < 1e-14) {
        // Trust region collapsed; certify whatever we have.
        result.certificate = obj.certify_second_order(
            x, config.grad_tol, config.curvature_tol, config.cert_max_probes,
            derive_seed(config.seed, 0xCE27, static_cast<std::uint64_t>(iter)));
        result.status = obj.certificate_passes(result.certificate,
                                               config.grad_tol,
                                               config.curvature_tol)
                            ? SolveStatus::Converged
                            : SolveStatus::Stalled;
        break;
      }
    }
  }

  if (result.status == SolveStatus::MaxItersReached) {
    result.certificate = obj.certify_second_order(
        x, config.grad_tol, config.curvature_tol, config.cert_max_probes,
        derive_seed(config.seed, 0xCE28));
  }
  result.x_final = x;
  result.final_f = f;
  result.iterations = iter;
  fill_errors(problem, result);
  return result;
}

// Shared-instance protocol: one problem instance per trial, solved once per rank
// parameter with an initialization stream derived from (master, trial, p).
template <class Scalar>
std::vector<SolveResult<Scalar>> solve_batch(
    const std::function<Problem<Scalar>(int trial)>& problem_generator,
    const std::vector<int>& p_list, int trials, const SolverConfig& config) {
  if (trials < 1) throw std::invalid_argument("solve_batch: trials >= 1");
  std::vector<SolveResult<Scalar>> results;
  results.reserve(static_cast<size_t>(trials) * p_list.size());
  for (int trial = 0; trial < trials; ++trial) {
    const Problem<Scalar> problem = problem_generator(trial);
    for (int p : p_list) {
      SolverConfig cell = config;
      cell.seed = derive_seed(config.seed, 0xBA7C,
                              static_cast<std::uint64_t>(trial),
                              static_cast<std::uint64_t>(p));
      results.push_back(solve(problem, p, cell));
    }
  }
  return results;
}

}  // namespace bmsense

#endif
