#include <doctest.h>

#include <Eigen/Dense>

#include "bmsense/solver.hpp"
#include "bmsense/theory.hpp"

using namespace bmsense;

namespace {

template <class Scalar>
Problem<Scalar> gaussian_problem(Eigen::Index d, Eigen::Index r,
                                 Eigen::Index n, std::uint64_t seed,
                                 double sigma = 0.0) {
  const EnsembleSpec spec{is_complex_v<Scalar> ? EnsembleKind::ComplexGaussian
                                               : EnsembleKind::RealGaussian};
  return make_problem<Scalar>(spec, d, r, n, seed, TruthKind::RandomGaussian,
                              sigma);
}

}  // namespace

TEST_CASE("regularized incomplete gamma against closed forms") {
  // P(1, x) = 1 - e^{-x}; P(1/2, x) = erf(sqrt(x)).
  for (double x : {0.1, 0.5, 1.0, 3.0, 10.0, 30.0}) {
    CHECK(regularized_gamma_p(1.0, x) ==
          doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
    CHECK(regularized_gamma_p(0.5, x) ==
          doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
  }
  CHECK(regularized_gamma_p(2.5, 0.0) == 0.0);
  CHECK(regularized_gamma_p(2.5, 1e3) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(regularized_gamma_p(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("truncated moments match analytic integrals") {
  SUBCASE("complex: |z|^2 ~ Exp(1) closed forms") {
    for (double gamma : {1.0, 5.0, 10.0, 20.0}) {
      const auto tm = truncated_gaussian_moments(gamma, Field::Complex);
      const double e = std::exp(-gamma);
      const double m2 = 1.0 - (1.0 + gamma) * e;
      const double e4 = 2.0 - e * (gamma * gamma + 2.0 * gamma + 2.0);
      CHECK(tm.m2_gamma == doctest::Approx(m2).epsilon(1e-10));
      CHECK(tm.m4_gamma == doctest::Approx(e4 - m2).epsilon(1e-10));
    }
  }
  SUBCASE("large gamma recovers the untruncated fourth-moment constants") {
    // E|z|^4 - E|z|^2 = 2 (real), 1 (complex).
    const auto real = truncated_gaussian_moments(1e3, Field::Real);
    CHECK(real.m2_gamma == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(real.m4_gamma == doctest::Approx(2.0).epsilon(1e-12));
    const auto cplx = truncated_gaussian_moments(1e3, Field::Complex);
    CHECK(cplx.m2_gamma == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cplx.m4_gamma == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("real moments against Monte Carlo") {
    Rng rng(311);
    const double gamma = 10.0;
    double s2 = 0.0, s4 = 0.0;
    const int samples = 400000;
    for (int k = 0; k < samples; ++k) {
      const double z = rng.gaussian();
      const double t = z * z;
      if (t <= gamma) {
        s2 += t;
        s4 += t * t;
      }
    }
    const auto tm = truncated_gaussian_moments(gamma, Field::Real);
    CHECK(tm.m2_gamma == doctest::Approx(s2 / samples).epsilon(0.02));
    CHECK(tm.m4_gamma == doctest::Approx(s4 / samples - s2 / samples)
                             .epsilon(0.05));
  }
}

TEST_CASE("critical-point inequality is exact at the truth") {
  const auto prob = gaussian_problem<double>(8, 2, 40, 401);
  const auto rep = check_basic_inequality(prob, prob.truth_factor);
  CHECK(rep.lhs == doctest::Approx(0.0));
  CHECK(std::abs(rep.rhs_mid) <= 1e-10);
  CHECK(std::abs(rep.rhs_final) <= 1e-10);
  CHECK(rep.residual_norm <= 1e-10);
}

TEST_CASE_TEMPLATE("critical-point inequality chain at solver outputs", Scalar,
                   double, Complex) {
  const Eigen::Index d = 10, n = 40;
  int checked = 0;
  for (double sigma : {0.0, 0.05}) {
    for (Eigen::Index p : {1, 2, 3}) {
      const auto prob = gaussian_problem<Scalar>(
          d, 1, n, derive_seed(500, static_cast<std::uint64_t>(p)), sigma);
      SolverConfig config;
      config.seed = 17 + static_cast<std::uint64_t>(p);
      const auto res = solve(prob, p, config);
      if (res.status == SolveStatus::MaxItersReached) continue;
      const auto rep = check_basic_inequality(prob, res.x_final);
      const double tol =
          basic_inequality_tolerance(prob, res.x_final, res.certificate, rep);
      CHECK(rep.slack_mid >= -tol);
      CHECK(rep.rhs_final - rep.rhs_mid >= -tol);
      ++checked;
    }
  }
  CHECK(checked >= 4);
}

TEST_CASE("inequality holds at spurious p = 1 critical points too") {
  // Small n makes p = 1 runs land on saddles/minima away from the truth.
  int spurious = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto prob = gaussian_problem<double>(6, 1, 10, 600 + seed);
    SolverConfig config;
    config.seed = seed;
    const auto res = solve(prob, 1, config);
    if (res.status != SolveStatus::Converged) continue;
    const auto rep = check_basic_inequality(prob, res.x_final);
    const double tol =
        basic_inequality_tolerance(prob, res.x_final, res.certificate, rep);
    CHECK(rep.slack >= -tol);
    if (res.errors.frobenius > 1e-3) ++spurious;
  }
  INFO("spurious points seen: ", spurious);
}

TEST_CASE("isometry estimates at moderate sample sizes") {
  const Eigen::Index d = 10, n = 20000;
  SUBCASE("real Gaussian fourth-moment parameter") {
    const auto prob = gaussian_problem<double>(d, 1, n, 701);
    const auto est = estimate_isometry_rank1<double>(
        prob.measurements, prob.truth_factor.col(0), 200, 11);
    CHECK(std::abs(est.m_estimate - 2.0) <= 0.3);
    CHECK(est.delta_U <= 0.3);
    CHECK(est.delta_U >= -0.3);
    CHECK(est.alpha == doctest::Approx((1.0 - est.delta_L) * 2.0));
    CHECK(est.beta == doctest::Approx(1.0 - est.delta_L));
    CHECK(est.one_sided_upper);
  }
  SUBCASE("complex Gaussian upper isometry") {
    const auto prob = gaussian_problem<Complex>(d, 1, n, 703);
    const auto est = estimate_isometry_rank1<Complex>(
        prob.measurements, prob.truth_factor.col(0), 100, 13);
    CHECK(est.delta_U <= 0.15);
    CHECK(std::abs(est.m_estimate - 1.0) <= 0.3);
  }
}

TEST_CASE("first landscape condition evaluator") {
  CHECK(evaluate_rank_one_condition(2.0, 0.0, 0.0));        // 6 > 0
  CHECK_FALSE(evaluate_rank_one_condition(1.0, 1.0 / 9.0, 0.0));  // equality
  CHECK(evaluate_rank_one_condition(1.0, 1.0 / 9.0 - 1e-9, 0.0));

  // Complex case reduces to 9 delta_L + 4 delta_U < 1.
  for (double dl : {0.0, 0.05, 0.1, 0.2}) {
    for (double du : {0.0, 0.1, 0.2, 0.3}) {
      CHECK(evaluate_rank_one_condition(1.0, dl, du) ==
            (9.0 * dl + 4.0 * du < 1.0));
      // Real case reduces to 4 delta_L + delta_U < 1 by the same arithmetic.
      CHECK(evaluate_rank_one_condition(2.0, dl, du) ==
            (4.0 * dl + du < 1.0));
    }
  }
}

TEST_CASE("overparametrized condition evaluator") {
  CHECK_FALSE(evaluate_overparam_condition(1.0, 0.0, 2.0, 2.0));  // 4 > 4 fails
  CHECK(evaluate_overparam_condition(1.0, 0.0, 2.0, 3.0));        // 5 > 4
  CHECK_FALSE(evaluate_overparam_condition(0.0, 1.0, 1.0, 3.0));
}

TEST_CASE("rank-one condition is the p = 1 case of the overparametrized one") {
  // alpha = (1 - delta_L) m, beta = 1 - delta_L, L = 1 + m + delta_U.
  Rng rng(811);
  int agreements = 0;
  for (int k = 0; k < 100; ++k) {
    const double m = 0.5 + 2.5 * rng.uniform01();
    const double dl = 0.3 * rng.uniform01();
    const double du = 0.5 * rng.uniform01();
    const bool t1 = evaluate_rank_one_condition(m, dl, du);
    const bool t2 = evaluate_overparam_condition((1.0 - dl) * m, 1.0 - dl,
                                            1.0 + m + du, 1.0);
    CHECK(t1 == t2);
    agreements += t1 == t2;
  }
  CHECK(agreements == 100);
}

TEST_CASE("concentration of the sampled operator about its expectation") {
  SUBCASE("zero matrix maps to zero deviation") {
    const auto m = sample_measurements<double>({EnsembleKind::RealGaussian},
                                               8, 100, 900);
    const auto rep = check_AZ_concentration(m, MatrixXd(MatrixXd::Zero(8, 8)));
    CHECK(rep.deviation_op == doctest::Approx(0.0));
  }
  SUBCASE("ratio to the bound form is order one and stable in n") {
    const Eigen::Index d = 12;
    double prev_ratio = -1.0;
    for (Eigen::Index n : {2000, 8000}) {
      const auto prob = gaussian_problem<double>(d, 1, n, 902);
      const auto rep =
          check_AZ_concentration(prob.measurements, prob.z_star());
      CHECK(rep.deviation_op / prob.trace_z <= 1.0);
      if (prev_ratio > 0.0) {
        CHECK(rep.ratio <= 3.0 * prev_ratio);
        CHECK(rep.ratio >= prev_ratio / 3.0);
      }
      prev_ratio = rep.ratio;
    }
  }
  SUBCASE("rejects ensembles without a closed-form expectation") {
    const auto m = sample_measurements<double>(
        {EnsembleKind::SubGaussianIID, SubGaussianDist::Rademacher}, 6, 30,
        903);
    CHECK_THROWS_AS(
        check_AZ_concentration(m, MatrixXd(MatrixXd::Identity(6, 6))),
        std::invalid_argument);
  }
}

TEST_CASE("dual certificate expectation matches the orthogonal projector") {
  // Mean of the unrescaled Y over independent ensembles approximates
  // P_U^perp at large n.
  const Eigen::Index d = 20, r = 2, n = 100 * d;
  const auto truth_prob = gaussian_problem<Complex>(d, r, 50, 1001);
  const auto basis = tangent_basis<Complex>(truth_prob.z_star(), r);
  const MatrixXc p_perp = basis.projector_complement();

  MatrixXc mean = MatrixXc::Zero(d, d);
  const int ensembles = 50;
  for (int k = 0; k < ensembles; ++k) {
    const auto m = sample_measurements<Complex>(
        {EnsembleKind::ComplexGaussian}, d, n,
        derive_seed(1100, static_cast<std::uint64_t>(k)));
    auto cert = build_gaussian_dual_certificate<Complex>(m, basis);
    mean += cert.y / cert.s.rescale_applied;  // undo any rescale
  }
  mean /= static_cast<double>(ensembles);
  CHECK(operator_norm<Complex>(mean - p_perp) <= 0.1);
}

TEST_CASE_TEMPLATE("dual certificates are valid at generous sampling", Scalar,
                   double, Complex) {
  const Eigen::Index d = 15, r = 1, n = 40 * d;
  int valid = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto prob = gaussian_problem<Scalar>(d, r, n, 1200 + seed);
    const auto basis = tangent_basis<Scalar>(prob.z_star(), r);
    const auto cert =
        build_gaussian_dual_certificate<Scalar>(prob.measurements, basis);
    if (cert.s.valid) {
      ++valid;
      CHECK(cert.s.tperp_min_eig >= 1.0 - 1e-9);
      CHECK(cert.s.epsilon <= 1.5);
      CHECK(cert.s.lambda_norm <= 5.0 / std::sqrt(static_cast<double>(n)));
    }
  }
  CHECK(valid >= 4);
}

TEST_CASE("certificate epsilon shrinks as n grows") {
  const Eigen::Index d = 15, r = 2;
  double eps_small = 0.0, eps_large = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    for (int which = 0; which < 2; ++which) {
      const Eigen::Index n = which == 0 ? 20 * d : 80 * d;
      const auto m = sample_measurements<Complex>(
          {EnsembleKind::ComplexGaussian}, d, n,
          derive_seed(1300, static_cast<std::uint64_t>(rep), which));
      const auto prob = gaussian_problem<Complex>(d, r, 10, 1301 + rep);
      const auto basis = tangent_basis<Complex>(prob.z_star(), r);
      const auto cert = build_gaussian_dual_certificate<Complex>(m, basis);
      (which == 0 ? eps_small : eps_large) +=
          cert.s.epsilon / cert.s.rescale_applied;
    }
  }
  // Root-n scaling: eps ~ sqrt(1/n), so x4 the samples should halve it
  // (within a factor-2 tolerance).
  CHECK(eps_large <= eps_small);
  CHECK(eps_large >= eps_small / 8.0);
}

TEST_CASE("restricted lower bound constants from probing") {
  const Eigen::Index d = 12, r = 1, n = 40 * d;
  const auto prob = gaussian_problem<Complex>(d, r, n, 1400);
  const auto basis = tangent_basis<Complex>(prob.z_star(), r);
  const auto est =
      estimate_restricted_conditioning<Complex>(prob.measurements, basis, 40, 7);
  CHECK(est.mu_T > 0.2);
  CHECK(est.L_T >= 0.0);
  CHECK(est.L_T <= 2.0);

  // The fitted pair satisfies the inequality on fresh probes.
  Rng rng(1401);
  for (int k = 0; k < 20; ++k) {
    MatrixXc g = rng.gaussian_matrix<Complex>(d, d);
    g = ((g + g.adjoint()) / 2.0).eval();
    auto [g_t, g_tp] = project_tangent<Complex>(g, basis);
    const MatrixXc q = basis.complement_basis();
    const MatrixXc wf = q * rng.gaussian_matrix<Complex>(d - r, 2);
    const MatrixXc h = g_t + wf * wf.adjoint();
    const double lhs =
        apply_operator(prob.measurements, h).norm() / std::sqrt(double(n));
    const double rhs = est.mu_T * g_t.norm() -
                       est.L_T * Eigen::numext::real((wf * wf.adjoint()).trace());
    CHECK(lhs >= rhs - 0.05 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("landscape verdict arithmetic") {
  const auto prob = gaussian_problem<Complex>(10, 1, 400, 1500);
  const auto basis = tangent_basis<Complex>(prob.z_star(), 1);
  auto cert =
      build_gaussian_dual_certificate<Complex>(prob.measurements, basis);

  SUBCASE("hand-plugged threshold") {
    // mu_T = 1, L_T = 0 gives tau = 2 ||A^*(y)||_op / (n lambda_r) - 2.
    const auto v = landscape_verdict(cert, 1.0, 0.0, prob, 3);
    CHECK(v.applicable);
    const double expected_tau =
        2.0 * v.ay_op / (static_cast<double>(prob.n()) * prob.lambda_r) - 2.0;
    CHECK(v.tau == doctest::Approx(expected_tau).epsilon(1e-12));
    CHECK(v.p_required == doctest::Approx(v.tau));
  }
  SUBCASE("noiseless bound vanishes above threshold") {
    const auto v = landscape_verdict(cert, 1.0, 0.0, prob, 50);
    REQUIRE(v.applicable);
    if (v.p > v.tau) CHECK(v.error_bound == doctest::Approx(0.0));
  }
  SUBCASE("below threshold the bound is infinite") {
    LandscapeVerdict v = landscape_verdict(cert, 1e-3, 0.0, prob, 1);
    if (v.applicable && v.p <= v.tau)
      CHECK(std::isinf(v.error_bound));
  }
  SUBCASE("inapplicable when the denominator closes") {
    const auto v = landscape_verdict(cert, 1e-12, 1.0, prob, 3);
    CHECK_FALSE(v.applicable);
  }
}

TEST_CASE("threshold monotonicity in its inputs") {
  // tau increases with ||A^*(y)||_op and decreases in lambda_r and in the
  // certificate margin mu_T - L_T eps; evaluated on the closed form.
  auto tau_of = [](double ay, double lam_r, double mu, double lt,
                   double eps, double norm_l, double n) {
    const double c = (1.0 + lt * std::sqrt(n) * norm_l) / (mu - lt * eps);
    return 2.0 * c * c * ay / (n * lam_r) - 2.0;
  };
  const double base = tau_of(100.0, 0.5, 1.0, 0.1, 0.2, 0.01, 400.0);
  CHECK(tau_of(150.0, 0.5, 1.0, 0.1, 0.2, 0.01, 400.0) > base);
  CHECK(tau_of(100.0, 0.8, 1.0, 0.1, 0.2, 0.01, 400.0) < base);
  CHECK(tau_of(100.0, 0.5, 1.2, 0.1, 0.2, 0.01, 400.0) < base);
  CHECK(tau_of(100.0, 0.5, 1.0, 0.1, 0.5, 0.01, 400.0) > base);
}

TEST_CASE("nuclear-norm lower bound probing") {
  SUBCASE("positive constant for non-peaky signals") {
    const EnsembleSpec spec{EnsembleKind::SubGaussianIID,
                            SubGaussianDist::Rademacher};
    const auto prob = make_problem<double>(spec, 15, 1, 20 * 15, 1600);
    const double c4 = estimate_nuclear_lower_bound<double>(
        prob.measurements, prob.z_star(), 60, 3);
    CHECK(c4 > 0.01);
  }
  SUBCASE("basis-aligned signals collapse the constant for unimodular entries") {
    // <a a^*, e1 e1^T - e2 e2^T> = |a_1|^2 - |a_2|^2 = 0 a.s. when |w| = 1.
    const EnsembleSpec spec{EnsembleKind::SubGaussianIID,
                            SubGaussianDist::Rademacher};
    const Eigen::Index d = 15;
    const auto m = sample_measurements<double>(spec, d, 20 * d, 1601);
    MatrixXd z_star = MatrixXd::Zero(d, d);
    z_star(0, 0) = 1.0;
    MatrixXd z = MatrixXd::Zero(d, d);
    z(1, 1) = 1.0;
    const MatrixXd diff = z - z_star;
    const double ratio =
        apply_operator(m, diff).lpNorm<1>() / static_cast<double>(m.n) /
        matrix_norms<double>(diff).nuclear;
    CHECK(ratio <= 1e-12);
  }
}
