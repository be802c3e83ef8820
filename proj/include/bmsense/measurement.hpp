#ifndef BMSENSE_MEASUREMENT_HPP
#define BMSENSE_MEASUREMENT_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bmsense/linalg.hpp"
#include "bmsense/rng.hpp"
#include "bmsense/scalar.hpp"

namespace bmsense {

// ---------------------------------------------------------------------------
// Measurement ensembles.
//
// Every ensemble produces PSD measurement matrices A_i stored through their
// rank-1 factors: A_i = sum_b f_{b,i} f_{b,i}^*, one block in the rank-1
// case and two blocks when complex measurement vectors act on a real signal
// (A_i = Re(a_i a_i^*) = r_i r_i^T + s_i s_i^T with a_i = r_i + i s_i).
// ---------------------------------------------------------------------------

enum class EnsembleKind {
  RealGaussian,
  ComplexGaussian,
  ComplexOnRealSignal,  // real field, A_i = Re(a_i a_i^*) for complex a_i
  SubGaussianIID,
};

enum class SubGaussianDist {
  Rademacher,          // +-1, real
  UniformPhase,        // unit circle, complex
  ScaledBernoulli,     // +-1/sqrt(q) w.p. q/2 each, 0 otherwise; real
  StudentLikeBounded,  // two-point symmetric mixture with E|w|^4 = 2; real
};

// Analytic moments of the entry distribution (E w = 0 and E|w|^2 = 1 by
// construction for every ensemble).
struct EntryMoments {
  double abs2 = 1.0;          // E |w|^2
  double abs4 = 1.0;          // E |w|^4
  double abs_sq_mean = 1.0;   // |E w^2|
  double subgauss_k = 1.0;    // sub-Gaussian proxy
};

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::RealGaussian;
  SubGaussianDist distribution = SubGaussianDist::Rademacher;
  double bernoulli_q = 0.25;  // ScaledBernoulli parameter, E|w|^4 = 1/q

  Field field() const {
    switch (kind) {
      case EnsembleKind::RealGaussian:
      case EnsembleKind::ComplexOnRealSignal:
        return Field::Real;
      case EnsembleKind::ComplexGaussian:
        return Field::Complex;
      case EnsembleKind::SubGaussianIID:
        return distribution == SubGaussianDist::UniformPhase ? Field::Complex
                                                             : Field::Real;
    }
    throw std::invalid_argument("unknown ensemble kind");
  }

  bool is_gaussian() const {
    return kind == EnsembleKind::RealGaussian ||
           kind == EnsembleKind::ComplexGaussian;
  }

  // E|z|^4 - 1 for the Gaussian ensembles (2 real, 1 complex).
  double m4() const {
    if (!is_gaussian())
      throw std::invalid_argument("m4 defined for Gaussian ensembles only");
    return kind == EnsembleKind::RealGaussian ? 2.0 : 1.0;
  }

  EntryMoments moments() const {
    EntryMoments m;
    switch (kind) {
      case EnsembleKind::RealGaussian:
        m.abs4 = 3.0;
        m.abs_sq_mean = 1.0;
        break;
      case EnsembleKind::ComplexGaussian:
      case EnsembleKind::ComplexOnRealSignal:
        m.abs4 = 2.0;
        m.abs_sq_mean = 0.0;
        break;
      case EnsembleKind::SubGaussianIID:
        switch (distribution) {
          case SubGaussianDist::Rademacher:
            m.abs4 = 1.0;
            m.abs_sq_mean = 1.0;
            break;
          case SubGaussianDist::UniformPhase:
            m.abs4 = 1.0;
            m.abs_sq_mean = 0.0;
            break;
          case SubGaussianDist::ScaledBernoulli:
            m.abs4 = 1.0 / bernoulli_q;
            m.abs_sq_mean = 1.0;
            m.subgauss_k = 1.0 / std::sqrt(bernoulli_q);
            break;
          case SubGaussianDist::StudentLikeBounded:
            // +-sqrt(2/3) w.p. 0.45 each, +-2 w.p. 0.05 each.
            m.abs4 = 2.0;
            m.abs_sq_mean = 1.0;
            m.subgauss_k = 2.0;
            break;
        }
        break;
    }
    return m;
  }

  std::string name() const {
    switch (kind) {
      case EnsembleKind::RealGaussian: return "real_gaussian";
      case EnsembleKind::ComplexGaussian: return "complex_gaussian";
      case EnsembleKind::ComplexOnRealSignal: return "complex_on_real";
      case EnsembleKind::SubGaussianIID:
        switch (distribution) {
          case SubGaussianDist::Rademacher: return "rademacher";
          case SubGaussianDist::UniformPhase: return "uniform_phase";
          case SubGaussianDist::ScaledBernoulli: return "scaled_bernoulli";
          case SubGaussianDist::StudentLikeBounded: return "student_bounded";
        }
    }
    return "unknown";
  }
};

EnsembleSpec ensemble_from_name(const std::string& name);

template <class Scalar>
struct MeasurementSet {
  Eigen::Index d = 0;
  Eigen::Index n = 0;
  // Each block is d x n; A_i = sum over blocks of col_i col_i^*.
  std::vector<MatrixX<Scalar>> factor_blocks;
  EnsembleSpec spec;
  std::uint64_t seed = 0;

  MatrixX<Scalar> dense_matrix(Eigen::Index i) const {
    MatrixX<Scalar> a = MatrixX<Scalar>::Zero(d, d);
    for (const auto& f : factor_blocks)
      a += f.col(i) * f.col(i).adjoint();
    return a;
  }
};

namespace detail {

inline double draw_subgaussian_real(Rng& rng, const EnsembleSpec& spec) {
  switch (spec.distribution) {
    case SubGaussianDist::Rademacher:
      return rng.rademacher();
    case SubGaussianDist::ScaledBernoulli: {
      const double u = rng.uniform01();
      const double q = spec.bernoulli_q;
      if (u < q / 2) return 1.0 / std::sqrt(q);
      if (u < q) return -1.0 / std::sqrt(q);
      return 0.0;
    }
    case SubGaussianDist::StudentLikeBounded: {
      const double u = rng.uniform01();
      const double small = std::sqrt(2.0 / 3.0);
      if (u < 0.45) return small;
      if (u < 0.90) return -small;
      return u < 0.95 ? 2.0 : -2.0;
    }
    default:
      throw std::invalid_argument("not a real sub-Gaussian distribution");
  }
}

}  // namespace detail

// Draws the measurement ensemble.  Deterministic given (spec, d, n, seed);
// entries are drawn column by column so the layout is reproducible.
template <class Scalar>
MeasurementSet<Scalar> sample_measurements(const EnsembleSpec& spec,
                                           Eigen::Index d, Eigen::Index n,
                                           std::uint64_t seed) {
  if (d < 1 || n < 1) throw std::invalid_argument("sample_measurements: d, n >= 1");
  if (spec.field() != field_of<Scalar>())
    throw std::invalid_argument("sample_measurements: scalar/field mismatch");

  MeasurementSet<Scalar> m;
  m.d = d;
  m.n = n;
  m.spec = spec;
  m.seed = seed;
  Rng rng(derive_seed(seed, 0xA11));

  if (spec.kind == EnsembleKind::ComplexOnRealSignal) {
    if constexpr (!is_complex_v<Scalar>) {
      MatrixXd re(d, n), im(d, n);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < d; ++i) {
          const Complex a = rng.complex_gaussian();
          re(i, j) = a.real();
          im(i, j) = a.imag();
        }
      m.factor_blocks = {std::move(re), std::move(im)};
      return m;
    }
  }

  MatrixX<Scalar> f(d, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < d; ++i) {
      if constexpr (is_complex_v<Scalar>) {
        f(i, j) = spec.kind == EnsembleKind::ComplexGaussian
                      ? rng.complex_gaussian()
                      : rng.uniform_phase();
      } else {
        f(i, j) = spec.kind == EnsembleKind::RealGaussian
                      ? rng.gaussian()
                      : detail::draw_subgaussian_real(rng, spec);
      }
    }
  m.factor_blocks = {std::move(f)};
  return m;
}

// A(S): entry i is <A_i, S> = sum_b f_{b,i}^* S f_{b,i}, always real for
// Hermitian S.
template <class Scalar>
VectorXd apply_operator(const MeasurementSet<Scalar>& m,
                        const MatrixX<Scalar>& s) {
  if (s.rows() != m.d || s.cols() != m.d)
    throw std::invalid_argument("apply_operator: dimension mismatch");
  VectorXd out = VectorXd::Zero(m.n);
  for (const auto& f : m.factor_blocks) {
    const MatrixX<Scalar> sf = s * f;
    out += f.conjugate().cwiseProduct(sf).colwise().sum().real().transpose();
  }
  return out;
}

// A(X X^*) without forming X X^*: per block, row norms of F^* X.
template <class Scalar>
VectorXd apply_operator_gram(const MeasurementSet<Scalar>& m,
                             const MatrixX<Scalar>& x) {
  if (x.rows() != m.d)
    throw std::invalid_argument("apply_operator_gram: dimension mismatch");
  VectorXd out = VectorXd::Zero(m.n);
  for (const auto& f : m.factor_blocks)
    out += (f.adjoint() * x).rowwise().squaredNorm();
  return out;
}

// A^*(z) = sum_i z_i A_i, a Hermitian d x d matrix.
template <class Scalar>
MatrixX<Scalar> apply_adjoint(const MeasurementSet<Scalar>& m,
                              const VectorXd& z) {
  if (z.size() != m.n)
    throw std::invalid_argument("apply_adjoint: dimension mismatch");
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(m.d, m.d);
  for (const auto& f : m.factor_blocks) {
    MatrixX<Scalar> fz = f * z.asDiagonal();
    out += fz * f.adjoint();
  }
  // Re-symmetrize to kill rounding drift.
  out = Scalar(0.5) * (out + out.adjoint()).eval();
  return out;
}

// A^*(z) X without forming the d x d adjoint; O(n d p).
template <class Scalar>
MatrixX<Scalar> apply_adjoint_times(const MeasurementSet<Scalar>& m,
                                    const VectorXd& z,
                                    const MatrixX<Scalar>& x) {
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(x.rows(), x.cols());
  for (const auto& f : m.factor_blocks)
    out += f * (z.asDiagonal() * (f.adjoint() * x));
  return out;
}

// E (1/n) A^* A(S) for Gaussian measurements: m4 S + tr(S) I.
template <class Scalar>
MatrixX<Scalar> expected_operator_gaussian(const MatrixX<Scalar>& s,
                                           double m4) {
  const Eigen::Index d = s.rows();
  return m4 * s +
         Eigen::numext::real(s.trace()) * MatrixX<Scalar>::Identity(d, d);
}

// ---------------------------------------------------------------------------
// Problem instances: y = A(Z_*) + xi with Z_* = X_* X_*^*.
// ---------------------------------------------------------------------------

enum class TruthKind { Given, RandomGaussian, PeakyBasis };
enum class NoiseKind { None, Gaussian, Given };

template <class Scalar>
struct Problem {
  MatrixX<Scalar> truth_factor;  // d x r
  MeasurementSet<Scalar> measurements;
  VectorXd noise;
  VectorXd y;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  // Metadata recorded at construction.
  double trace_z = 0.0;
  double lambda_r = 0.0;
  double incoherence = 0.0;  // ||x_*||_inf / ||x_*|| (r = 1 only, else 0)

  Eigen::Index d() const { return measurements.d; }
  Eigen::Index n() const { return measurements.n; }
  Eigen::Index r() const { return truth_factor.cols(); }

  MatrixX<Scalar> z_star() const {
    return truth_factor * truth_factor.adjoint();
  }
};

template <class Scalar>
Problem<Scalar> make_problem(const EnsembleSpec& spec, Eigen::Index d,
                             Eigen::Index r, Eigen::Index n,
                             std::uint64_t seed,
                             TruthKind truth_kind = TruthKind::RandomGaussian,
                             double sigma = 0.0,
                             const MatrixX<Scalar>* given_truth = nullptr,
                             const VectorXd* given_noise = nullptr) {
  if (r < 1 || r > d) throw std::invalid_argument("make_problem: 1 <= r <= d");

  Problem<Scalar> prob;
  prob.seed = seed;
  prob.sigma = sigma;
  prob.measurements =
      sample_measurements<Scalar>(spec, d, n, derive_seed(seed, 1));

  Rng truth_rng(derive_seed(seed, 2));
  switch (truth_kind) {
    case TruthKind::Given:
      if (!given_truth) throw std::invalid_argument("make_problem: no truth");
      prob.truth_factor = *given_truth;
      break;
    case TruthKind::RandomGaussian:
      // Unit Frobenius norm, so error metrics are on a common scale.
      prob.truth_factor = truth_rng.gaussian_matrix<Scalar>(d, r);
      prob.truth_factor /= prob.truth_factor.norm();
      break;
    case TruthKind::PeakyBasis: {
      prob.truth_factor = MatrixX<Scalar>::Zero(d, r);
      for (Eigen::Index k = 0; k < r; ++k) prob.truth_factor(k, k) = 1.0;
      prob.truth_factor /= prob.truth_factor.norm();
      break;
    }
  }
  if (prob.truth_factor.rows() != d || prob.truth_factor.cols() != r)
    throw std::invalid_argument("make_problem: truth dimension mismatch");

  VectorXd clean = apply_operator_gram(prob.measurements, prob.truth_factor);
  if (given_noise) {
    prob.noise = *given_noise;
  } else if (sigma > 0.0) {
    Rng noise_rng(derive_seed(seed, 3));
    prob.noise.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) prob.noise(i) = noise_rng.gaussian(sigma);
  } else {
    prob.noise = VectorXd::Zero(n);
  }
  if (prob.noise.size() != n)
    throw std::invalid_argument("make_problem: noise dimension mismatch");
  prob.y = clean + prob.noise;

  const MatrixX<Scalar> z = prob.z_star();
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(z, Eigen::EigenvaluesOnly);
  prob.trace_z = Eigen::numext::real(z.trace());
  prob.lambda_r = es.eigenvalues()(d - r);
  if (r == 1) {
    prob.incoherence = prob.truth_factor.cwiseAbs().maxCoeff() /
                       prob.truth_factor.norm();
  }
  return prob;
}

}  // namespace bmsense

#endif
