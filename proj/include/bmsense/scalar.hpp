#ifndef BMSENSE_SCALAR_HPP
#define BMSENSE_SCALAR_HPP

#include <complex>
#include <type_traits>

#include <Eigen/Dense>

namespace bmsense {

using Complex = std::complex<double>;

template <class Scalar>
inline constexpr bool is_complex_v = false;
template <>
inline constexpr bool is_complex_v<Complex> = true;

enum class Field { Real, Complex };

template <class Scalar>
constexpr Field field_of() {
  return is_complex_v<Scalar> ? Field::Complex : Field::Real;
}

inline const char* field_name(Field f) {
  return f == Field::Real ? "real" : "complex";
}

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;
using MatrixXc = MatrixX<Complex>;
using VectorXc = VectorX<Complex>;

// Real part of the Frobenius pairing tr(A^* B).  This is the inner product of
// the variable space when complex matrices are viewed through their real and
// imaginary parts.
template <class DerivedA, class DerivedB>
double re_inner(const Eigen::MatrixBase<DerivedA>& a,
                const Eigen::MatrixBase<DerivedB>& b) {
  return Eigen::numext::real(a.conjugate().cwiseProduct(b).sum());
}

}  // namespace bmsense

#endif
