#ifndef BMSENSE_RNG_HPP
#define BMSENSE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "bmsense/scalar.hpp"

namespace bmsense {

// splitmix64 finalizer; used to mix seeds so that derived streams are
// statistically independent of each other and of the master stream.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a substream seed from a master seed and up to three stream tags
// (e.g. trial index, rank parameter, probe index).  Deterministic and
// collision-resistant for the tag ranges used here.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ mix64(a + 0x100000001ULL));
  s = mix64(s ^ mix64(b + 0x200000002ULL));
  s = mix64(s ^ mix64(c + 0x300000003ULL));
  return s;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix64(seed)) {}

  double gaussian(double stddev = 1.0) {
    return stddev * normal_(gen_);
  }

  // CN(0,1): real and imaginary parts i.i.d. N(0, 1/2), so E|w|^2 = 1.
  Complex complex_gaussian() {
    const double s = 1.0 / std::sqrt(2.0);
    return {s * normal_(gen_), s * normal_(gen_)};
  }

  double uniform01() { return unif_(gen_); }

  // Uniform on {-1, +1}.
  double rademacher() { return unif_(gen_) < 0.5 ? -1.0 : 1.0; }

  Complex uniform_phase() {
    const double theta = 2.0 * M_PI * unif_(gen_);
    return {std::cos(theta), std::sin(theta)};
  }

  std::uint64_t raw() { return gen_(); }

  template <class Scalar>
  Scalar gaussian_entry();

  template <class Scalar>
  MatrixX<Scalar> gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                                  double entry_stddev = 1.0) {
    MatrixX<Scalar> m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i)
        m(i, j) = Scalar(entry_stddev) * gaussian_entry<Scalar>();
    return m;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

template <>
inline double Rng::gaussian_entry<double>() {
  return gaussian();
}
template <>
inline Complex Rng::gaussian_entry<Complex>() {
  return complex_gaussian();
}

}  // namespace bmsense

#endif
