#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>

namespace hermit {

using Index = Eigen::Index;

template <typename Real>
using Complex = std::complex<Real>;
template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// Real scalar type underlying an Eigen expression.
template <typename Derived>
using RealOf = typename Eigen::NumTraits<typename Derived::Scalar>::Real;

/// Invalid configuration or argument combination.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Singular or indefinite matrices, zero norms and similar numerical breakdowns.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation: the same counters always give the same
/// stream, independent of the order in which streams are requested.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (const auto c : counters) h = mix64(h ^ mix64(c));
  return h;
}

/// Circularly-symmetric complex Gaussian with the given variance
/// (real and imaginary parts each carry half of it).
template <typename Real = double>
Complex<Real> complex_normal(Rng& rng, Real variance) {
  std::normal_distribution<Real> normal(Real(0), std::sqrt(variance / Real(2)));
  const Real re = normal(rng);
  const Real im = normal(rng);
  return {re, im};
}

template <typename Real = double>
CVector<Real> complex_normal_vector(Rng& rng, Index n, Real variance) {
  CVector<Real> v(n);
  for (Index i = 0; i < n; ++i) v(i) = complex_normal<Real>(rng, variance);
  return v;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace hermit
