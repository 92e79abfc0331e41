#pragma once

#include "hermit/common.hpp"
#include "hermit/transform.hpp"

#include <cstdint>
#include <sstream>
#include <vector>

namespace hermit {

/// Gray-labelled square QAM; point index equals its bit label.
struct Constellation {
  std::vector<std::complex<double>> points;
  int bits_per_symbol = 0;
  double energy = 1.0;

  /// 16-QAM with per-axis levels {-3, -1, 1, 3} sqrt(Es / 10). The two high
  /// label bits select the in-phase level, the two low bits the quadrature
  /// level, each Gray coded (00, 01, 11, 10 from the most negative level).
  static Constellation qam16(double Es = 1.0);

  int size() const { return static_cast<int>(points.size()); }

  /// Nearest point by exhaustive search; exact ties go to the lowest label.
  int nearest(std::complex<double> z) const;
};

struct Detection {
  std::vector<int> symbols;
  std::vector<std::uint8_t> bits;  // bits_per_symbol per user, MSB first
};

Detection hard_detect(const Eigen::VectorXcd& s_star, const Constellation& constellation);

/// Bit label of symbol index `symbol`, MSB first.
void append_bits(int symbol, int bits_per_symbol, std::vector<std::uint8_t>& out);

/// Bussgang-aware LMMSE equalizer
///   W = (1/gamma) A^H (A A^H + (Ej/Es) P hJ hJ^H P^H + (N0/Es) P P^H
///                       + 2D / (gamma^2 Es) G^-2)^-1,   A = P H,
/// with P the dense materialization of T. The bracket is factored by Cholesky.
template <typename Real, typename DerivedH, typename DerivedJ, typename DerivedG>
CMatrix<Real> lmmse_matrix(const Eigen::MatrixBase<DerivedH>& H, const Eigen::MatrixBase<DerivedJ>& hJ,
                           const AnalogTransform<Real>& T, Real Es, Real Ej, Real N0, Real gamma, Real D,
                           const Eigen::MatrixBase<DerivedG>& gains) {
  const Index B = H.rows();
  if (T.num_antennas() != B || hJ.size() != B || gains.size() != B)
    throw ConfigError("equalizer: inconsistent dimensions");
  if (!(gamma > 0)) throw ConfigError("equalizer: Bussgang gain must be positive");
  if (!(Es > 0)) throw ConfigError("equalizer: symbol energy must be positive");

  const CMatrix<Real> P = T.dense();
  const CMatrix<Real> A = P * H;
  const CVector<Real> j = P * hJ;
  CMatrix<Real> M = A * A.adjoint();
  M.noalias() += (Ej / Es) * j * j.adjoint();
  M.noalias() += (N0 / Es) * P * P.adjoint();
  const Real dist = Real(2) * D / (gamma * gamma * Es);
  for (Index k = 0; k < B; ++k) M(k, k) += dist / (gains(k) * gains(k));

  Eigen::LLT<CMatrix<Real>> llt(M);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> eig(M, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "equalizer: bracket matrix is not positive definite (eigenvalues in ["
        << eig.eigenvalues().minCoeff() << ", " << eig.eigenvalues().maxCoeff() << "])";
    throw NumericalError(msg.str());
  }
  // W = (1/gamma) (M^-1 A)^H since M is Hermitian
  return llt.solve(A).adjoint() / gamma;
}

template <typename DerivedW, typename DerivedR>
CVector<RealOf<DerivedW>> estimate(const Eigen::MatrixBase<DerivedW>& W, const Eigen::MatrixBase<DerivedR>& r) {
  return W * r;
}

}  // namespace hermit
