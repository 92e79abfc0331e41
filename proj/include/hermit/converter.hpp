#pragma once

#include "hermit/common.hpp"
#include "hermit/transform.hpp"

namespace hermit {

inline constexpr int kMinBits = 1;
inline constexpr int kMaxBits = 16;

/// q-bit uniform midrise quantizer with step `step`. Output levels are
/// step * (j + 1/2) for j = -2^(q-1) .. 2^(q-1) - 1; inputs beyond the range
/// saturate at the outermost level.
double midrise(double x, int bits, double step);

/// E[(Q(x) - x)^2] for x ~ N(0, 1).
double quantizer_mse(int bits, double step);

/// Step size minimizing quantizer_mse for a standard normal input. Cached.
double optimal_step_size(int bits);

struct BussgangParams {
  double gain;        // E[Q(x) x] / E[x^2]
  double distortion;  // E[Q(x)^2] - gain^2 E[x^2]
};

/// Bussgang gain and distortion variance of the quantizer for x ~ N(0, 1).
BussgangParams bussgang_characterize(int bits, double step);

/// Low-resolution ADC bank: one quantizer per real dimension of each RF chain,
/// preceded by a per-chain gain.
struct AdcModel {
  int bits = 4;
  double step = 0.0;
  double bussgang_gain = 0.0;
  double distortion_var = 0.0;
  Eigen::VectorXd gains;

  /// Uses the MSE-optimal step size for `bits`.
  static AdcModel make(int bits, Eigen::VectorXd gains);
};

/// r_k = (Q(g_k Re y_k) + i Q(g_k Im y_k)) / g_k
Eigen::VectorXcd convert(const Eigen::VectorXcd& yP, const AdcModel& adc);

/// Diagonal of P Cy P^H, computed per cluster from the diagonal blocks of Cy.
template <typename Real, typename DerivedC>
RVector<Real> transformed_variances(const AnalogTransform<Real>& T, const Eigen::MatrixBase<DerivedC>& Cy) {
  const Index S = T.cluster_size;
  RVector<Real> diag(T.num_antennas());
  for (Index c = 0; c < T.num_clusters(); ++c) {
    const auto& blk = T.blocks[static_cast<std::size_t>(c)];
    const auto Cc = Cy.block(c * S, c * S, S, S);
    const CVector<Real> w = Cc * blk.a;
    const Real a_form = std::real(blk.a.dot(w));
    for (Index k = 0; k < S; ++k) {
      const Complex<Real> cross = blk.beta * blk.b(k) * std::conj(w(k));
      diag(c * S + k) = std::real(Cc(k, k)) - 2 * std::real(cross) + std::norm(blk.beta) * a_form * std::norm(blk.b(k));
    }
  }
  return diag;
}

/// g_k = sqrt(2 / [P Cy P^H]_kk), so each real quantizer input has unit variance.
template <typename Real, typename DerivedC>
RVector<Real> gain_control(const AnalogTransform<Real>& T, const Eigen::MatrixBase<DerivedC>& Cy) {
  if (Cy.rows() != T.num_antennas() || Cy.cols() != T.num_antennas())
    throw ConfigError("gain control: covariance size does not match transform");
  const RVector<Real> var = transformed_variances(T, Cy);
  RVector<Real> g(var.size());
  for (Index k = 0; k < var.size(); ++k) {
    if (!(var(k) > 0)) throw NumericalError("gain control: zero variance at ADC " + std::to_string(k));
    g(k) = std::sqrt(Real(2) / var(k));
  }
  return g;
}

}  // namespace hermit
