#pragma once

#include "hermit/common.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace hermit {

enum class AlphabetKind { Unconstrained, Phase, Quadrature };

/// Entry alphabet of the analog transform vectors. Phase alphabets hold
/// exp(i 2 pi k / AC); quadrature alphabets hold the sqrt(AC) x sqrt(AC) grid
/// with odd integer coordinates. The scale is irrelevant (absorbed by beta).
struct Alphabet {
  AlphabetKind kind = AlphabetKind::Unconstrained;
  int cardinality = 0;

  static Alphabet unconstrained() { return {}; }
  static Alphabet phase(int ac) { return Alphabet{AlphabetKind::Phase, ac}.validated(); }
  static Alphabet quadrature(int ac) { return Alphabet{AlphabetKind::Quadrature, ac}.validated(); }

  bool finite() const { return kind != AlphabetKind::Unconstrained; }

  void validate() const {
    switch (kind) {
      case AlphabetKind::Unconstrained:
        return;
      case AlphabetKind::Phase:
        if (cardinality < 2) throw ConfigError("phase alphabet needs AC >= 2");
        return;
      case AlphabetKind::Quadrature:
        if (cardinality != 4 && cardinality != 16 && cardinality != 64)
          throw ConfigError("quadrature alphabet needs AC in {4, 16, 64}, got " +
                            std::to_string(cardinality));
        return;
    }
  }

  Alphabet validated() const {
    validate();
    return *this;
  }

  // levels per real axis of a quadrature alphabet
  int side() const { return static_cast<int>(std::lround(std::sqrt(cardinality))); }

  /// Points in index order; quadrature index = re_level * side + im_level.
  template <typename Real = double>
  std::vector<Complex<Real>> points() const {
    std::vector<Complex<Real>> out;
    if (kind == AlphabetKind::Phase) {
      for (int k = 0; k < cardinality; ++k)
        out.push_back(std::polar(Real(1), Real(2) * std::numbers::pi_v<Real> * k / cardinality));
    } else if (kind == AlphabetKind::Quadrature) {
      const int m = side();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out.emplace_back(Real(2 * i - (m - 1)), Real(2 * j - (m - 1)));
    }
    return out;
  }

  /// Root-mean-square magnitude of the points.
  double rms() const {
    if (kind == AlphabetKind::Quadrature) {
      const double m = side();
      return std::sqrt(2.0 * (m * m - 1.0) / 3.0);
    }
    return 1.0;
  }

  /// Index of the nearest point; exact ties go to the lowest index.
  template <typename Real>
  int nearest_index(Complex<Real> z) const {
    constexpr Real tie_tol = Real(1e-12);
    if (kind == AlphabetKind::Phase) {
      const Real width = Real(2) * std::numbers::pi_v<Real> / cardinality;
      Real x = std::arg(z) / width;
      if (x < 0) x += cardinality;
      int k = static_cast<int>(std::floor(x));
      const Real frac = x - k;
      k %= cardinality;
      const int next = (k + 1) % cardinality;
      if (std::abs(frac - Real(0.5)) <= tie_tol) return std::min(k, next);
      return frac < Real(0.5) ? k : next;
    }
    if (kind == AlphabetKind::Quadrature) {
      const int m = side();
      auto level = [m](Real v) {
        const Real t = (v + Real(m - 1)) / Real(2);
        if (t <= 0) return 0;
        if (t >= m - 1) return m - 1;
        const int lo = static_cast<int>(std::floor(t));
        const Real frac = t - lo;
        return frac <= Real(0.5) + tie_tol ? lo : lo + 1;
      };
      return level(z.real()) * m + level(z.imag());
    }
    throw ConfigError("nearest point requested for an unconstrained alphabet");
  }
};

inline std::string to_string(const Alphabet& a) {
  switch (a.kind) {
    case AlphabetKind::Phase:
      return "PQ" + std::to_string(a.cardinality);
    case AlphabetKind::Quadrature:
      return "QQ" + std::to_string(a.cardinality);
    case AlphabetKind::Unconstrained:
      break;
  }
  return "UQ";
}

/// Componentwise nearest-point quantization. The vector is first scaled so its
/// RMS matches the alphabet RMS; the returned entries are unscaled alphabet
/// points. An all-zero vector maps to zeros.
template <typename Derived>
CVector<RealOf<Derived>> quantize_vector(const Eigen::MatrixBase<Derived>& v, const Alphabet& alphabet) {
  using Real = RealOf<Derived>;
  alphabet.validate();
  if (!alphabet.finite()) return v;
  const auto pts = alphabet.points<Real>();
  CVector<Real> out = CVector<Real>::Zero(v.size());
  const Real energy = v.squaredNorm();
  if (!(energy > 0)) return out;
  const Real scale = Real(alphabet.rms()) / std::sqrt(energy / Real(v.size()));
  for (Index k = 0; k < v.size(); ++k)
    out(k) = pts[static_cast<std::size_t>(alphabet.nearest_index<Real>(scale * v(k)))];
  return out;
}

/// Es H H^H + Ej hJ hJ^H + N0 I
template <typename DerivedH, typename DerivedJ>
CMatrix<RealOf<DerivedH>> covariance(const Eigen::MatrixBase<DerivedH>& H, const Eigen::MatrixBase<DerivedJ>& hJ,
                                     RealOf<DerivedH> Es, RealOf<DerivedH> Ej, RealOf<DerivedH> N0) {
  using Real = RealOf<DerivedH>;
  const Index n = H.rows();
  CMatrix<Real> Cy = N0 * CMatrix<Real>::Identity(n, n);
  Cy.noalias() += Es * H * H.adjoint();
  Cy.noalias() += Ej * hJ * hJ.adjoint();
  return Cy;
}

/// One rank-one block I - beta b a^H.
template <typename Real>
struct TransformBlock {
  Complex<Real> beta{0};
  CVector<Real> b;
  CVector<Real> a;

  Index size() const { return b.size(); }

  template <typename Derived>
  CVector<Real> apply(const Eigen::MatrixBase<Derived>& y) const {
    CVector<Real> out = y;
    if (beta != Complex<Real>(0)) out.noalias() -= (beta * a.dot(y)) * b;
    return out;
  }

  CMatrix<Real> dense() const {
    CMatrix<Real> P = CMatrix<Real>::Identity(size(), size());
    P.noalias() -= beta * b * a.adjoint();
    return P;
  }
};

/// Block-diagonal analog transform diag(P_1, ..., P_C) with equal block size.
template <typename Real>
struct AnalogTransform {
  Index cluster_size = 0;
  Alphabet alphabet;
  std::vector<TransformBlock<Real>> blocks;

  static AnalogTransform identity(Index num_antennas) {
    AnalogTransform t;
    t.cluster_size = num_antennas;
    t.blocks.push_back({Complex<Real>(0), CVector<Real>::Zero(num_antennas), CVector<Real>::Zero(num_antennas)});
    return t;
  }

  Index num_clusters() const { return static_cast<Index>(blocks.size()); }
  Index num_antennas() const { return cluster_size * num_clusters(); }

  /// Rank-one path: y_c - beta_c (a_c^H y_c) b_c per cluster.
  template <typename Derived>
  CVector<Real> apply(const Eigen::MatrixBase<Derived>& y) const {
    if (y.size() != num_antennas()) throw ConfigError("transform input has wrong length");
    CVector<Real> out(y.size());
    for (Index c = 0; c < num_clusters(); ++c)
      out.segment(c * cluster_size, cluster_size) =
          blocks[static_cast<std::size_t>(c)].apply(y.segment(c * cluster_size, cluster_size));
    return out;
  }

  /// Applies the transform to every column of M.
  template <typename Derived>
  CMatrix<Real> apply_columns(const Eigen::MatrixBase<Derived>& M) const {
    CMatrix<Real> out(M.rows(), M.cols());
    for (Index j = 0; j < M.cols(); ++j) out.col(j) = apply(M.col(j));
    return out;
  }

  CMatrix<Real> dense() const {
    const Index n = num_antennas();
    CMatrix<Real> P = CMatrix<Real>::Zero(n, n);
    for (Index c = 0; c < num_clusters(); ++c)
      P.block(c * cluster_size, c * cluster_size, cluster_size, cluster_size) =
          blocks[static_cast<std::size_t>(c)].dense();
    return P;
  }
};

template <typename Real, typename Derived>
CVector<Real> apply_transform(const AnalogTransform<Real>& T, const Eigen::MatrixBase<Derived>& y) {
  return T.apply(y);
}

/// Closed-form jammer-removal solution without alphabet constraints:
/// b = hJ, a = Ej Cy^{-1} hJ, beta = 1. With this choice a^H y is the LMMSE
/// estimate of the jammer symbol.
template <typename DerivedC, typename DerivedJ>
TransformBlock<RealOf<DerivedC>> unconstrained_solution(const Eigen::MatrixBase<DerivedC>& Cy,
                                                        const Eigen::MatrixBase<DerivedJ>& hJ,
                                                        RealOf<DerivedC> Ej) {
  using Real = RealOf<DerivedC>;
  Eigen::LLT<CMatrix<Real>> llt(Cy);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance matrix is not positive definite");
  TransformBlock<Real> block;
  block.beta = Complex<Real>(1);
  block.b = hJ;
  block.a = Ej * llt.solve(hJ.eval());
  return block;
}

/// beta = Ej (hJ^H a)(b^H hJ) / (||b||^2 a^H Cy a); zero for degenerate b or a.
template <typename DerivedB, typename DerivedA, typename DerivedC, typename DerivedJ>
Complex<RealOf<DerivedB>> optimal_beta(const Eigen::MatrixBase<DerivedB>& b, const Eigen::MatrixBase<DerivedA>& a,
                                       const Eigen::MatrixBase<DerivedC>& Cy, const Eigen::MatrixBase<DerivedJ>& hJ,
                                       RealOf<DerivedB> Ej) {
  using Real = RealOf<DerivedB>;
  const Real b_energy = b.squaredNorm();
  const Real a_form = std::real(a.dot(Cy * a));
  if (!(b_energy > 0) || !(a_form > 0)) return Complex<Real>(0);
  return Ej * hJ.dot(a) * b.dot(hJ) / (b_energy * a_form);
}

/// E||beta b a^H y - hJ s_J||^2 in closed form:
/// |beta|^2 ||b||^2 a^H Cy a + Ej ||hJ||^2 - 2 Re{beta Ej (hJ^H b)(a^H hJ)}.
template <typename DerivedB, typename DerivedA, typename DerivedC, typename DerivedJ>
RealOf<DerivedB> jammer_objective(Complex<RealOf<DerivedB>> beta, const Eigen::MatrixBase<DerivedB>& b,
                                  const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedC>& Cy,
                                  const Eigen::MatrixBase<DerivedJ>& hJ, RealOf<DerivedB> Ej) {
  const auto a_form = std::real(a.dot(Cy * a));
  return std::norm(beta) * b.squaredNorm() * a_form + Ej * hJ.squaredNorm() -
         2 * std::real(beta * Ej * hJ.dot(b) * a.dot(hJ));
}

/// Objective after optimizing beta, in separated form
/// Ej ||hJ||^2 - Ej^2 (|hJ^H b|^2 / ||b||^2) (|hJ^H a|^2 / a^H Cy a).
template <typename DerivedB, typename DerivedA, typename DerivedC, typename DerivedJ>
RealOf<DerivedB> optimized_jammer_objective(const Eigen::MatrixBase<DerivedB>& b, const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedC>& Cy,
                                            const Eigen::MatrixBase<DerivedJ>& hJ, RealOf<DerivedB> Ej) {
  using Real = RealOf<DerivedB>;
  const Real base = Ej * hJ.squaredNorm();
  const Real b_energy = b.squaredNorm();
  const Real a_form = std::real(a.dot(Cy * a));
  if (!(b_energy > 0) || !(a_form > 0)) return base;
  return base - Ej * Ej * (std::norm(hJ.dot(b)) / b_energy) * (std::norm(hJ.dot(a)) / a_form);
}

/// Builds the clusterwise transform. Each cluster uses the matching diagonal
/// block of Cy and slice of hJ; finite alphabets quantize the unconstrained
/// solution componentwise and re-optimize beta.
template <typename DerivedH, typename DerivedJ>
AnalogTransform<RealOf<DerivedH>> build_transform(const Eigen::MatrixBase<DerivedH>& H,
                                                  const Eigen::MatrixBase<DerivedJ>& hJ, RealOf<DerivedH> Es,
                                                  RealOf<DerivedH> Ej, RealOf<DerivedH> N0, Index cluster_size,
                                                  const Alphabet& alphabet) {
  using Real = RealOf<DerivedH>;
  alphabet.validate();
  const Index B = H.rows();
  if (cluster_size < 1 || B % cluster_size != 0)
    throw ConfigError("cluster size " + std::to_string(cluster_size) + " does not divide B = " + std::to_string(B));
  if (hJ.size() != B) throw ConfigError("jammer channel length does not match H");

  AnalogTransform<Real> T;
  T.cluster_size = cluster_size;
  T.alphabet = alphabet;
  const Index C = B / cluster_size;
  T.blocks.reserve(static_cast<std::size_t>(C));
  for (Index c = 0; c < C; ++c) {
    const auto Hc = H.middleRows(c * cluster_size, cluster_size);
    const CVector<Real> hc = hJ.segment(c * cluster_size, cluster_size);
    const CMatrix<Real> Cc = covariance(Hc, hc, Es, Ej, N0);
    auto block = unconstrained_solution(Cc, hc, Ej);
    if (alphabet.finite()) {
      block.b = quantize_vector(block.b, alphabet);
      block.a = quantize_vector(block.a, alphabet);
      block.beta = optimal_beta(block.b, block.a, Cc, hc, Ej);
    }
    T.blocks.push_back(std::move(block));
  }
  return T;
}

/// Sum over clusters of the closed-form jammer objective at each block's beta.
/// For blocks built by build_transform this is the beta-optimized value.
template <typename Real, typename DerivedH, typename DerivedJ>
Real residual_jammer_mse(const AnalogTransform<Real>& T, const Eigen::MatrixBase<DerivedH>& H,
                         const Eigen::MatrixBase<DerivedJ>& hJ, Real Es, Real Ej, Real N0) {
  const Index S = T.cluster_size;
  Real total = 0;
  for (Index c = 0; c < T.num_clusters(); ++c) {
    const auto& blk = T.blocks[static_cast<std::size_t>(c)];
    const auto Hc = H.middleRows(c * S, S);
    const CVector<Real> hc = hJ.segment(c * S, S);
    const CMatrix<Real> Cc = covariance(Hc, hc, Es, Ej, N0);
    total += jammer_objective(blk.beta, blk.b, blk.a, Cc, hc, Ej);
  }
  return total;
}

}  // namespace hermit
