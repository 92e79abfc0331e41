#include "hermit/converter.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <mutex>
#include <numbers>

namespace hermit {

namespace {

void check_bits(int bits) {
  if (bits < kMinBits || bits > kMaxBits)
    throw ConfigError("ADC resolution must be in [1, 16] bits, got " + std::to_string(bits));
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// P(lo < x < hi) for x ~ N(0, 1), without cancellation in either tail.
double normal_mass(double lo, double hi) {
  constexpr double r = std::numbers::sqrt2;
  if (lo >= 0.0) return 0.5 * (std::erfc(lo / r) - std::erfc(hi / r));
  if (hi <= 0.0) return 0.5 * (std::erfc(-hi / r) - std::erfc(-lo / r));
  return 1.0 - 0.5 * (std::erfc(-lo / r) + std::erfc(hi / r));
}

// 10-point Gauss-Legendre rule on [-1, 1]
constexpr std::array<double, 5> kGlNodes = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                            0.8650633666889845, 0.9739065285171717};
constexpr std::array<double, 5> kGlWeights = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                              0.1494513491505806, 0.0666713443086881};

// Integral of (x - c)^2 phi(x) over [lo, hi], composite Gauss-Legendre.
double squared_error_integral(double lo, double hi, double c) {
  constexpr double kPiece = 0.125;
  const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / kPiece)));
  const double h = (hi - lo) / pieces;
  double total = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double mid = lo + (p + 0.5) * h;
    double s = 0.0;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      for (const double x : {mid - 0.5 * h * kGlNodes[i], mid + 0.5 * h * kGlNodes[i]})
        s += kGlWeights[i] * (x - c) * (x - c) * normal_pdf(x);
    }
    total += 0.5 * h * s;
  }
  return total;
}

// integration cutoff; the Gaussian mass beyond it is below 1e-40
constexpr double kTail = 13.5;

}  // namespace

double midrise(double x, int bits, double step) {
  const double half_levels = std::ldexp(1.0, bits - 1);
  const double j = std::clamp(std::floor(x / step), -half_levels, half_levels - 1.0);
  return step * (j + 0.5);
}

double quantizer_mse(int bits, double step) {
  check_bits(bits);
  if (!(step > 0.0)) throw ConfigError("quantizer step must be positive");
  const long half = 1L << (bits - 1);
  double total = 0.0;
  for (long j = -half; j < half; ++j) {
    const double lo = j == -half ? -kTail : std::max(j * step, -kTail);
    const double hi = j == half - 1 ? kTail : std::min((j + 1) * step, kTail);
    if (hi <= lo) continue;
    total += squared_error_integral(lo, hi, step * (static_cast<double>(j) + 0.5));
  }
  return total;
}

double optimal_step_size(int bits) {
  check_bits(bits);
  static std::array<double, kMaxBits + 1> cache{};
  static std::mutex mutex;
  {
    std::lock_guard lock(mutex);
    if (cache[static_cast<std::size_t>(bits)] > 0.0) return cache[static_cast<std::size_t>(bits)];
  }

  // golden-section search; the lower end is below the optimum for q = 16
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 1e-5, hi = 4.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = quantizer_mse(bits, x1), f2 = quantizer_mse(bits, x2);
  while (hi - lo > 1e-9) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = quantizer_mse(bits, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = quantizer_mse(bits, x2);
    }
  }
  const double step = 0.5 * (lo + hi);
  std::lock_guard lock(mutex);
  cache[static_cast<std::size_t>(bits)] = step;
  return step;
}

BussgangParams bussgang_characterize(int bits, double step) {
  check_bits(bits);
  if (!(step > 0.0)) throw ConfigError("quantizer step must be positive");
  const long half = 1L << (bits - 1);
  const double inf = std::numeric_limits<double>::infinity();
  double cross = 0.0;   // E[Q(x) x]
  double energy = 0.0;  // E[Q(x)^2]
  for (long j = -half; j < half; ++j) {
    const double lo = j == -half ? -inf : j * step;
    const double hi = j == half - 1 ? inf : (j + 1) * step;
    const double level = step * (static_cast<double>(j) + 0.5);
    const double pdf_lo = std::isinf(lo) ? 0.0 : normal_pdf(lo);
    const double pdf_hi = std::isinf(hi) ? 0.0 : normal_pdf(hi);
    cross += level * (pdf_lo - pdf_hi);
    energy += level * level * normal_mass(lo, hi);
  }
  return {cross, energy - cross * cross};
}

AdcModel AdcModel::make(int bits, Eigen::VectorXd gains) {
  AdcModel adc;
  adc.bits = bits;
  adc.step = optimal_step_size(bits);
  const auto bp = bussgang_characterize(bits, adc.step);
  adc.bussgang_gain = bp.gain;
  adc.distortion_var = bp.distortion;
  if ((gains.array() <= 0.0).any()) throw NumericalError("ADC gains must be positive");
  adc.gains = std::move(gains);
  return adc;
}

Eigen::VectorXcd convert(const Eigen::VectorXcd& yP, const AdcModel& adc) {
  if (yP.size() != adc.gains.size()) throw ConfigError("convert: input length does not match ADC count");
  Eigen::VectorXcd r(yP.size());
  for (Index k = 0; k < yP.size(); ++k) {
    const double g = adc.gains(k);
    r(k) = std::complex<double>(midrise(g * yP(k).real(), adc.bits, adc.step),
                                midrise(g * yP(k).imag(), adc.bits, adc.step)) /
           g;
  }
  return r;
}

}  // namespace hermit
