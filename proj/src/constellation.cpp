#include "hermit/equalizer.hpp"

#include <cmath>
#include <limits>

namespace hermit {

namespace {

// Gray label of the 2-bit level index 0..3 (most negative first)
constexpr int kGray2[4] = {0b00, 0b01, 0b11, 0b10};

}  // namespace

Constellation Constellation::qam16(double Es) {
  if (!(Es > 0.0)) throw ConfigError("constellation energy must be positive");
  Constellation c;
  c.bits_per_symbol = 4;
  c.energy = Es;
  c.points.resize(16);
  const double unit = std::sqrt(Es / 10.0);
  for (int i = 0; i < 4; ++i) {
    for (int q = 0; q < 4; ++q) {
      const int label = (kGray2[i] << 2) | kGray2[q];
      c.points[static_cast<std::size_t>(label)] = {unit * (2 * i - 3), unit * (2 * q - 3)};
    }
  }
  return c;
}

int Constellation::nearest(std::complex<double> z) const {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int k = 0; k < size(); ++k) {
    const double d = std::norm(z - points[static_cast<std::size_t>(k)]);
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  return best;
}

void append_bits(int symbol, int bits_per_symbol, std::vector<std::uint8_t>& out) {
  for (int b = bits_per_symbol - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((symbol >> b) & 1));
}

Detection hard_detect(const Eigen::VectorXcd& s_star, const Constellation& constellation) {
  Detection det;
  det.symbols.reserve(static_cast<std::size_t>(s_star.size()));
  det.bits.reserve(static_cast<std::size_t>(s_star.size() * constellation.bits_per_symbol));
  for (Index u = 0; u < s_star.size(); ++u) {
    const int k = constellation.nearest(s_star(u));
    det.symbols.push_back(k);
    append_bits(k, constellation.bits_per_symbol, det.bits);
  }
  return det;
}

}  // namespace hermit
