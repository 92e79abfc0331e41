#include "hermit/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hermit {

namespace {

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

enum Stream : std::uint64_t { kPlacementStream = 1, kPathStream, kPowerStream };

}  // namespace

void ArrayGeometry::validate() const {
  if (num_antennas < 1) throw ConfigError("array needs at least one antenna");
  if (!(element_spacing > 0.0)) throw ConfigError("element spacing must be positive");
}

void PlacementSpec::validate() const {
  if (num_users < 1) throw ConfigError("placement needs at least one user");
  if (!(min_separation_deg >= 0.0)) throw ConfigError("minimum angular separation must be >= 0");
  if (!(min_distance_m > 0.0) || !(max_distance_m >= min_distance_m))
    throw ConfigError("distance range must satisfy 0 < min <= max");
  if (!(sector_halfwidth_deg > 0.0)) throw ConfigError("sector half-width must be positive");
  // n points with pairwise gap >= sep need an interval of length (n-1) sep
  const double needed = static_cast<double>(num_users) * min_separation_deg;
  if (needed > 2.0 * sector_halfwidth_deg)
    throw ConfigError("placement infeasible: " + std::to_string(num_users + 1) +
                      " entities cannot be separated by " + std::to_string(min_separation_deg) +
                      " deg within the sector");
}

std::vector<Placement> place_entities(const PlacementSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(derive_seed({seed, kPlacementStream}));
  std::uniform_real_distribution<double> azimuth(-spec.sector_halfwidth_deg,
                                                 spec.sector_halfwidth_deg);
  std::uniform_real_distribution<double> distance(spec.min_distance_m, spec.max_distance_m);

  const auto count = static_cast<std::size_t>(spec.num_users) + 1;
  std::vector<Placement> out;
  out.reserve(count);
  while (out.size() < count) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const double theta = azimuth(rng);
      const double d = distance(rng);
      placed = std::all_of(out.begin(), out.end(), [&](const Placement& p) {
        return std::abs(p.azimuth_deg - theta) >= spec.min_separation_deg;
      });
      if (placed) out.push_back({theta, d});
    }
    if (!placed)
      throw ConfigError("placement failed after " + std::to_string(kMaxPlacementAttempts) +
                        " attempts for entity " + std::to_string(out.size()));
  }
  return out;
}

Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, double azimuth_deg) {
  geom.validate();
  const double ramp = 2.0 * std::numbers::pi * geom.element_spacing * std::sin(deg_to_rad(azimuth_deg));
  Eigen::VectorXcd a(geom.num_antennas);
  for (Index b = 0; b < geom.num_antennas; ++b) a(b) = std::polar(1.0, ramp * static_cast<double>(b));
  return a;
}

double path_amplitude(double distance_m) {
  if (!(distance_m > 0.0)) throw ConfigError("distance must be positive");
  return 1.0 / distance_m;
}

Eigen::VectorXcd los_channel(const ArrayGeometry& geom, double azimuth_deg, double distance_m) {
  return path_amplitude(distance_m) * steering_vector(geom, azimuth_deg);
}

Eigen::VectorXcd nlos_channel(const ArrayGeometry& geom, double azimuth_deg, double distance_m,
                              const NlosParams& params, std::uint64_t seed) {
  if (params.num_paths < 1) throw ConfigError("non-LoS channel needs at least one path");
  if (!(params.angular_spread_deg >= 0.0)) throw ConfigError("angular spread must be >= 0");
  Rng rng(derive_seed({seed, kPathStream}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double path_var = 1.0 / params.num_paths;
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(geom.num_antennas);
  for (int l = 0; l < params.num_paths; ++l) {
    const auto gain = complex_normal(rng, path_var);
    // Laplace(0, spread) via inverse CDF
    const double u = unit(rng) - 0.5;
    const double offset =
        u == 0.0 ? 0.0 : -params.angular_spread_deg * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
    h += gain * steering_vector(geom, azimuth_deg + offset);
  }
  return path_amplitude(distance_m) * h;
}

Eigen::MatrixXcd apply_power_control(const Eigen::MatrixXcd& H, std::span<const double> offsets_db) {
  if (static_cast<Index>(offsets_db.size()) != H.cols())
    throw ConfigError("power control needs one offset per user");
  const Eigen::VectorXd energy = H.colwise().squaredNorm().transpose();
  if ((energy.array() <= 0.0).any()) throw NumericalError("power control: channel matrix has a zero column");
  const double mean_energy = energy.mean();

  Eigen::MatrixXcd out = H;
  for (Index u = 0; u < H.cols(); ++u) {
    const double offset = std::clamp(offsets_db[static_cast<std::size_t>(u)], -3.0, 3.0);
    out.col(u) *= std::sqrt(mean_energy * db_to_linear(offset) / energy(u));
  }
  return out;
}

Eigen::MatrixXcd apply_power_control(const Eigen::MatrixXcd& H, Rng& rng) {
  std::uniform_real_distribution<double> offset(-3.0, 3.0);
  std::vector<double> offsets(static_cast<std::size_t>(H.cols()));
  for (auto& x : offsets) x = offset(rng);
  return apply_power_control(H, offsets);
}

Powers calibrate_powers(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& hJ, double snr_db,
                        double rho_db) {
  const double h_energy = H.squaredNorm();
  const double j_energy = hJ.squaredNorm();
  if (!(h_energy > 0.0)) throw NumericalError("calibration: user channel matrix is zero");
  if (!(j_energy > 0.0)) throw NumericalError("calibration: jammer channel is zero");

  Powers p;
  p.Es = 1.0;
  p.N0 = p.Es * h_energy / (static_cast<double>(H.rows()) * db_to_linear(snr_db));
  p.Ej = std::isinf(rho_db) && rho_db < 0.0
             ? 0.0
             : db_to_linear(rho_db) * p.Es * h_energy / (static_cast<double>(H.cols()) * j_energy);
  return p;
}

ChannelRealization ChannelRealization::with_powers(const Powers& p) const {
  ChannelRealization out = *this;
  out.Es = p.Es;
  out.Ej = p.Ej;
  out.N0 = p.N0;
  return out;
}

ChannelRealization generate_channel(const ChannelConfig& config, std::uint64_t seed) {
  const ArrayGeometry geom{config.num_antennas};
  geom.validate();
  PlacementSpec spec;
  spec.num_users = config.num_users;
  spec.sector_halfwidth_deg = geom.sector_halfwidth_deg;
  const auto placements = place_entities(spec, seed);

  auto channel_of = [&](std::size_t k) {
    const auto& p = placements[k];
    if (config.propagation == Propagation::LoS) return los_channel(geom, p.azimuth_deg, p.distance_m);
    return nlos_channel(geom, p.azimuth_deg, p.distance_m, config.nlos, derive_seed({seed, k}));
  };

  ChannelRealization out;
  Eigen::MatrixXcd H(config.num_antennas, config.num_users);
  for (Index u = 0; u < config.num_users; ++u) H.col(u) = channel_of(static_cast<std::size_t>(u));
  out.hJ = channel_of(static_cast<std::size_t>(config.num_users));

  Rng power_rng(derive_seed({seed, kPowerStream}));
  out.H = apply_power_control(H, power_rng);
  return out;
}

}  // namespace hermit
