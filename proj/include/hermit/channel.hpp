#pragma once

#include "hermit/common.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace hermit {

/// Uniform linear array facing a sector centred on broadside.
struct ArrayGeometry {
  Index num_antennas = 256;
  double element_spacing = 0.5;  // wavelengths
  double sector_halfwidth_deg = 60.0;

  void validate() const;
};

struct PlacementSpec {
  Index num_users = 32;
  double min_separation_deg = 1.0;
  double min_distance_m = 10.0;
  double max_distance_m = 100.0;
  double sector_halfwidth_deg = 60.0;

  void validate() const;
};

struct Placement {
  double azimuth_deg;
  double distance_m;
};

/// Places U users followed by one jammer (last entry). Each entity is drawn
/// uniformly in azimuth and distance and redrawn until it keeps the minimum
/// angular separation to all previously placed entities.
std::vector<Placement> place_entities(const PlacementSpec& spec, std::uint64_t seed);

/// Maximum number of redraws per entity before placement gives up.
inline constexpr int kMaxPlacementAttempts = 10000;

/// exp(i 2 pi spacing b sin(theta)) for b = 0..B-1; unit modulus entries.
Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, double azimuth_deg);

/// Free-space amplitude 1/d.
double path_amplitude(double distance_m);

Eigen::VectorXcd los_channel(const ArrayGeometry& geom, double azimuth_deg, double distance_m);

struct NlosParams {
  int num_paths = 20;
  double angular_spread_deg = 5.0;
};

/// Clustered non-line-of-sight channel: num_paths rays with i.i.d.
/// CN(0, 1/L) gains and Laplacian angular offsets around the nominal azimuth.
Eigen::VectorXcd nlos_channel(const ArrayGeometry& geom, double azimuth_deg, double distance_m,
                              const NlosParams& params, std::uint64_t seed);

/// Rescales every column to mean_power * 10^(offset_u/10), where mean_power is
/// the average column energy of H. Offsets are clamped to [-3, 3] dB.
Eigen::MatrixXcd apply_power_control(const Eigen::MatrixXcd& H, std::span<const double> offsets_db);
/// Same, with offsets drawn uniformly in [-3, 3] dB.
Eigen::MatrixXcd apply_power_control(const Eigen::MatrixXcd& H, Rng& rng);

struct Powers {
  double Es = 1.0;
  double Ej = 0.0;
  double N0 = 1.0;
};

/// Marks a jammerless calibration in calibrate_powers.
inline constexpr double kNoJammer = -std::numeric_limits<double>::infinity();

/// SNR = Es ||H||_F^2 / (B N0) and rho = U Ej ||hJ||^2 / (Es ||H||_F^2).
Powers calibrate_powers(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& hJ, double snr_db,
                        double rho_db);

enum class Propagation { LoS, NLoS };

struct ChannelRealization {
  Eigen::MatrixXcd H;   // B x U, column u is the channel of user u
  Eigen::VectorXcd hJ;  // B
  double Es = 1.0;
  double Ej = 0.0;
  double N0 = 1.0;

  Index num_antennas() const { return H.rows(); }
  Index num_users() const { return H.cols(); }
  ChannelRealization with_powers(const Powers& p) const;
};

struct ChannelConfig {
  Index num_antennas = 256;
  Index num_users = 32;
  Propagation propagation = Propagation::LoS;
  NlosParams nlos;
};

/// Draws user and jammer geometry, builds H and hJ and applies per-user power
/// control. Powers are left at Es = 1, Ej = 0, N0 = 1 until calibrated.
ChannelRealization generate_channel(const ChannelConfig& config, std::uint64_t seed);

}  // namespace hermit
