#pragma once

#include "hermit/channel.hpp"
#include "hermit/converter.hpp"
#include "hermit/equalizer.hpp"
#include "hermit/transform.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hermit {

/// JL: jammerless reference. DEq: identity transform with jammer-aware
/// equalizer. HermitXX: adaptive analog transform with unconstrained, phase
/// or quadrature alphabet.
enum class Method { JL, DEq, HermitUQ, HermitPQ, HermitQQ };

std::string method_name(Method m);
/// Accepts the names produced by method_name (case-insensitive).
Method parse_method(std::string_view name);
/// Alphabet used by a method's analog transform, if any.
Alphabet method_alphabet(Method m, int ac);

struct ExperimentConfig {
  Index num_antennas = 256;
  Index num_users = 32;
  Propagation propagation = Propagation::LoS;
  NlosParams nlos;
  std::vector<Method> methods = {Method::JL, Method::DEq, Method::HermitUQ, Method::HermitPQ, Method::HermitQQ};
  int bits = 4;
  Index cluster_size = 64;
  int ac = 16;
  AlphabetKind alphabet = AlphabetKind::Quadrature;  // variant selected by the generic "HERMIT" method token
  double rho_db = 25.0;
  std::vector<double> snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};
  int trials_per_point = 200;
  int channels_per_point = 50;
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the violated constraint.
  void validate() const;
};

/// Everything a method needs to process one channel realization.
struct MethodPipeline {
  Method method = Method::JL;
  bool jammerless = false;
  AnalogTransform<double> transform;
  AdcModel adc;
  Eigen::MatrixXcd W;
};

MethodPipeline build_pipeline(Method method, const ChannelRealization& channel, int bits, Index cluster_size,
                              int ac);
std::vector<MethodPipeline> build_pipelines(const ChannelRealization& channel, const ExperimentConfig& config);

struct TrialOutput {
  std::vector<int> sent;                // transmitted symbol index per user
  std::vector<Detection> detections;    // one per pipeline
  std::vector<std::uint64_t> bit_errors;  // one per pipeline
};

/// One channel use: draws s (uniform over the constellation), s_J ~ CN(0, Ej)
/// and n ~ CN(0, N0 I) once, and runs every pipeline on the same draw.
/// Jammerless pipelines see y without the jammer term.
TrialOutput simulate_trial(const ChannelRealization& channel, std::span<const MethodPipeline> pipelines,
                           const Constellation& constellation, Rng& rng);

std::vector<std::uint64_t> run_trial(const ChannelRealization& channel, std::span<const MethodPipeline> pipelines,
                                     const Constellation& constellation, Rng& rng);

/// Error counts of all trials run on one channel at one SNR point.
struct TrialRecord {
  std::uint64_t experiment_seed = 0;
  std::size_t snr_index = 0;
  std::size_t channel_index = 0;
  std::size_t first_trial = 0;
  std::size_t num_trials = 0;
  std::uint64_t bits = 0;                 // per method
  std::vector<std::uint64_t> bit_errors;  // indexed like ExperimentConfig::methods
};

struct WilsonInterval {
  double low;
  double high;
};

/// 95 % Wilson score interval for `errors` out of `total`.
WilsonInterval wilson_interval(std::uint64_t errors, std::uint64_t total, double z = 1.959963984540054);

struct BerPoint {
  double snr_db = 0.0;
  std::uint64_t bits = 0;
  std::uint64_t bit_errors = 0;
  double ber = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct BerCurve {
  Method method = Method::JL;
  std::vector<BerPoint> points;
};

/// Sums records per (method, SNR point). Integer accounting; the order of
/// records does not matter.
std::vector<BerCurve> aggregate(const ExperimentConfig& config, std::span<const TrialRecord> records);

/// Full width of the 95 % CI of the mean per-channel BER difference between
/// methods i and j (indices into config.methods) at one SNR point.
double paired_ci_width(std::span<const TrialRecord> records, std::size_t snr_index, std::size_t i, std::size_t j);

struct SweepResult {
  std::vector<BerCurve> curves;
  std::vector<TrialRecord> records;
};

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/// Channels are drawn once per channel index and shared by all SNR points.
/// Work items (SNR point, channel) run on `jobs` threads; results do not
/// depend on the thread count.
SweepResult sweep(const ExperimentConfig& config, int jobs = 1, const ProgressCallback& progress = {});

ChannelRealization sweep_channel(const ExperimentConfig& config, std::size_t channel_index);

/// method,snr_db,bits,bit_errors,ber,ci_low,ci_high
std::string to_csv(std::span<const BerCurve> curves);

}  // namespace hermit
