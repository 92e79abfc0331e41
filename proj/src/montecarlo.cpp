#include "hermit/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace hermit {

namespace {

enum Stream : std::uint64_t { kChannelStream = 11, kTrialStream = 12 };

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::JL:
      return "JL";
    case Method::DEq:
      return "DEq";
    case Method::HermitUQ:
      return "HERMIT-UQ";
    case Method::HermitPQ:
      return "HERMIT-PQ";
    case Method::HermitQQ:
      return "HERMIT-QQ";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  const std::string key = upper(name);
  for (const auto m : {Method::JL, Method::DEq, Method::HermitUQ, Method::HermitPQ, Method::HermitQQ})
    if (upper(method_name(m)) == key) return m;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

Alphabet method_alphabet(Method m, int ac) {
  switch (m) {
    case Method::HermitPQ:
      return Alphabet::phase(ac);
    case Method::HermitQQ:
      return Alphabet::quadrature(ac);
    default:
      return Alphabet::unconstrained();
  }
}

void ExperimentConfig::validate() const {
  if (num_antennas < 1) throw ConfigError("B must be >= 1");
  if (num_users < 1) throw ConfigError("U must be >= 1");
  if (cluster_size < 1 || num_antennas % cluster_size != 0)
    throw ConfigError("cluster size S = " + std::to_string(cluster_size) + " must divide B = " +
                      std::to_string(num_antennas));
  if (bits < kMinBits || bits > kMaxBits) throw ConfigError("ADC resolution q must be in [1, 16]");
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (snr_db.empty()) throw ConfigError("SNR grid must not be empty");
  if (trials_per_point < 1) throw ConfigError("trials_per_point must be >= 1");
  if (channels_per_point < 1) throw ConfigError("channels_per_point must be >= 1");
  if (!std::isfinite(rho_db)) throw ConfigError("rho must be finite (JL covers the jammerless case)");
  for (const double s : snr_db)
    if (!std::isfinite(s)) throw ConfigError("SNR values must be finite");
  if (nlos.num_paths < 1) throw ConfigError("non-LoS path count must be >= 1");
  if (!(nlos.angular_spread_deg >= 0.0)) throw ConfigError("angular spread must be >= 0");
  Alphabet{alphabet, ac}.validate();
  for (const auto m : methods) method_alphabet(m, ac);
  for (std::size_t i = 0; i < methods.size(); ++i)
    for (std::size_t j = i + 1; j < methods.size(); ++j)
      if (methods[i] == methods[j]) throw ConfigError("method " + method_name(methods[i]) + " listed twice");
  PlacementSpec spec;
  spec.num_users = num_users;
  spec.validate();
}

MethodPipeline build_pipeline(Method method, const ChannelRealization& ch, int bits, Index cluster_size, int ac) {
  MethodPipeline p;
  p.method = method;
  p.jammerless = method == Method::JL;
  const double Ej = p.jammerless ? 0.0 : ch.Ej;
  const Eigen::MatrixXcd Cy = covariance(ch.H, ch.hJ, ch.Es, Ej, ch.N0);

  if (method == Method::JL || method == Method::DEq)
    p.transform = AnalogTransform<double>::identity(ch.num_antennas());
  else
    p.transform = build_transform(ch.H, ch.hJ, ch.Es, Ej, ch.N0, cluster_size, method_alphabet(method, ac));

  p.adc = AdcModel::make(bits, gain_control(p.transform, Cy));
  p.W = lmmse_matrix(ch.H, ch.hJ, p.transform, ch.Es, Ej, ch.N0, p.adc.bussgang_gain, p.adc.distortion_var,
                     p.adc.gains);
  return p;
}

std::vector<MethodPipeline> build_pipelines(const ChannelRealization& channel, const ExperimentConfig& config) {
  std::vector<MethodPipeline> out;
  out.reserve(config.methods.size());
  for (const auto m : config.methods)
    out.push_back(build_pipeline(m, channel, config.bits, config.cluster_size, config.ac));
  return out;
}

TrialOutput simulate_trial(const ChannelRealization& ch, std::span<const MethodPipeline> pipelines,
                           const Constellation& constellation, Rng& rng) {
  const Index U = ch.num_users();
  const Index B = ch.num_antennas();
  TrialOutput out;
  std::uniform_int_distribution<int> pick(0, constellation.size() - 1);
  Eigen::VectorXcd s(U);
  std::vector<std::uint8_t> sent_bits;
  for (Index u = 0; u < U; ++u) {
    const int k = pick(rng);
    out.sent.push_back(k);
    s(u) = constellation.points[static_cast<std::size_t>(k)];
    append_bits(k, constellation.bits_per_symbol, sent_bits);
  }
  const auto s_jam = complex_normal(rng, ch.Ej);
  const Eigen::VectorXcd n = complex_normal_vector(rng, B, ch.N0);

  const Eigen::VectorXcd y_clean = ch.H * s + n;
  const Eigen::VectorXcd y = y_clean + ch.hJ * s_jam;

  for (const auto& p : pipelines) {
    const Eigen::VectorXcd yP = p.transform.apply(p.jammerless ? y_clean : y);
    const Eigen::VectorXcd r = convert(yP, p.adc);
    auto det = hard_detect(estimate(p.W, r), constellation);
    std::uint64_t errors = 0;
    for (std::size_t i = 0; i < sent_bits.size(); ++i) errors += det.bits[i] != sent_bits[i];
    out.bit_errors.push_back(errors);
    out.detections.push_back(std::move(det));
  }
  return out;
}

std::vector<std::uint64_t> run_trial(const ChannelRealization& channel, std::span<const MethodPipeline> pipelines,
                                     const Constellation& constellation, Rng& rng) {
  return simulate_trial(channel, pipelines, constellation, rng).bit_errors;
}

WilsonInterval wilson_interval(std::uint64_t errors, std::uint64_t total, double z) {
  if (total == 0) return {0.0, 1.0};
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(errors) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  // the bounds are exactly 0 and 1 at the extremes; the formula only cancels to rounding error
  return {errors == 0 ? 0.0 : std::max(0.0, centre - half), errors == total ? 1.0 : std::min(1.0, centre + half)};
}

std::vector<BerCurve> aggregate(const ExperimentConfig& config, std::span<const TrialRecord> records) {
  const std::size_t M = config.methods.size();
  const std::size_t P = config.snr_db.size();
  std::vector<std::uint64_t> bits(P, 0);
  std::vector<std::uint64_t> errors(M * P, 0);
  for (const auto& rec : records) {
    if (rec.snr_index >= P || rec.bit_errors.size() != M) throw ConfigError("record does not match configuration");
    bits[rec.snr_index] += rec.bits;
    for (std::size_t m = 0; m < M; ++m) errors[m * P + rec.snr_index] += rec.bit_errors[m];
  }

  std::vector<BerCurve> curves;
  for (std::size_t m = 0; m < M; ++m) {
    BerCurve curve;
    curve.method = config.methods[m];
    for (std::size_t p = 0; p < P; ++p) {
      BerPoint pt;
      pt.snr_db = config.snr_db[p];
      pt.bits = bits[p];
      pt.bit_errors = errors[m * P + p];
      pt.ber = pt.bits ? static_cast<double>(pt.bit_errors) / static_cast<double>(pt.bits) : 0.0;
      const auto ci = wilson_interval(pt.bit_errors, pt.bits);
      pt.ci_low = ci.low;
      pt.ci_high = ci.high;
      curve.points.push_back(pt);
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

double paired_ci_width(std::span<const TrialRecord> records, std::size_t snr_index, std::size_t i, std::size_t j) {
  std::vector<double> diff;
  for (const auto& rec : records) {
    if (rec.snr_index != snr_index || rec.bits == 0) continue;
    diff.push_back((static_cast<double>(rec.bit_errors.at(i)) - static_cast<double>(rec.bit_errors.at(j))) /
                   static_cast<double>(rec.bits));
  }
  if (diff.size() < 2) return 0.0;
  double mean = 0.0;
  for (const double d : diff) mean += d;
  mean /= static_cast<double>(diff.size());
  double var = 0.0;
  for (const double d : diff) var += (d - mean) * (d - mean);
  var /= static_cast<double>(diff.size() - 1);
  return 2.0 * 1.959963984540054 * std::sqrt(var / static_cast<double>(diff.size()));
}

ChannelRealization sweep_channel(const ExperimentConfig& config, std::size_t channel_index) {
  ChannelConfig cc;
  cc.num_antennas = config.num_antennas;
  cc.num_users = config.num_users;
  cc.propagation = config.propagation;
  cc.nlos = config.nlos;
  return generate_channel(cc, derive_seed({config.seed, kChannelStream, channel_index}));
}

SweepResult sweep(const ExperimentConfig& config, int jobs, const ProgressCallback& progress) {
  config.validate();
  const auto num_channels = static_cast<std::size_t>(config.channels_per_point);
  const auto num_points = config.snr_db.size();
  const auto trials = static_cast<std::size_t>(config.trials_per_point);
  const auto constellation = Constellation::qam16(1.0);
  const std::uint64_t bits_per_trial =
      static_cast<std::uint64_t>(config.num_users) * static_cast<std::uint64_t>(constellation.bits_per_symbol);

  std::vector<ChannelRealization> channels(num_channels);
  for (std::size_t c = 0; c < num_channels; ++c) channels[c] = sweep_channel(config, c);

  const std::size_t total = num_points * num_channels;
  std::vector<TrialRecord> records(total);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto worker = [&] {
    for (std::size_t item = next++; item < total; item = next++) {
      try {
        const std::size_t p = item / num_channels;
        const std::size_t c = item % num_channels;
        const auto powers = calibrate_powers(channels[c].H, channels[c].hJ, config.snr_db[p], config.rho_db);
        const auto ch = channels[c].with_powers(powers);
        const auto pipelines = build_pipelines(ch, config);

        TrialRecord rec;
        rec.experiment_seed = config.seed;
        rec.snr_index = p;
        rec.channel_index = c;
        rec.first_trial = 0;
        rec.num_trials = trials;
        rec.bits = bits_per_trial * trials;
        rec.bit_errors.assign(pipelines.size(), 0);
        for (std::size_t t = 0; t < trials; ++t) {
          Rng rng(derive_seed({config.seed, kTrialStream, p, c, t}));
          const auto errs = run_trial(ch, pipelines, constellation, rng);
          for (std::size_t m = 0; m < errs.size(); ++m) rec.bit_errors[m] += errs[m];
        }
        records[item] = std::move(rec);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = total;
      }
      const auto finished = ++done;
      if (progress) {
        std::lock_guard lock(error_mutex);
        progress(finished, total);
      }
    }
  };

  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  SweepResult result;
  result.curves = aggregate(config, records);
  result.records = std::move(records);
  return result;
}

std::string to_csv(std::span<const BerCurve> curves) {
  std::string out = "method,snr_db,bits,bit_errors,ber,ci_low,ci_high\n";
  char line[256];
  for (const auto& curve : curves) {
    for (const auto& pt : curve.points) {
      std::snprintf(line, sizeof line, "%s,%.6g,%llu,%llu,%.9e,%.9e,%.9e\n", method_name(curve.method).c_str(),
                    pt.snr_db, static_cast<unsigned long long>(pt.bits),
                    static_cast<unsigned long long>(pt.bit_errors), pt.ber, pt.ci_low, pt.ci_high);
      out += line;
    }
  }
  return out;
}

}  // namespace hermit
