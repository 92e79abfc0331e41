#include "hermit/cli.hpp"

#include "hermit/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace hermit::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string command;
  std::string config_path;
  std::string preset;
  int scale = 1;
  std::string out_dir = "results";
  std::uint64_t seed = 0;
  int jobs = 1;
  bool force = false;
  std::vector<std::string> methods;
  std::vector<double> snr;
  double rho = 0.0;
  int bits = 0;
  Index cluster = 0;
  Index antennas = 0;
  Index users = 0;
  int ac = 0;
  std::string alphabet;
  std::string prop;
  int trials = 0;
  int channels = 0;
  int paths = 0;
  double spread = 0.0;
  int verbose = 0;
  bool quiet = false;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw IoError("failed writing " + path.string());
}

const char* kPlotRecipe = R"(# Plots results.csv as BER curves: python3 plot_ber.py [results.csv] [out.png]
import csv
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

src = sys.argv[1] if len(sys.argv) > 1 else "results.csv"
dst = sys.argv[2] if len(sys.argv) > 2 else "ber.png"
curves = defaultdict(list)
with open(src) as f:
    for row in csv.DictReader(f):
        curves[row["method"]].append((float(row["snr_db"]), float(row["ber"]),
                                      float(row["ci_low"]), float(row["ci_high"])))
for method, pts in curves.items():
    pts.sort()
    snr = [p[0] for p in pts]
    ber = [max(p[1], 1e-7) for p in pts]
    plt.semilogy(snr, ber, marker="o", label=method)
plt.xlabel("average receive SNR [dB]")
plt.ylabel("uncoded BER")
plt.grid(True, which="both", alpha=0.3)
plt.legend()
plt.savefig(dst, dpi=150, bbox_inches="tight")
)";

Method hermit_variant(AlphabetKind kind) {
  switch (kind) {
    case AlphabetKind::Phase:
      return Method::HermitPQ;
    case AlphabetKind::Quadrature:
      return Method::HermitQQ;
    case AlphabetKind::Unconstrained:
      break;
  }
  return Method::HermitUQ;
}

}  // namespace

ExperimentConfig preset_config(std::string_view name, int scale) {
  if (scale < 1) throw ConfigError("--scale must be >= 1");
  ExperimentConfig c;
  c.num_antennas = 256;
  c.num_users = 32;
  c.bits = 4;
  c.rho_db = 25.0;
  c.ac = 16;
  c.cluster_size = 64;
  c.propagation = Propagation::LoS;
  if (name == "fig3a") {
    c.methods = {Method::JL, Method::DEq, Method::HermitUQ, Method::HermitPQ, Method::HermitQQ};
  } else if (name == "fig4a") {
    c.methods = {Method::JL, Method::DEq, Method::HermitPQ, Method::HermitQQ};
    c.cluster_size = 32;
  } else if (name == "fig5a") {
    c.methods = {Method::JL, Method::DEq, Method::HermitQQ};
    c.alphabet = AlphabetKind::Quadrature;
  } else if (!name.empty()) {
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected fig3a, fig4a or fig5a)");
  }
  if (c.num_antennas % scale || c.num_users % scale || c.cluster_size % scale)
    throw ConfigError("--scale " + std::to_string(scale) + " must divide B, U and S of the preset");
  c.num_antennas /= scale;
  c.num_users /= scale;
  c.cluster_size /= scale;
  return c;
}

ParsedRun parse_and_validate(const std::vector<std::string>& args) {
  Flags f;
  CLI::App app{"Monte Carlo simulator for hybrid jammer mitigation in quantized massive MU-MIMO uplinks",
               "hermit_sim"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "run a BER experiment");
  CLI::App* chan = app.add_subcommand("channel", "dump one channel realization and its analog transform as JSON");

  for (CLI::App* sub : {run, chan}) {
    sub->add_option("--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--preset", f.preset, "fig3a | fig4a | fig5a");
    sub->add_option("--scale", f.scale, "divisor applied to the preset's B, U and S");
    sub->add_option("--out", f.out_dir, "output directory");
    sub->add_option("--seed", f.seed, "experiment seed");
    sub->add_option("--methods", f.methods, "comma list of JL, DEq, HERMIT, HERMIT-UQ, HERMIT-PQ, HERMIT-QQ")
        ->delimiter(',');
    sub->add_option("--snr", f.snr, "comma list of SNR points in dB")->delimiter(',');
    sub->add_option("--rho", f.rho, "relative jammer power in dB");
    sub->add_option("--bits", f.bits, "ADC resolution q");
    sub->add_option("--cluster", f.cluster, "cluster size S");
    sub->add_option("--antennas", f.antennas, "number of BS antennas B");
    sub->add_option("--users", f.users, "number of UEs U");
    sub->add_option("--ac", f.ac, "alphabet cardinality");
    sub->add_option("--alphabet", f.alphabet, "pq | qq | uq (variant used by the HERMIT method token)");
    sub->add_option("--prop", f.prop, "los | nlos");
    sub->add_option("--trials", f.trials, "trials per channel and SNR point");
    sub->add_option("--channels", f.channels, "channel realizations per SNR point");
    sub->add_option("--paths", f.paths, "non-LoS paths per entity");
    sub->add_option("--spread", f.spread, "non-LoS angular spread in degrees");
  }
  run->add_option("--jobs", f.jobs, "worker threads");
  run->add_flag("--force", f.force, "overwrite results in an existing output directory");
  run->add_flag("-v,--verbose", f.verbose, "progress output");
  run->add_flag("-q,--quiet", f.quiet, "no table output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  CLI::App* sub = run->parsed() ? run : chan;
  auto given = [sub](const char* name) { return sub->count(name) > 0; };

  ParsedRun out;
  auto& m = out.manifest;
  m.command = run->parsed() ? Command::Run : Command::Channel;
  m.preset = f.preset;
  m.scale = f.scale;
  m.out_dir = f.out_dir;
  m.jobs = f.jobs;
  m.force = f.force;
  m.verbosity = f.quiet ? 0 : 1 + f.verbose;
  if (m.jobs < 1) throw ConfigError("--jobs must be >= 1");

  ExperimentConfig c = preset_config(f.preset, f.scale);
  if (given("--config")) {
    m.config_path = f.config_path;
    std::ifstream in(f.config_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file " + f.config_path + ": " + e.what());
    }
    c = config_from_json(j, c);
  }

  if (given("--alphabet")) c.alphabet = parse_alphabet_kind(f.alphabet);
  if (given("--methods")) {
    c.methods.clear();
    for (const auto& name : f.methods) {
      std::string key = name;
      for (auto& ch : key) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      c.methods.push_back(key == "HERMIT" ? hermit_variant(c.alphabet) : parse_method(name));
    }
  } else if (given("--alphabet") && !given("--config") && f.preset.empty()) {
    c.methods = {Method::JL, Method::DEq, hermit_variant(c.alphabet)};
  }
  if (given("--seed")) c.seed = f.seed;
  if (given("--snr")) c.snr_db = f.snr;
  if (given("--rho")) c.rho_db = f.rho;
  if (given("--bits")) c.bits = f.bits;
  if (given("--cluster")) c.cluster_size = f.cluster;
  if (given("--antennas")) c.num_antennas = f.antennas;
  if (given("--users")) c.num_users = f.users;
  if (given("--ac")) c.ac = f.ac;
  if (given("--prop")) c.propagation = parse_propagation(f.prop);
  if (given("--trials")) c.trials_per_point = f.trials;
  if (given("--channels")) c.channels_per_point = f.channels;
  if (given("--paths")) c.nlos.num_paths = f.paths;
  if (given("--spread")) c.nlos.angular_spread_deg = f.spread;

  c.validate();
  out.config = c;
  return out;
}

namespace {

int execute_channel(const ParsedRun& run, std::ostream& out) {
  const auto& c = run.config;
  const auto ch0 = sweep_channel(c, 0);
  const auto ch = ch0.with_powers(calibrate_powers(ch0.H, ch0.hJ, c.snr_db.front(), c.rho_db));
  const auto T = build_transform(ch.H, ch.hJ, ch.Es, ch.Ej, ch.N0, c.cluster_size, Alphabet{c.alphabet, c.ac});
  std::error_code ec;
  fs::create_directories(run.manifest.out_dir, ec);
  if (ec) throw IoError("cannot create " + run.manifest.out_dir.string() + ": " + ec.message());
  write_file(run.manifest.out_dir / "channel.json", channel_to_json(ch).dump(1) + "\n");
  write_file(run.manifest.out_dir / "transform.json", transform_to_json(T).dump(1) + "\n");
  if (run.manifest.verbosity > 0)
    out << "wrote channel.json and transform.json to " << run.manifest.out_dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int execute(const ParsedRun& run, std::ostream& out) {
  if (run.manifest.command == Command::Channel) return execute_channel(run, out);

  const auto& m = run.manifest;
  const auto& c = run.config;
  const fs::path csv_path = m.out_dir / "results.csv";
  if (fs::exists(csv_path) && !m.force)
    throw IoError(csv_path.string() + " exists; pass --force to overwrite");
  std::error_code ec;
  fs::create_directories(m.out_dir, ec);
  if (ec) throw IoError("cannot create " + m.out_dir.string() + ": " + ec.message());

  const auto started = std::chrono::steady_clock::now();
  ProgressCallback progress;
  if (m.verbosity > 1)
    progress = [](std::size_t done, std::size_t total) {
      std::fprintf(stderr, "\r%zu / %zu work items", done, total);
      if (done == total) std::fputc('\n', stderr);
    };
  const auto result = sweep(c, m.jobs, progress);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  write_file(csv_path, to_csv(result.curves));

  const double step = optimal_step_size(c.bits);
  const auto bp = bussgang_characterize(c.bits, step);
  nlohmann::json meta = {
      {"config", config_to_json(c)},
      {"preset", m.preset},
      {"scale", m.scale},
      {"jobs", m.jobs},
      {"quantizer", {{"bits", c.bits}, {"step", step}, {"bussgang_gain", bp.gain}, {"distortion", bp.distortion}}},
      {"versions",
       {{"hermit", HERMIT_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__}}},
      {"wall_time_s", wall}};
  write_file(m.out_dir / "metadata.json", meta.dump(2) + "\n");
  write_file(m.out_dir / "plot_ber.py", kPlotRecipe);

  if (m.verbosity > 0) {
    char line[128];
    std::snprintf(line, sizeof line, "%-10s", "SNR [dB]");
    out << line;
    for (const auto& curve : result.curves) {
      std::snprintf(line, sizeof line, "%12s", method_name(curve.method).c_str());
      out << line;
    }
    out << "\n";
    for (std::size_t p = 0; p < c.snr_db.size(); ++p) {
      std::snprintf(line, sizeof line, "%-10g", c.snr_db[p]);
      out << line;
      for (const auto& curve : result.curves) {
        std::snprintf(line, sizeof line, "%12.3e", curve.points[p].ber);
        out << line;
      }
      out << "\n";
    }
    out << "wrote " << csv_path.string() << " (" << wall << " s)\n";
  }
  return kExitOk;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return execute(parse_and_validate(args), out);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace hermit::cli
