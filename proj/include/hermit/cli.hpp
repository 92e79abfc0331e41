#pragma once

#include "hermit/montecarlo.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hermit::cli {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitIo = 3, kExitNumerical = 4 };

enum class Command { Run, Channel };

struct RunManifest {
  Command command = Command::Run;
  std::optional<std::filesystem::path> config_path;
  std::string preset;
  int scale = 1;
  std::filesystem::path out_dir = "results";
  int jobs = 1;
  bool force = false;
  int verbosity = 1;
};

struct ParsedRun {
  RunManifest manifest;
  ExperimentConfig config;
};

/// Thrown by parse_and_validate for --help; carries the usage text.
class HelpRequested : public std::exception {
 public:
  explicit HelpRequested(std::string text) : text_(std::move(text)) {}
  const char* what() const noexcept override { return text_.c_str(); }

 private:
  std::string text_;
};

/// Parameter sets of the AC sweep (fig3a), cluster-size sweep (fig4a) and
/// jammer-power sweep (fig5a), with B, U and S divided by `scale`.
ExperimentConfig preset_config(std::string_view name, int scale = 1);

/// Arguments exclude the program name; the first one is the subcommand
/// (`run` or `channel`). Precedence: preset < config file < flags.
/// Throws ConfigError on any invalid combination.
ParsedRun parse_and_validate(const std::vector<std::string>& args);

/// Runs the experiment and writes results.csv, metadata.json and plot_ber.py
/// into the output directory. Refuses an existing results.csv unless forced.
int execute(const ParsedRun& run, std::ostream& out);

/// Full front end: parse, execute, and map exceptions onto exit codes.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hermit::cli
