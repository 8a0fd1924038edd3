#pragma once

// Command-line front end: CSV matrix I/O, run configuration and the four
// commands (estimate, coverage, rate, identify).
//
// Exit codes: 0 success, 2 user or input error, 3 internal numeric failure.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "factorcov/matrix.hpp"
#include "factorcov/simulation.hpp"
#include "factorcov/threshold.hpp"

namespace factorcov::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 2;
inline constexpr int kExitNumericError = 3;

/// Bad input file or bad configuration; maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvMatrix {
  Matrix values;
  std::vector<std::string> header;  // empty when the file had none
};

/// Reads a comma-separated numeric matrix. The first line is taken as a
/// header when none of its cells parses as a number.
CsvMatrix read_matrix_csv(const std::string& path);
CsvMatrix parse_matrix_csv(std::istream& in, const std::string& source);

/// Writes entries with 17 significant digits so they read back exactly.
void write_matrix_csv(const std::string& path, const Matrix& m);

/// "out/sigma.csv" -> "out/sigma.json".
std::string sidecar_path(const std::string& output_path);

enum class Command { kEstimate, kCoverage, kRate, kIdentify };

struct RunConfig {
  Command command = Command::kEstimate;
  std::optional<std::string> input_path;
  std::string output_path;
  std::size_t k = 3;

  std::string rule = "plugin";  // plugin | cv | fixed
  double c0 = 1.1;
  double alpha = 0.05;
  std::size_t folds = 5;
  std::vector<double> cv_grid = CrossValidationRule{}.grid;
  double fixed_c = 0.0;
  bool demean = false;
  bool transpose = false;
  bool eigen_floor = false;

  // Simulation commands.
  DGPSpec dgp;
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string axis = "n";           // rate: n | p
  std::vector<std::size_t> grid;    // rate grid, or the p grid for identify
};

/// Overlays the keys of a JSON config file onto `config`. Unknown keys and
/// ill-typed values raise InputError.
void apply_config_file(const std::string& path, RunConfig& config);

ThresholdRule threshold_rule(const RunConfig& config);

int run_estimate(const RunConfig& config, std::ostream& out);
int run_experiment(const RunConfig& config, std::ostream& out);

/// Parses argv and dispatches; every exception is mapped to an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace factorcov::cli
