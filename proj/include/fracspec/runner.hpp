#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "fracspec/config.hpp"
#include "fracspec/symbols.hpp"

namespace fracspec {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  ///< overrides [output] directory
  std::optional<std::uint64_t> seed;         ///< overrides [parameters] seed
  unsigned threads = 1;                      ///< 0 = hardware concurrency
};

/// Loads the config, runs its task and writes the report files.
/// Returns kExitSuccess, kExitCheckFailed for a failed condition check, or
/// kExitError after printing the diagnostic to `diagnostics`.
int run(const RunOptions& options, std::ostream& diagnostics);

/// Same, for an already parsed config; relative file references resolve against `base`.
int run(RunConfig config, const RunOptions& options, const std::filesystem::path& base, std::ostream& diagnostics);

/// The [problem] section as an elliptic problem.
EllipticProblem problem_from_config(const RunConfig& config, const std::filesystem::path& base = {});

/// "constant c", "scaled-decay c" or "bracket c power".
CoefficientSymbol coefficient_from_spec(const std::string& spec, double gamma);

/// CSV number format: scientific, 17 significant digits.
std::string format_number(double v);

}  // namespace fracspec
