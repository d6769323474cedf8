#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fracspec {

/// Sectioned key-value run configuration ([problem], [task], [parameters], [output]).
/// Every lookup records the effective value, defaults included, so a report
/// can carry the fully resolved configuration.
class RunConfig {
 public:
  using Sections = std::map<std::string, std::map<std::string, std::string>>;

  static RunConfig load(const std::filesystem::path& path);
  static RunConfig parse(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  /// Overrides (or adds) a value, as the command-line flags do.
  void set(const std::string& section, const std::string& key, const std::string& value);

  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const;
  std::string required_text(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key, double fallback) const;
  long long integer(const std::string& section, const std::string& key, long long fallback) const;
  std::uint64_t seed(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& section, const std::string& key, bool fallback) const;
  /// "re", "(re,im)" or "re+imi"-free forms accepted by std::complex extraction.
  std::complex<double> complex(const std::string& section, const std::string& key, std::complex<double> fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key,
                              const std::vector<double>& fallback) const;
  /// Rows separated by ';', entries by whitespace: "2 1; 1 2".
  Eigen::MatrixXd matrix(const std::string& section, const std::string& key) const;

  const Sections& raw() const { return values_; }
  const Sections& resolved() const { return resolved_; }

 private:
  Sections values_;
  mutable Sections resolved_;

  std::optional<std::string> lookup(const std::string& section, const std::string& key) const;
  void record(const std::string& section, const std::string& key, const std::string& value) const;
};

/// Parses "re" or "(re,im)".
std::complex<double> parse_complex(const std::string& text);
std::vector<double> parse_numbers(const std::string& text);
Eigen::MatrixXd parse_matrix(const std::string& text);
/// Whitespace-separated rows, one per line; '#' starts a comment.
Eigen::MatrixXd read_matrix_file(const std::filesystem::path& path);

}  // namespace fracspec
