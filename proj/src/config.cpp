#include "fracspec/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fracspec/errors.hpp"

namespace fracspec {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string key_name(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  std::istringstream in(t);
  in.imbue(std::locale::classic());
  double v;
  if (!(in >> v) || !(in >> std::ws).eof()) throw ConfigurationError("not a number: '" + t + "'");
  return v;
}

}  // namespace

std::complex<double> parse_complex(const std::string& text) {
  const std::string t = trim(text);
  std::istringstream in(t);
  in.imbue(std::locale::classic());
  std::complex<double> z;
  if (!(in >> z) || !(in >> std::ws).eof()) throw ConfigurationError("not a complex number: '" + t + "'");
  return z;
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::string spaced = text;
  for (char& c : spaced)
    if (c == ',') c = ' ';
  std::istringstream in(spaced);
  std::string token;
  while (in >> token) out.push_back(parse_double(token));
  return out;
}

Eigen::MatrixXd parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string row;
  while (std::getline(in, row, ';')) {
    if (trim(row).empty()) continue;
    rows.push_back(parse_numbers(row));
  }
  if (rows.empty()) throw ConfigurationError("empty matrix");
  const auto cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ConfigurationError("ragged matrix rows");
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

Eigen::MatrixXd read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open matrix file " + path.string());
  std::string line, joined;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    joined += line + ";";
  }
  return parse_matrix(joined);
}

RunConfig RunConfig::parse(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigurationError("malformed config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig config;
  for (const auto& [section, entries] : tree) {
    if (entries.empty()) throw ConfigurationError("malformed config: key '" + section + "' outside a section");
    for (const auto& [key, value] : entries) config.values_[section][key] = trim(value.data());
  }
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::optional<std::string> RunConfig::lookup(const std::string& section, const std::string& key) const {
  const auto s = values_.find(section);
  if (s == values_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

void RunConfig::record(const std::string& section, const std::string& key, const std::string& value) const {
  resolved_[section][key] = value;
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
  return lookup(section, key).has_value();
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  values_[section][key] = value;
}

std::string RunConfig::text(const std::string& section, const std::string& key, const std::string& fallback) const {
  const std::string value = lookup(section, key).value_or(fallback);
  record(section, key, value);
  return value;
}

std::string RunConfig::required_text(const std::string& section, const std::string& key) const {
  const auto value = lookup(section, key);
  if (!value) throw ConfigurationError(key_name(section, key) + ": missing");
  record(section, key, *value);
  return *value;
}

double RunConfig::number(const std::string& section, const std::string& key, double fallback) const {
  const auto value = lookup(section, key);
  if (!value) {
    std::ostringstream s;
    s.precision(17);
    s << fallback;
    record(section, key, s.str());
    return fallback;
  }
  record(section, key, *value);
  try {
    return parse_double(*value);
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(key_name(section, key) + ": " + e.what());
  }
}

long long RunConfig::integer(const std::string& section, const std::string& key, long long fallback) const {
  const auto value = lookup(section, key);
  if (!value) {
    record(section, key, std::to_string(fallback));
    return fallback;
  }
  record(section, key, *value);
  long long out = 0;
  const std::string t = trim(*value);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigurationError(key_name(section, key) + ": not an integer: '" + t + "'");
  return out;
}

std::uint64_t RunConfig::seed(const std::string& section, const std::string& key, std::uint64_t fallback) const {
  const auto value = lookup(section, key);
  if (!value) {
    record(section, key, std::to_string(fallback));
    return fallback;
  }
  record(section, key, *value);
  try {
    std::size_t used = 0;
    const std::string t = trim(*value);
    const std::uint64_t out = std::stoull(t, &used, 0);
    if (used != t.size()) throw std::invalid_argument(t);
    return out;
  } catch (const std::exception&) {
    throw ConfigurationError(key_name(section, key) + ": not an unsigned 64-bit seed: '" + *value + "'");
  }
}

bool RunConfig::flag(const std::string& section, const std::string& key, bool fallback) const {
  const std::string t = text(section, key, fallback ? "true" : "false");
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigurationError(key_name(section, key) + ": not a boolean: '" + t + "'");
}

std::complex<double> RunConfig::complex(const std::string& section, const std::string& key,
                                        std::complex<double> fallback) const {
  const auto value = lookup(section, key);
  if (!value) {
    std::ostringstream s;
    s.precision(17);
    s << fallback;
    record(section, key, s.str());
    return fallback;
  }
  record(section, key, *value);
  try {
    return parse_complex(*value);
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(key_name(section, key) + ": " + e.what());
  }
}

std::vector<double> RunConfig::numbers(const std::string& section, const std::string& key,
                                       const std::vector<double>& fallback) const {
  const auto value = lookup(section, key);
  if (!value) {
    std::ostringstream s;
    s.precision(17);
    for (std::size_t i = 0; i < fallback.size(); ++i) s << (i ? " " : "") << fallback[i];
    record(section, key, s.str());
    return fallback;
  }
  record(section, key, *value);
  try {
    return parse_numbers(*value);
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(key_name(section, key) + ": " + e.what());
  }
}

Eigen::MatrixXd RunConfig::matrix(const std::string& section, const std::string& key) const {
  const std::string value = required_text(section, key);
  try {
    return parse_matrix(value);
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(key_name(section, key) + ": " + e.what());
  }
}

}  // namespace fracspec
