#include "ocplab/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace ocplab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line, const std::string& key) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(line, "malformed value for '" + key + "': " + v);
  }
}

long long parse_integer(const std::string& v, int line, const std::string& key) {
  const double x = parse_double(v, line, key);
  if (x != std::floor(x) || std::abs(x) > 9e15)
    throw ConfigError(line, "expected an integer for '" + key + "': " + v);
  return static_cast<long long>(x);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  int alpha_line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const std::string stripped = trim(raw);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "expected 'key = value': " + stripped);
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (value.empty()) throw ConfigError(line, "missing value for '" + key + "'");
    if (key == "preset") {
      config.preset = value;
    } else if (key == "lambda") {
      config.lambda = parse_double(value, line, key);
      if (!(*config.lambda > 0.0)) throw ConfigError(line, "lambda must be positive");
    } else if (key == "alpha") {
      config.alpha = parse_double(value, line, key);
      alpha_line = line;
    } else if (key == "theta") {
      config.theta = parse_double(value, line, key);
      if (!(config.theta > 0.0 && config.theta < 1.0))
        throw ConfigError(line, "theta must lie in (0, 1)");
    } else if (key == "max_ndof") {
      config.max_ndof = parse_integer(value, line, key);
      if (*config.max_ndof <= 0) throw ConfigError(line, "max_ndof must be positive");
    } else if (key == "max_iter") {
      const long long v = parse_integer(value, line, key);
      if (v < 0) throw ConfigError(line, "max_iter must be nonnegative");
      config.max_iter = static_cast<int>(v);
    } else if (key == "quad_degree") {
      const long long v = parse_integer(value, line, key);
      if (v < 1 || v > 30) throw ConfigError(line, "quad_degree out of range");
      config.quad_degree = static_cast<int>(v);
    } else if (key == "out") {
      config.out = value;
    } else {
      throw ConfigError(line, "unknown key '" + key + "'");
    }
  }
  if (config.preset.empty()) throw ConfigError(line, "preset is required");

  // Range checks that need the preset dimension.
  const bool known =
      config.preset.size() == 8 && config.preset.rfind("example", 0) == 0 &&
      config.preset[7] >= '1' && config.preset[7] <= '6';
  if (!known) throw ConfigError(line, "unknown preset '" + config.preset + "'");
  const int dim = config.preset[7] <= '3' ? 2 : 3;
  if (config.alpha && !(*config.alpha > dim - 2.0 && *config.alpha < 2.0))
    throw ConfigError(alpha_line, "alpha outside (" + std::to_string(dim - 2) + ", 2)");
  return config;
}

std::string serialize(const RunConfig& config) {
  std::ostringstream os;
  os.precision(17);
  os << "preset = " << config.preset << "\n";
  if (config.lambda) os << "lambda = " << *config.lambda << "\n";
  if (config.alpha) os << "alpha = " << *config.alpha << "\n";
  os << "theta = " << config.theta << "\n";
  if (config.max_ndof) os << "max_ndof = " << *config.max_ndof << "\n";
  if (config.max_iter) os << "max_iter = " << *config.max_iter << "\n";
  if (config.quad_degree) os << "quad_degree = " << *config.quad_degree << "\n";
  os << "out = " << config.out << "\n";
  return os.str();
}

}  // namespace ocplab
