#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace ocplab {

// Line-oriented "key = value" run configuration.
struct RunConfig {
  std::string preset;
  std::optional<double> lambda;
  std::optional<double> alpha;
  double theta = 0.5;
  std::optional<long long> max_ndof;  // dimension default when absent
  std::optional<int> max_iter;
  std::optional<int> quad_degree;  // assembly quadrature override
  std::string out = "run.csv";
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error("config line " + std::to_string(line) + ": " + what),
        line_number(line) {}
  int line_number;
};

RunConfig parse_config(const std::string& text);
std::string serialize(const RunConfig& config);

}  // namespace ocplab
