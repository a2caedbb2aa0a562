#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ocplab/config.hpp"

namespace ocplab {

// In-memory view of a run CSV.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  // Numeric column; empty cells are skipped along with their companions.
  std::vector<double> numeric(int col) const;
};

extern const char* const kCsvHeader;

// Run the configured experiment, streaming CSV rows to `csv`. Returns 0 on
// success and 2 on solver failure (partial rows are flushed).
int run_experiment(const RunConfig& config, std::ostream& csv);

// Exit codes: 0 success, 1 configuration error, 2 solver failure.
int cmd_run(const std::string& config_path);
int cmd_rates(const std::string& csv_path, const std::string& field, int window);
int cmd_plot(const std::string& csv_path, const std::string& out_svg);

CsvTable read_csv(std::istream& is);
double fitted_rate_from_csv(const CsvTable& table, const std::string& field,
                            int window);
void write_plot_svg(const CsvTable& table, std::ostream& os);

}  // namespace ocplab
