#include <CLI11.hpp>

#include "ocplab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Adaptive FEM laboratory for control-constrained optimal control "
               "with point sources"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "key = value config file")->required();

  std::string csv_path, field;
  int window = 10;
  auto* rates = app.add_subcommand("rates", "fitted log-log slope of a CSV column");
  rates->add_option("csv", csv_path, "CSV produced by run")->required();
  rates->add_option("field", field, "column name, e.g. eocp")->required();
  rates->add_option("window", window, "number of trailing records")->required();

  std::string plot_csv, out_svg;
  auto* plot = app.add_subcommand("plot", "static log-log SVG plot of a run CSV");
  plot->add_option("csv", plot_csv, "CSV produced by run")->required();
  plot->add_option("out", out_svg, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return ocplab::cmd_run(config_path);
  if (rates->parsed()) return ocplab::cmd_rates(csv_path, field, window);
  if (plot->parsed()) return ocplab::cmd_plot(plot_csv, out_svg);
  return 1;
}
