#include "ocplab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ocplab/adapt.hpp"

namespace ocplab {

const char* const kCsvHeader =
    "iter,ndof,n_elem,ey,ep,eocp,log_factor,err_y,err_p,err_u,err_total,effectivity";

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt(*v) : std::string();
}

std::string csv_row(const AfemRecord& r) {
  std::ostringstream os;
  os << r.iteration << ',' << r.ndof << ',' << r.n_elements << ',' << fmt(r.ey)
     << ',' << fmt(r.ep) << ',' << fmt(r.eocp) << ',' << fmt(r.log_factor) << ','
     << fmt_opt(r.err_y) << ',' << fmt_opt(r.err_p) << ',' << fmt_opt(r.err_u)
     << ',' << fmt_opt(r.err_total) << ',' << fmt_opt(r.effectivity);
  return os.str();
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> CsvTable::numeric(int col) const {
  std::vector<double> out;
  for (const auto& row : rows) {
    if (col >= static_cast<int>(row.size()) || row[col].empty()) continue;
    out.push_back(std::stod(row[col]));
  }
  return out;
}

CsvTable read_csv(std::istream& is) {
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    cells.push_back(cur);
    return cells;
  };
  if (!std::getline(is, line)) throw std::runtime_error("read_csv: empty file");
  table.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split(line));
  }
  return table;
}

int run_experiment(const RunConfig& config, std::ostream& csv) {
  const ExperimentPreset ep = preset(config.preset, config.lambda, config.alpha);
  const SimplicialMesh seed = make_seed_mesh(ep);

  StopRule stop;
  stop.max_ndof = config.max_ndof.value_or(ep.dim == 2 ? 100000 : 300000);
  stop.max_iter = config.max_iter;

  AfemOptions opts;
  opts.theta = config.theta;
  if (config.quad_degree) opts.solver.quad_degree = *config.quad_degree;

  csv << kCsvHeader << '\n';
  csv.flush();
  const auto emit = [&csv](const AfemRecord& r) {
    csv << csv_row(r) << '\n';
    csv.flush();
  };
  try {
    run_afem(ep.problem, seed, stop, ep.exact ? &*ep.exact : nullptr, opts, emit);
  } catch (const AfemFailure& e) {
    std::cerr << "solver failure at iteration " << e.failed_iteration << ": "
              << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_run(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot open config file: " << config_path << "\n";
    return 1;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig config;
  try {
    config = parse_config(buffer.str());
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  std::ofstream out(config.out, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open output file: " << config.out << "\n";
    return 1;
  }
  return run_experiment(config, out);
}

double fitted_rate_from_csv(const CsvTable& table, const std::string& field,
                            int window) {
  const int fcol = table.column(field);
  const int ncol = table.column("ndof");
  if (fcol < 0 || ncol < 0)
    throw std::runtime_error("rates: no such field '" + field + "'");
  std::vector<double> ndof, value;
  for (const auto& row : table.rows) {
    if (row[fcol].empty()) continue;
    ndof.push_back(std::stod(row[ncol]));
    value.push_back(std::stod(row[fcol]));
  }
  return fit_rate(ndof, value, window);
}

int cmd_rates(const std::string& csv_path, const std::string& field, int window) {
  std::ifstream in(csv_path);
  if (!in) {
    std::cerr << "cannot open csv file: " << csv_path << "\n";
    return 1;
  }
  try {
    const CsvTable table = read_csv(in);
    const double slope = fitted_rate_from_csv(table, field, window);
    std::printf("%s: slope %.6f over the last %d records\n", field.c_str(), slope,
                window);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}

namespace {

struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> pts;  // (ndof, value), value > 0
};

}  // namespace

void write_plot_svg(const CsvTable& table, std::ostream& os) {
  const int ncol = table.column("ndof");
  if (ncol < 0) throw std::runtime_error("plot: csv has no ndof column");
  const std::vector<std::pair<std::string, std::string>> wanted = {
      {"ey", "#1f77b4"},      {"ep", "#ff7f0e"},        {"eocp", "#2ca02c"},
      {"err_y", "#9467bd"},   {"err_p", "#8c564b"},     {"err_u", "#e377c2"},
      {"err_total", "#d62728"}};
  std::vector<Series> series;
  for (const auto& [name, color] : wanted) {
    const int col = table.column(name);
    if (col < 0) continue;
    Series s{name, color, {}};
    for (const auto& row : table.rows) {
      if (row[col].empty()) continue;
      const double x = std::stod(row[ncol]);
      const double y = std::stod(row[col]);
      if (x > 0.0 && y > 0.0) s.pts.push_back({x, y});
    }
    if (!s.pts.empty()) series.push_back(std::move(s));
  }
  if (series.empty()) throw std::runtime_error("plot: no plottable data");

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  auto lg = [](double v) { return std::log10(v); };
  double lx0 = lg(xmin), lx1 = lg(xmax), ly0 = lg(ymin), ly1 = lg(ymax);
  if (lx1 - lx0 < 0.5) {
    lx0 -= 0.25;
    lx1 += 0.25;
  }
  if (ly1 - ly0 < 0.5) {
    ly0 -= 0.25;
    ly1 += 0.25;
  }
  const double px0 = 80, px1 = 700, py0 = 500, py1 = 40;
  auto X = [&](double x) { return px0 + (lg(x) - lx0) / (lx1 - lx0) * (px1 - px0); };
  auto Y = [&](double y) { return py0 + (lg(y) - ly0) / (ly1 - ly0) * (py1 - py0); };
  char buf[256];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"560\" "
        "viewBox=\"0 0 760 560\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"760\" height=\"560\" fill=\"white\"/>\n"
     << "<rect x=\"" << num(px0) << "\" y=\"" << num(py1) << "\" width=\""
     << num(px1 - px0) << "\" height=\"" << num(py0 - py1)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  // Decade ticks.
  for (int e = static_cast<int>(std::ceil(lx0)); e <= std::floor(lx1); ++e) {
    const double x = X(std::pow(10.0, e));
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(py0) << "\" x2=\"" << num(x)
       << "\" y2=\"" << num(py0 + 6) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << num(x) << "\" y=\"" << num(py0 + 22)
       << "\" font-size=\"12\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(ly0)); e <= std::floor(ly1); ++e) {
    const double y = Y(std::pow(10.0, e));
    os << "<line x1=\"" << num(px0 - 6) << "\" y1=\"" << num(y) << "\" x2=\""
       << num(px0) << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << num(px0 - 10) << "\" y=\"" << num(y + 4)
       << "\" font-size=\"12\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  os << "<text x=\"" << num(0.5 * (px0 + px1)) << "\" y=\"" << num(py0 + 40)
     << "\" font-size=\"14\" text-anchor=\"middle\">Ndof</text>\n";

  // Reference slope guides through the first point of the first series.
  const auto& anchor = series.front().pts.front();
  for (const double slope : {-0.5, -1.0}) {
    const double y_end = anchor.second * std::pow(xmax / anchor.first, slope);
    os << "<line x1=\"" << num(X(anchor.first)) << "\" y1=\"" << num(Y(anchor.second))
       << "\" x2=\"" << num(X(xmax)) << "\" y2=\"" << num(Y(y_end))
       << "\" stroke=\"#999999\" stroke-dasharray=\"6 4\"/>\n"
       << "<text x=\"" << num(X(xmax) - 4) << "\" y=\"" << num(Y(y_end) - 6)
       << "\" font-size=\"11\" fill=\"#666666\" text-anchor=\"end\">slope "
       << (slope == -0.5 ? "-1/2" : "-1") << "</text>\n";
  }

  double legend_y = py1 + 16;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.pts) os << num(X(x)) << ',' << num(Y(y)) << ' ';
    os << "\"/>\n";
    for (const auto& [x, y] : s.pts)
      os << "<circle cx=\"" << num(X(x)) << "\" cy=\"" << num(Y(y))
         << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    os << "<rect x=\"" << num(px1 - 150) << "\" y=\"" << num(legend_y - 9)
       << "\" width=\"18\" height=\"4\" fill=\"" << s.color << "\"/>\n"
       << "<text x=\"" << num(px1 - 126) << "\" y=\"" << num(legend_y)
       << "\" font-size=\"12\">" << s.name << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
}

int cmd_plot(const std::string& csv_path, const std::string& out_svg) {
  std::ifstream in(csv_path);
  if (!in) {
    std::cerr << "cannot open csv file: " << csv_path << "\n";
    return 1;
  }
  std::ofstream out(out_svg, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open output file: " << out_svg << "\n";
    return 1;
  }
  try {
    write_plot_svg(read_csv(in), out);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ocplab
