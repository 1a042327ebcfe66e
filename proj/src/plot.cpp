#include "kqr/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kqr {

namespace {

std::string fmt_coord(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path);
  table.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split_csv_line(line));
  }
  return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

PlotSpec plot_spec_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("plot_spec_from_file: cannot open " + path);
  PlotSpec spec;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "x") {
      spec.x_column = value;
    } else if (key == "y") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) spec.y_columns.push_back(trim(item));
    } else if (key == "title") {
      spec.title = value;
    } else if (key == "markers") {
      spec.markers = (value == "1" || value == "true");
    } else if (key == "logx") {
      spec.log_x = (value == "1" || value == "true");
    } else if (key == "logy") {
      spec.log_y = (value == "1" || value == "true");
    }
  }
  return spec;
}

void emit_plot(const std::string& csv_path, const PlotSpec& spec, const std::string& out_path) {
  CsvTable table = read_csv(csv_path);
  if (spec.x_column.empty() || spec.y_columns.empty()) {
    throw std::invalid_argument("emit_plot: spec needs an x column and at least one y column");
  }
  int xcol = table.column(spec.x_column);
  if (xcol < 0) throw std::invalid_argument("emit_plot: missing column " + spec.x_column);
  std::vector<int> ycols;
  for (const auto& name : spec.y_columns) {
    int c = table.column(name);
    if (c < 0) throw std::invalid_argument("emit_plot: missing column " + name);
    ycols.push_back(c);
  }
  if (table.rows.empty()) throw std::runtime_error("emit_plot: no data rows");

  auto parse = [&](const std::string& s, bool log_scale) {
    double v = std::strtod(s.c_str(), nullptr);
    if (log_scale) {
      if (!(v > 0.0)) throw std::runtime_error("emit_plot: nonpositive value on log axis");
      v = std::log10(v);
    }
    return v;
  };

  std::vector<double> xs;
  std::vector<std::vector<double>> ys(ycols.size());
  for (const auto& row : table.rows) {
    xs.push_back(parse(row[static_cast<std::size_t>(xcol)], spec.log_x));
    for (std::size_t s = 0; s < ycols.size(); ++s) {
      ys[s].push_back(parse(row[static_cast<std::size_t>(ycols[s])], spec.log_y));
    }
  }

  double xmin = *std::min_element(xs.begin(), xs.end());
  double xmax = *std::max_element(xs.begin(), xs.end());
  double ymin = ys[0][0], ymax = ys[0][0];
  for (const auto& series : ys) {
    for (double v : series) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (xmax == xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymax == ymin) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double width = 640, height = 480;
  const double left = 70, right = 620, top = 40, bottom = 430;
  auto sx = [&](double v) { return left + (right - left) * (v - xmin) / (xmax - xmin); };
  auto sy = [&](double v) { return bottom - (bottom - top) * (v - ymin) / (ymax - ymin); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    svg << "<text x=\"320\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" "
           "text-anchor=\"middle\">" << spec.title << "</text>\n";
  }
  // Axes.
  svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
      << bottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";
  // Ticks and labels.
  for (int i = 0; i <= 4; ++i) {
    double fx = xmin + (xmax - xmin) * i / 4.0;
    double px = sx(fx);
    svg << "<line x1=\"" << fmt_coord(px) << "\" y1=\"" << bottom << "\" x2=\"" << fmt_coord(px)
        << "\" y2=\"" << bottom + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt_coord(px) << "\" y=\"" << bottom + 20
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
        << fmt_tick(spec.log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
    double fy = ymin + (ymax - ymin) * i / 4.0;
    double py = sy(fy);
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << fmt_coord(py) << "\" x2=\"" << left
        << "\" y2=\"" << fmt_coord(py) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << fmt_coord(py + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
        << fmt_tick(spec.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  // Axis labels from headers.
  svg << "<text x=\"345\" y=\"465\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\">" << spec.x_column << "</text>\n";
  // Series.
  for (std::size_t s = 0; s < ys.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) svg << ' ';
      svg << fmt_coord(sx(xs[i])) << ',' << fmt_coord(sy(ys[s][i]));
    }
    svg << "\"/>\n";
    if (spec.markers) {
      for (std::size_t i = 0; i < xs.size(); ++i) {
        svg << "<circle cx=\"" << fmt_coord(sx(xs[i])) << "\" cy=\"" << fmt_coord(sy(ys[s][i]))
            << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
    // Legend entry.
    double ly = top + 16.0 * static_cast<double>(s);
    svg << "<line x1=\"" << right - 130 << "\" y1=\"" << fmt_coord(ly) << "\" x2=\""
        << right - 110 << "\" y2=\"" << fmt_coord(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << right - 105 << "\" y=\"" << fmt_coord(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << spec.y_columns[s] << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plot: cannot open " + out_path);
  out << svg.str();
}

}  // namespace kqr
