#pragma once

#include <string>
#include <vector>

namespace kqr {

// In-memory CSV table (comma separated, header row, LF endings).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

struct PlotSpec {
  std::string x_column;
  std::vector<std::string> y_columns;
  std::string title;
  bool markers = false;
  bool log_x = false;
  bool log_y = false;
};

// Renders a deterministic static SVG line/scatter chart of the selected
// columns. Throws on missing columns or empty data; no file is written then.
void emit_plot(const std::string& csv_path, const PlotSpec& spec, const std::string& out_path);

// Parse a flat key=value spec file (keys: x, y (comma list), title, markers,
// logx, logy).
PlotSpec plot_spec_from_file(const std::string& path);

}  // namespace kqr
