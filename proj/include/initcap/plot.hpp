#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace initcap {

/// Comma-separated table with a header row. Fields may be double-quoted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name`; throws ArgumentError listing the available columns.
  std::size_t column(const std::string& name) const;
  /// Numeric values of a column. Rows whose field is empty are skipped
  /// unless `keep_empty`, in which case they become NaN.
  std::vector<double> numeric(const std::string& name, bool keep_empty = false) const;
  std::vector<std::string> strings(const std::string& name) const;

  static CsvTable parse(const std::string& text);
  static CsvTable read(const std::filesystem::path& path);
};

std::string csv_escape(const std::string& field);

struct PlotOptions {
  std::string x;
  std::string y;
  std::string group;  ///< empty for a single series
  bool log_x = false;
  bool log_y = false;
  std::string title;
  int width = 640;
  int height = 420;
};

/// Line plot with one polyline per group value (y averaged per x), sorted
/// group labels, and a legend. Output is a pure function of the inputs.
std::string render_svg(const CsvTable& table, const PlotOptions& opts);

void plot_csv(const std::filesystem::path& csv, const PlotOptions& opts, const std::filesystem::path& out_svg);

}  // namespace initcap
