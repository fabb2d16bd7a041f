#include "initcap/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "initcap/errors.hpp"

namespace initcap {

namespace {

std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw FormatError("csv line " + std::to_string(line_no), 0, "unterminated quote");
  out.push_back(std::move(field));
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
  std::string avail;
  for (const auto& h : header) avail += (avail.empty() ? "" : ", ") + h;
  throw ArgumentError("unknown column '" + name + "'; available columns: " + avail);
}

std::vector<std::string> CsvTable::strings(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<std::string> out;
  for (const auto& row : rows) out.push_back(c < row.size() ? row[c] : std::string());
  return out;
}

std::vector<double> CsvTable::numeric(const std::string& name, bool keep_empty) const {
  std::vector<double> out;
  for (const auto& s : strings(name)) {
    if (s.empty()) {
      if (keep_empty) out.push_back(std::nan(""));
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw ArgumentError("column '" + name + "' has non-numeric value '" + s + "'");
    out.push_back(v);
  }
  return out;
}

CsvTable CsvTable::parse(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_record(line, line_no);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw FormatError("csv line " + std::to_string(line_no), 0,
                        "expected " + std::to_string(t.header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw FormatError("csv header", 0, "empty file");
  return t;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string render_svg(const CsvTable& table, const PlotOptions& opts) {
  const auto xs = table.numeric(opts.x, true);
  const auto ys = table.numeric(opts.y, true);
  const std::vector<std::string> groups =
      opts.group.empty() ? std::vector<std::string>(table.rows.size()) : table.strings(opts.group);

  // group -> x -> (sum, count); std::map keeps everything in a fixed order.
  std::map<std::string, std::map<double, std::pair<double, int>>> series;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    double x = xs[i], y = ys[i];
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    if ((opts.log_x && x <= 0.0) || (opts.log_y && y <= 0.0)) continue;
    if (opts.log_x) x = std::log10(x);
    if (opts.log_y) y = std::log10(y);
    auto& cell = series[groups[i]][x];
    cell.first += y;
    cell.second += 1;
  }

  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& [g, pts] : series)
    for (const auto& [x, acc] : pts) {
      const double y = acc.first / acc.second;
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  if (series.empty()) x_lo = y_lo = 0.0, x_hi = y_hi = 1.0;
  if (x_hi - x_lo < 1e-12) x_lo -= 0.5, x_hi += 0.5;
  if (y_hi - y_lo < 1e-12) y_lo -= 0.5, y_hi += 0.5;

  const double left = 70, right = 150, top = 40, bottom = 50;
  const double pw = opts.width - left - right, ph = opts.height - top - bottom;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph; };
  auto label = [](double v, bool log) { return fmt("%.4g", log ? std::pow(10.0, v) : v); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\"" << opts.height
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opts.title.empty())
    s << "<text x=\"" << fmt("%.2f", left + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
      << xml_escape(opts.title) << "</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 4.0, yv = y_lo + (y_hi - y_lo) * i / 4.0;
    s << "<text x=\"" << fmt("%.2f", px(xv)) << "\" y=\"" << fmt("%.2f", top + ph + 16)
      << "\" text-anchor=\"middle\">" << label(xv, opts.log_x) << "</text>\n";
    s << "<text x=\"" << fmt("%.2f", left - 6) << "\" y=\"" << fmt("%.2f", py(yv) + 4) << "\" text-anchor=\"end\">"
      << label(yv, opts.log_y) << "</text>\n";
  }
  s << "<text x=\"" << fmt("%.2f", left + pw / 2) << "\" y=\"" << opts.height - 10 << "\" text-anchor=\"middle\">"
    << xml_escape(opts.x) << (opts.log_x ? " (log)" : "") << "</text>\n";
  s << "<text transform=\"translate(16," << fmt("%.2f", top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(opts.y) << (opts.log_y ? " (log)" : "") << "</text>\n";

  std::size_t gi = 0;
  for (const auto& [g, pts] : series) {
    const char* color = kPalette[gi % std::size(kPalette)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [x, acc] : pts) {
      s << (first ? "" : " ") << fmt("%.2f", px(x)) << ',' << fmt("%.2f", py(acc.first / acc.second));
      first = false;
    }
    s << "\"/>\n";
    for (const auto& [x, acc] : pts)
      s << "<circle cx=\"" << fmt("%.2f", px(x)) << "\" cy=\"" << fmt("%.2f", py(acc.first / acc.second))
        << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(gi);
    s << "<g class=\"legend-entry\"><line x1=\"" << left + pw + 12 << "\" y1=\"" << fmt("%.2f", ly) << "\" x2=\""
      << left + pw + 30 << "\" y2=\"" << fmt("%.2f", ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>"
      << "<text x=\"" << left + pw + 34 << "\" y=\"" << fmt("%.2f", ly + 4) << "\">"
      << xml_escape(opts.group.empty() ? opts.y : opts.group + "=" + g) << "</text></g>\n";
    ++gi;
  }
  s << "</svg>\n";
  return s.str();
}

void plot_csv(const std::filesystem::path& csv, const PlotOptions& opts, const std::filesystem::path& out_svg) {
  const std::string svg = render_svg(CsvTable::read(csv), opts);
  std::ofstream out(out_svg, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + out_svg.string());
  out << svg;
  if (!out) throw IoError("write failed: " + out_svg.string());
}

}  // namespace initcap
