#pragma once

// Tabular output (CSV at 17 significant digits, JSON), a minimal SVG line
// plot, the mixing-model text format, and atomic file replacement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "urnent/definetti.hpp"
#include "urnent/errors.hpp"
#include "urnent/urn_spec.hpp"

namespace urnent::io {

/// Empty cells (std::monostate) print as "" in CSV and null in JSON.
using Cell = std::variant<std::monostate, std::int64_t, double, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) {
    detail::require(row.size() == columns.size(), "Table: row width does not match the header");
    rows.push_back(std::move(row));
  }

  std::size_t column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    detail::require(it != columns.end(), "Table: no column " + name);
    return static_cast<std::size_t>(it - columns.begin());
  }
};

inline Cell optional_cell(const std::optional<double>& v) {
  return v ? Cell{*v} : Cell{};
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, c);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_field(t.columns[i]);
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(format_cell(row[i]));
    out += "\n";
  }
  return out;
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
    nlohmann::ordered_json operator()(double v) const {
      if (!std::isfinite(v)) return format_double(v);
      return v;
    }
    nlohmann::ordered_json operator()(bool v) const { return v; }
    nlohmann::ordered_json operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, c);
}

/// Array of row objects, keys in column order.
inline nlohmann::ordered_json to_json_value(const Table& t) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
    arr.push_back(std::move(obj));
  }
  return arr;
}

inline std::string to_json(const Table& t) { return to_json_value(t).dump(2) + "\n"; }

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) {
      f.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move output into place at " + path.string());
  }
}

/// Mixing model text format: a header line "n c", then one atom per line
/// "ell_1 ... ell_c weight". Blank lines and lines starting with '#' are
/// skipped. Weights within 1e-9 of summing to 1 are renormalized.
inline MixingMeasure parse_mixing_model(std::istream& in) {
  std::string line;
  std::int64_t n = 0;
  std::int64_t c = 0;
  bool have_header = false;
  MixingMeasure::Weights weights;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw domain_error("mixing model line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (!have_header) {
      if (!(ls >> n >> c)) fail("expected header 'n c'");
      std::string extra;
      if (ls >> extra) fail("trailing text after header");
      if (n < 1 || c < 2) fail("need n >= 1 and c >= 2");
      have_header = true;
      continue;
    }
    std::vector<std::int64_t> ell(static_cast<std::size_t>(c));
    for (auto& v : ell)
      if (!(ls >> v)) fail("expected " + std::to_string(c) + " counts and a weight");
    double w = 0.0;
    if (!(ls >> w)) fail("missing weight");
    std::string extra;
    if (ls >> extra) fail("trailing text after weight");
    CountVector key(std::move(ell));
    for (auto v : key)
      if (v < 0) fail("negative count");
    if (key.total() != n) fail("counts sum to " + std::to_string(key.total()) + ", not n");
    if (!std::isfinite(w) || w < 0.0) fail("weight must be a nonnegative number");
    if (!weights.emplace(key, w).second) fail("duplicate atom " + to_string(key));
  }
  if (!have_header) throw domain_error("mixing model: missing header");
  if (weights.empty()) throw domain_error("mixing model: no atoms");
  return MixingMeasure::normalized(n, static_cast<std::size_t>(c), std::move(weights), 1e-9);
}

inline MixingMeasure load_mixing_model(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw domain_error("cannot open mixing model " + path.string());
  return parse_mixing_model(f);
}

enum class SeriesStyle { circles, solid, dashed, dotted };

struct Series {
  std::string name;
  std::vector<double> y;  // NaN entries are skipped
  SeriesStyle style = SeriesStyle::solid;
};

/// Single-panel SVG: axes with min/max tick labels, one polyline or marker
/// set per series, and a legend.
inline std::string svg_plot(const std::string& title, const std::string& x_label, const std::vector<double>& x,
                            const std::vector<Series>& series) {
  constexpr double W = 720, H = 480, L = 70, R = 190, T = 40, B = 50;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!x.empty()) {
    xmin = *std::min_element(x.begin(), x.end());
    xmax = *std::max_element(x.begin(), x.end());
  }
  bool first = true;
  for (const auto& s : series)
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      if (first) ymin = ymax = v, first = false;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  ymin = std::min(ymin, 0.0);
  auto px = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  static const char* palette[] = {"#000000", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                  "#e377c2"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << L << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" font-size=\"11\">" << num(xmin) << "</text>\n";
  o << "<text x=\"" << W - R << "\" y=\"" << H - B + 18 << "\" font-size=\"11\" text-anchor=\"end\">" << num(xmax)
    << "</text>\n";
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" font-size=\"12\">" << x_label << "</text>\n";
  o << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" font-size=\"11\" text-anchor=\"end\">" << num(ymin)
    << "</text>\n";
  o << "<text x=\"" << L - 6 << "\" y=\"" << T + 4 << "\" font-size=\"11\" text-anchor=\"end\">" << num(ymax)
    << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* colour = palette[si % (sizeof palette / sizeof *palette)];
    if (s.style == SeriesStyle::circles) {
      for (std::size_t i = 0; i < std::min(x.size(), s.y.size()); ++i) {
        if (!std::isfinite(s.y[i])) continue;
        o << "<circle cx=\"" << px(x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"none\" stroke=\""
          << colour << "\"/>\n";
      }
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"";
      if (s.style == SeriesStyle::dashed) o << " stroke-dasharray=\"6,4\"";
      if (s.style == SeriesStyle::dotted) o << " stroke-dasharray=\"2,3\"";
      o << " points=\"";
      for (std::size_t i = 0; i < std::min(x.size(), s.y.size()); ++i) {
        if (!std::isfinite(s.y[i])) continue;
        o << px(x[i]) << "," << py(s.y[i]) << " ";
      }
      o << "\"/>\n";
    }
    const double ly = T + 16.0 * static_cast<double>(si);
    o << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << s.name << "</text>\n";
    if (s.style == SeriesStyle::circles)
      o << "<circle cx=\"" << W - R + 20 << "\" cy=\"" << ly << "\" r=\"3\" fill=\"none\" stroke=\"" << colour
        << "\"/>\n";
    else
      o << "<line x1=\"" << W - R + 8 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
        << "\" stroke=\"" << colour << "\""
        << (s.style == SeriesStyle::dashed ? " stroke-dasharray=\"6,4\""
            : s.style == SeriesStyle::dotted ? " stroke-dasharray=\"2,3\""
                                             : "")
        << "/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace urnent::io
