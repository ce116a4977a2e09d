// CSV reports and minimal SVG line plots.
//
// CSV layouts:
//   cpa ranking   coefficient,rank,hypothesis,score
//   cpa curves    sample,best_w<W>[,truth_w<W>]...   (rho per sample)
//   tvla          sample,t
// A plot CSV is any file whose first column is the x axis and whose other
// columns are series; a column named "t" adds dashed guides at +-4.5.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "skyber/common.hpp"
#include "skyber/sca.hpp"
#include "skyber/tvla.hpp"

namespace skyber::report {

inline void write_cpa_ranking(std::ostream& os, const sca::CpaReport& r, size_t top = sca::kHypotheses) {
  os << "coefficient,rank,hypothesis,score\n";
  char buf[32];
  for (const auto& c : r.coefficients)
    for (size_t i = 0; i < std::min(top, c.ranking.size()); ++i) {
      std::snprintf(buf, sizeof buf, "%.9f", c.ranking[i].score);
      os << 4 * c.word << ',' << i + 1 << ',' << c.ranking[i].value << ',' << buf << '\n';
    }
}

inline void write_cpa_curves(std::ostream& os, const sca::CpaReport& r) {
  os << "sample";
  for (const auto& c : r.coefficients) {
    os << ",best_w" << c.word;
    if (!c.curve_truth.empty()) os << ",truth_w" << c.word;
  }
  os << '\n';
  char buf[32];
  for (size_t s = 0; s < r.samples; ++s) {
    os << s;
    for (const auto& c : r.coefficients) {
      std::snprintf(buf, sizeof buf, ",%.9f", c.curve_best[s]);
      os << buf;
      if (!c.curve_truth.empty()) {
        std::snprintf(buf, sizeof buf, ",%.9f", c.curve_truth[s]);
        os << buf;
      }
    }
    os << '\n';
  }
}

inline void write_tvla(std::ostream& os, const sca::TvlaReport& r) {
  os << "sample,t\n";
  char buf[32];
  for (size_t s = 0; s < r.t.size(); ++s) {
    std::snprintf(buf, sizeof buf, "%.9f", r.t[s]);
    os << s << ',' << buf << '\n';
  }
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Parses a numeric CSV with a header line. Throws FormatError when the
/// header or all data rows are missing, or a cell is not a number.
inline Table read_table(std::istream& is) {
  Table t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  while (std::getline(is, line) && line.empty()) {
  }
  if (line.empty()) throw FormatError("empty CSV");
  if (line.back() == '\r') line.pop_back();
  t.columns = split(line);
  if (t.columns.size() < 2) throw FormatError("CSV needs an x column and at least one series");
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.columns.size()) throw FormatError("CSV row width does not match header");
    std::vector<double> row;
    for (const auto& c : cells) {
      size_t used = 0;
      double v;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        throw FormatError("non-numeric CSV cell: " + c);
      }
      if (used != c.size()) throw FormatError("non-numeric CSV cell: " + c);
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw FormatError("CSV has no data rows");
  return t;
}

inline void write_svg(std::ostream& os, const Table& t, const std::string& title) {
  constexpr double W = 800, H = 400, L = 60, R = 20, T = 30, B = 40;
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};
  const bool guides = std::find(t.columns.begin(), t.columns.end(), "t") != t.columns.end();

  double x0 = t.rows.front()[0], x1 = x0, y0 = 0, y1 = 0;
  for (const auto& r : t.rows) {
    x0 = std::min(x0, r[0]);
    x1 = std::max(x1, r[0]);
    for (size_t c = 1; c < r.size(); ++c) y0 = std::min(y0, r[c]), y1 = std::max(y1, r[c]);
  }
  if (guides) y0 = std::min(y0, -sca::kTvlaThreshold * 1.2), y1 = std::max(y1, sca::kTvlaThreshold * 1.2);
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  char buf[64];
  for (double y : {y0, 0.0, y1}) {
    std::snprintf(buf, sizeof buf, "%.3g", y);
    os << "<text x=\"" << L - 4 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       << "font-size=\"10\">" << buf << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"11\">" << t.columns[0] << "</text>\n";
  if (guides)
    for (double g : {sca::kTvlaThreshold, -sca::kTvlaThreshold})
      os << "<line x1=\"" << L << "\" y1=\"" << py(g) << "\" x2=\"" << W - R << "\" y2=\"" << py(g)
         << "\" stroke=\"red\" stroke-dasharray=\"6,4\"/>\n";
  for (size_t c = 1; c < t.columns.size(); ++c) {
    const char* color = kColors[(c - 1) % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    for (const auto& r : t.rows) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(r[0]), py(r[c]));
      os << buf;
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 12 * c << "\" text-anchor=\"end\" fill=\"" << color
       << "\" font-family=\"sans-serif\" font-size=\"10\">" << t.columns[c] << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace skyber::report
