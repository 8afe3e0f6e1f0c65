#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace causalbench {

namespace detail {

inline std::string xml_escape(const std::string& s) {
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

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3"};
  return colors[i % 7];
}

inline double nice_max(double v) {
  if (!(v > 0.0)) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  for (double step : {1.0, 2.0, 5.0, 10.0})
    if (step * mag >= v) return step * mag;
  return 10.0 * mag;
}

inline std::string svg_open(double w, double h, const std::string& title) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         "<text x=\"" + num(w / 2) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(title) +
         "</text>\n";
}

inline std::string y_axis(double x0, double y0, double y1, double vmax, const std::string& label) {
  std::string s = "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y1) +
                  "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = vmax * t / 5.0;
    const double y = y0 - (y0 - y1) * t / 5.0;
    s += "<line x1=\"" + num(x0 - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y) +
         "\" stroke=\"black\"/><text x=\"" + num(x0 - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" +
         num(v) + "</text>\n";
  }
  s += "<text transform=\"translate(" + num(x0 - 42) + "," + num((y0 + y1) / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + xml_escape(label) + "</text>\n";
  return s;
}

}  // namespace detail

struct BarSeries {
  std::string name;                // legend entry
  std::vector<double> values;      // one per category
  std::vector<double> errors;      // whisker half-lengths, may be empty
};

/// Grouped bar chart with optional error whiskers.
inline std::string render_bar_chart(const std::string& title, const std::vector<std::string>& categories,
                                    const std::vector<BarSeries>& series, const std::string& y_label = "SHD") {
  const double left = 70, right = 20, top = 40, bottom = 90;
  const double group_w = std::max(60.0, 18.0 * static_cast<double>(series.size()) + 16.0);
  const double width = left + right + group_w * static_cast<double>(std::max<std::size_t>(categories.size(), 1));
  const double height = 360;
  double vmax = 0.0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.values.size(); ++i)
      vmax = std::max(vmax, s.values[i] + (i < s.errors.size() ? s.errors[i] : 0.0));
  vmax = detail::nice_max(vmax);
  const double y0 = height - bottom, y1 = top;
  auto ypos = [&](double v) { return y0 - (y0 - y1) * v / vmax; };

  std::string svg = detail::svg_open(width, height, title) + detail::y_axis(left, y0, y1, vmax, y_label);
  const double bar_w = (group_w - 16.0) / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = left + group_w * static_cast<double>(c) + 8.0;
    for (std::size_t s = 0; s < series.size(); ++s) {
      if (c >= series[s].values.size() || !std::isfinite(series[s].values[c])) continue;
      const double v = series[s].values[c];
      const double x = gx + bar_w * static_cast<double>(s);
      svg += "<rect x=\"" + detail::num(x) + "\" y=\"" + detail::num(ypos(v)) + "\" width=\"" +
             detail::num(bar_w - 1) + "\" height=\"" + detail::num(y0 - ypos(v)) + "\" fill=\"" +
             detail::palette(s) + "\"/>\n";
      if (c < series[s].errors.size() && series[s].errors[c] > 0.0) {
        const double cx = x + (bar_w - 1) / 2;
        const double e = series[s].errors[c];
        svg += "<line x1=\"" + detail::num(cx) + "\" y1=\"" + detail::num(ypos(v + e)) + "\" x2=\"" +
               detail::num(cx) + "\" y2=\"" + detail::num(ypos(std::max(0.0, v - e))) + "\" stroke=\"black\"/>\n";
      }
    }
    svg += "<text transform=\"translate(" + detail::num(gx + (group_w - 16) / 2) + "," + detail::num(y0 + 12) +
           ") rotate(30)\">" + detail::xml_escape(categories[c]) + "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double lx = left + 10 + 110 * static_cast<double>(s);
    svg += "<rect x=\"" + detail::num(lx) + "\" y=\"" + detail::num(height - 18) +
           "\" width=\"10\" height=\"10\" fill=\"" + detail::palette(s) + "\"/><text x=\"" + detail::num(lx + 14) +
           "\" y=\"" + detail::num(height - 9) + "\">" + detail::xml_escape(series[s].name) + "</text>\n";
  }
  return svg + "</svg>\n";
}

/// One violin per category: a mirrored Gaussian kernel density (Silverman
/// bandwidth) drawn as a closed polyline, plus a median tick.
inline std::string render_violin_chart(const std::string& title, const std::vector<std::string>& categories,
                                       const std::vector<std::vector<double>>& samples,
                                       const std::string& y_label = "SHD") {
  const double left = 70, right = 20, top = 40, bottom = 90, slot = 70;
  const double width = left + right + slot * static_cast<double>(std::max<std::size_t>(categories.size(), 1));
  const double height = 360;
  double vmax = 0.0;
  for (const auto& s : samples)
    for (double v : s) vmax = std::max(vmax, v);
  vmax = detail::nice_max(vmax * 1.05);
  const double y0 = height - bottom, y1 = top;
  auto ypos = [&](double v) { return y0 - (y0 - y1) * v / vmax; };
  std::string svg = detail::svg_open(width, height, title) + detail::y_axis(left, y0, y1, vmax, y_label);

  for (std::size_t c = 0; c < categories.size() && c < samples.size(); ++c) {
    const auto& s = samples[c];
    const double cx = left + slot * (static_cast<double>(c) + 0.5);
    if (!s.empty()) {
      double m = 0.0, ss = 0.0;
      for (double v : s) m += v;
      m /= static_cast<double>(s.size());
      for (double v : s) ss += (v - m) * (v - m);
      const double sd = s.size() > 1 ? std::sqrt(ss / static_cast<double>(s.size() - 1)) : 0.0;
      double bw = 1.06 * sd * std::pow(static_cast<double>(s.size()), -0.2);
      if (!(bw > 0.0)) bw = std::max(0.05 * vmax, 1e-3);
      const double lo = std::max(0.0, *std::min_element(s.begin(), s.end()) - 2 * bw);
      const double hi = *std::max_element(s.begin(), s.end()) + 2 * bw;
      const int steps = 40;
      std::vector<std::pair<double, double>> dens;
      double dmax = 0.0;
      for (int i = 0; i <= steps; ++i) {
        const double y = lo + (hi - lo) * i / steps;
        double d = 0.0;
        for (double v : s) d += std::exp(-0.5 * (y - v) * (y - v) / (bw * bw));
        dens.emplace_back(y, d);
        dmax = std::max(dmax, d);
      }
      std::string pts;
      for (const auto& [y, d] : dens) pts += detail::num(cx + 0.4 * slot * d / dmax) + "," + detail::num(ypos(y)) + " ";
      for (auto it = dens.rbegin(); it != dens.rend(); ++it)
        pts += detail::num(cx - 0.4 * slot * it->second / dmax) + "," + detail::num(ypos(it->first)) + " ";
      svg += "<polygon points=\"" + pts + "\" fill=\"" + detail::palette(c) + "\" fill-opacity=\"0.6\" stroke=\"" +
             detail::palette(c) + "\"/>\n";
      std::vector<double> sorted = s;
      std::sort(sorted.begin(), sorted.end());
      const double med = sorted.size() % 2 ? sorted[sorted.size() / 2]
                                           : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
      svg += "<line x1=\"" + detail::num(cx - 10) + "\" y1=\"" + detail::num(ypos(med)) + "\" x2=\"" +
             detail::num(cx + 10) + "\" y2=\"" + detail::num(ypos(med)) + "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    svg += "<text transform=\"translate(" + detail::num(cx - 10) + "," + detail::num(y0 + 12) + ") rotate(30)\">" +
           detail::xml_escape(categories[c]) + "</text>\n";
  }
  return svg + "</svg>\n";
}

}  // namespace causalbench
