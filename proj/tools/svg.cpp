#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace tabkit::app {
namespace {

constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::string header(const std::string& title) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(kWidth) + "\" height=\"" +
         fmt(kHeight) + "\" font-family=\"sans-serif\" font-size=\"11\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         "<text x=\"" + fmt(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
         "</text>\n";
}

struct Range {
  double lo = std::numeric_limits<double>::infinity(), hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
};

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series) {
  Range rx, ry;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) rx.add(s.x[i]), ry.add(s.y[i]);
  rx.finish();
  ry.finish();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - ry.lo) / (ry.hi - ry.lo) * ph; };

  std::string out = header(title);
  out += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + ph) + "\" x2=\"" + fmt(kLeft + pw) + "\" y2=\"" +
         fmt(kTop + ph) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" + fmt(kTop + ph) +
         "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = rx.lo + (rx.hi - rx.lo) * t / 4.0, yv = ry.lo + (ry.hi - ry.lo) * t / 4.0;
    out += "<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(kTop + ph + 15) + "\" text-anchor=\"middle\">" + fmt(xv) +
           "</text>\n";
    out += "<text x=\"" + fmt(kLeft - 5) + "\" y=\"" + fmt(py(yv) + 4) + "\" text-anchor=\"end\">" + fmt(yv) +
           "</text>\n";
  }
  out += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kHeight - 10) + "\" text-anchor=\"middle\">" +
         escape(x_label) + "</text>\n";
  out += "<text x=\"15\" y=\"" + fmt(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " +
         fmt(kTop + ph / 2) + ")\">" + escape(y_label) + "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 5];
    std::string pts;
    for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
      if (!std::isfinite(series[s].x[i]) || !std::isfinite(series[s].y[i])) continue;
      pts += fmt(px(series[s].x[i])) + "," + fmt(py(series[s].y[i])) + " ";
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"/>\n";
    out += "<text x=\"" + fmt(kLeft + pw - 5) + "\" y=\"" + fmt(kTop + 12 + 14.0 * static_cast<double>(s)) +
           "\" text-anchor=\"end\" fill=\"" + color + "\">" + escape(series[s].name) + "</text>\n";
  }
  return out + "</svg>\n";
}

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values) {
  double hi = 0.0;
  for (double v : values)
    if (std::isfinite(v)) hi = std::max(hi, std::abs(v));
  if (hi <= 0.0) hi = 1.0;
  const double left = 170, pw = kWidth - left - kRight, ph = kHeight - kTop - kBottom;
  const double slot = labels.empty() ? ph : ph / static_cast<double>(labels.size());
  std::string out = header(title);
  for (std::size_t i = 0; i < labels.size() && i < values.size(); ++i) {
    const double y = kTop + slot * static_cast<double>(i);
    const double w = std::isfinite(values[i]) ? std::abs(values[i]) / hi * pw : 0.0;
    out += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(y + slot * 0.1) + "\" width=\"" + fmt(w) + "\" height=\"" +
           fmt(slot * 0.8) + "\" fill=\"" + kColors[0] + "\"/>\n";
    out += "<text x=\"" + fmt(left - 5) + "\" y=\"" + fmt(y + slot * 0.5 + 4) + "\" text-anchor=\"end\">" +
           escape(labels[i]) + "</text>\n";
    out += "<text x=\"" + fmt(left + w + 4) + "\" y=\"" + fmt(y + slot * 0.5 + 4) + "\">" + fmt(values[i]) +
           "</text>\n";
  }
  return out + "</svg>\n";
}

}  // namespace tabkit::app
