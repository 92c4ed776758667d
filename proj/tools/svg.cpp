#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <stdexcept>

namespace cli {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> pts;
};

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

std::string label(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<')
      o += "&lt;";
    else if (c == '>')
      o += "&gt;";
    else if (c == '&')
      o += "&amp;";
    else if (c == '"')
      o += "&quot;";
    else
      o += c;
  }
  return o;
}

struct Axis {
  bool log;
  double lo, hi;  // in transformed units
  double map(double v) const { return log ? std::log10(v) : v; }
};

Axis make_axis(double lo, double hi, bool log) {
  Axis a{log, log ? std::log10(lo) : lo, log ? std::log10(hi) : hi};
  if (a.hi == a.lo) {
    double pad = a.lo == 0.0 ? 1.0 : std::abs(a.lo) * 0.1;
    a.lo -= pad;
    a.hi += pad;
  }
  if (log) {
    a.lo = std::floor(a.lo);
    a.hi = std::ceil(a.hi);
    if (a.hi == a.lo) a.hi += 1.0;
  }
  return a;
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> t;
  if (a.log) {
    double step = std::max(1.0, std::ceil((a.hi - a.lo) / 8.0));
    for (double e = a.lo; e <= a.hi + 1e-9; e += step) t.push_back(e);
    return t;
  }
  double span = a.hi - a.lo, raw = span / 6.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-9 * span; v += step)
    t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
  return t;
}

}  // namespace

std::string render_svg(const Table& t, const PlotSpec& p) {
  if (p.y.empty()) throw std::runtime_error("plot: no y column given");
  size_t xi = column_index(t, p.x);
  std::vector<size_t> yi;
  for (const auto& y : p.y) yi.push_back(column_index(t, y));
  long gi = p.group.empty() ? -1 : static_cast<long>(column_index(t, p.group));

  std::vector<Series> series;
  std::map<std::string, size_t> index;
  for (const auto& r : t.rows) {
    double x = std::strtod(r[xi].c_str(), nullptr);
    for (size_t k = 0; k < yi.size(); ++k) {
      std::string name = p.y[k];
      if (gi >= 0) name = (p.y.size() > 1 ? p.y[k] + " " : "") + p.group + "=" + r[gi];
      auto it = index.find(name);
      if (it == index.end()) {
        it = index.emplace(name, series.size()).first;
        series.push_back({name, {}});
      }
      double y = std::strtod(r[yi[k]].c_str(), nullptr);
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if ((p.logx && x <= 0) || (p.logy && y <= 0)) continue;
      series[it->second].pts.emplace_back(x, y);
    }
  }
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : series)
    for (auto [x, y] : s.pts) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  if (!(xlo <= xhi)) throw std::runtime_error("plot: no plottable points");
  Axis ax = make_axis(xlo, xhi, p.logx), ay = make_axis(ylo, yhi, p.logy);

  const double W = p.width, H = p.height, ml = 90, mr = 190, mt = 40, mb = 60;
  const double pw = W - ml - mr, ph = H - mt - mb;
  auto X = [&](double v) { return ml + (ax.map(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto Y = [&](double v) { return mt + ph - (ay.map(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(p.width) +
       "\" height=\"" + std::to_string(p.height) + "\" viewBox=\"0 0 " + std::to_string(p.width) + " " +
       std::to_string(p.height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(W) + "\" height=\"" + num(H) + "\" fill=\"white\"/>\n";
  if (!p.title.empty())
    s += "<text x=\"" + num(ml + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" + escape(p.title) + "</text>\n";
  s += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double tv : ticks(ax)) {
    double px = ml + (tv - ax.lo) / (ax.hi - ax.lo) * pw;
    std::string lab = ax.log ? "1e" + label(tv) : label(tv);
    s += "<line x1=\"" + num(px) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" + num(px) + "\" y2=\"" +
         num(mt + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(px) + "\" y=\"" + num(mt + ph + 18) + "\" text-anchor=\"middle\">" + lab + "</text>\n";
  }
  for (double tv : ticks(ay)) {
    double py = mt + ph - (tv - ay.lo) / (ay.hi - ay.lo) * ph;
    std::string lab = ay.log ? "1e" + label(tv) : label(tv);
    s += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(ml) + "\" y2=\"" + num(py) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" + lab + "</text>\n";
  }
  s += "</g>\n";
  std::string ylab;
  for (size_t k = 0; k < p.y.size(); ++k) ylab += (k ? ", " : "") + p.y[k];
  s += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" + num(H - 16) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape(p.x) +
       (p.logx ? " (log)" : "") + "</text>\n";
  s += "<text x=\"18\" y=\"" + num(mt + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\" transform=\"rotate(-90 18 " + num(mt + ph / 2) + ")\">" + escape(ylab) +
       (p.logy ? " (log)" : "") + "</text>\n";

  for (size_t k = 0; k < series.size(); ++k) {
    const char* col = kColors[k % (sizeof kColors / sizeof *kColors)];
    const auto& sr = series[k];
    if (!sr.pts.empty()) {
      s += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < sr.pts.size(); ++i)
        s += (i ? " " : "") + num(X(sr.pts[i].first)) + "," + num(Y(sr.pts[i].second));
      s += "\"/>\n";
    }
    double ly = mt + 14 + 18.0 * k;
    s += "<line x1=\"" + num(ml + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(ml + pw + 36) + "\" y2=\"" +
         num(ly) + "\" stroke=\"" + col + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(ml + pw + 42) + "\" y=\"" + num(ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(sr.name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace cli
