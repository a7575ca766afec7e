#include "mpmab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mpmab {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

// Largest of {1,2,5}*10^n not above `raw`; raw > 0.
double nice_step(double raw) {
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  if (r >= 5.0) return 5.0 * mag;
  if (r >= 2.0) return 2.0 * mag;
  return mag;
}

std::vector<double> linear_ticks(double lo, double hi, int target) {
  std::vector<double> ticks;
  if (!(hi > lo)) {
    ticks.push_back(lo);
    return ticks;
  }
  const double step = nice_step((hi - lo) / std::max(1, target));
  double t = std::ceil(lo / step - 1e-9) * step;
  for (; t <= hi + step * 1e-9; t += step) {
    double v = t;
    if (std::fabs(v) < step * 1e-6) v = 0.0;
    ticks.push_back(v);
  }
  return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  const int e0 = static_cast<int>(std::floor(std::log10(lo) + 1e-12));
  const int e1 = static_cast<int>(std::ceil(std::log10(hi) - 1e-12));
  for (int e = e0; e <= e1; ++e) {
    const double v = std::pow(10.0, e);
    if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) ticks.push_back(v);
  }
  if (ticks.empty()) ticks.push_back(lo);
  return ticks;
}

}  // namespace

std::string render_line_plot(const std::vector<PlotSeries>& series,
                             const PlotOptions& options) {
  for (const auto& s : series) {
    if (s.x.size() != s.mean.size())
      throw std::invalid_argument("plot series: x and mean sizes differ");
    if (!s.stddev.empty() && s.stddev.size() != s.mean.size())
      throw std::invalid_argument("plot series: stddev size differs from mean");
  }

  const double ml = 74, mr = 22, mt = 46, mb = 56;
  const double w = options.width, h = options.height;
  const double pw = w - ml - mr, ph = h - mt - mb;

  // Data extent, including the deviation band.
  bool any = false;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double sd = s.stddev.empty() ? 0.0 : s.stddev[i];
      const double ylo = s.mean[i] - sd, yhi = s.mean[i] + sd;
      if (!any) {
        x0 = x1 = s.x[i];
        y0 = ylo;
        y1 = yhi;
        any = true;
      } else {
        x0 = std::min(x0, s.x[i]);
        x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, ylo);
        y1 = std::max(y1, yhi);
      }
    }
  if (any) {
    if (options.log_y) {
      // Clamp the band floor to the smallest positive mean seen.
      double floor_v = y1 > 0 ? y1 : 1.0;
      for (const auto& s : series)
        for (double m : s.mean)
          if (m > 0) floor_v = std::min(floor_v, m);
      y0 = std::max(y0, floor_v * 0.5);
      y1 = std::max(y1, y0 * 10);
    } else {
      y0 = std::min(0.0, y0);
      if (!(y1 > y0)) y1 = y0 + 1;
    }
    if (!(x1 > x0)) x1 = x0 + 1;
  }

  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) {
    if (options.log_y) {
      const double ly0 = std::log10(y0), ly1 = std::log10(y1);
      const double ly = std::log10(std::max(y, y0));
      return mt + ph - (ly - ly0) / (ly1 - ly0) * ph;
    }
    return mt + ph - (y - y0) / (y1 - y0) * ph;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
      << "\" height=\"" << options.height << "\" viewBox=\"0 0 "
      << options.width << ' ' << options.height << "\">\n";
  out << "<rect width=\"" << options.width << "\" height=\"" << options.height
      << "\" fill=\"white\"/>\n";
  if (!options.title.empty())
    out << "<text x=\"" << fmt(w / 2)
        << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">"
        << escape_xml(options.title) << "</text>\n";

  // Frame.
  out << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\""
      << fmt(pw) << "\" height=\"" << fmt(ph)
      << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";

  if (any) {
    const auto xticks = linear_ticks(x0, x1, 6);
    const auto yticks = options.log_y ? log_ticks(y0, y1) : linear_ticks(y0, y1, 6);
    for (double t : xticks) {
      const double x = px(t);
      out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(mt) << "\" x2=\""
          << fmt(x) << "\" y2=\"" << fmt(mt + ph)
          << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
      out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(mt + ph + 18)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"11\">"
          << fmt(t) << "</text>\n";
    }
    for (double t : yticks) {
      const double y = py(t);
      out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(y) << "\" x2=\""
          << fmt(ml + pw) << "\" y2=\"" << fmt(y)
          << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
      out << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(y + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"11\">"
          << fmt(t) << "</text>\n";
    }
  }

  out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(h - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << escape_xml(options.x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << fmt(mt + ph / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 "
      << fmt(mt + ph / 2) << ")\">" << escape_xml(options.y_label)
      << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    if (s.x.empty()) continue;
    const char* color = kPalette[si % kPaletteSize];
    if (!s.stddev.empty() && s.x.size() > 1) {
      std::ostringstream pts;
      for (std::size_t i = 0; i < s.x.size(); ++i)
        pts << fmt(px(s.x[i])) << ',' << fmt(py(s.mean[i] + s.stddev[i])) << ' ';
      for (std::size_t i = s.x.size(); i-- > 0;)
        pts << fmt(px(s.x[i])) << ',' << fmt(py(s.mean[i] - s.stddev[i]))
            << (i == 0 ? "" : " ");
      out << "<polygon points=\"" << pts.str() << "\" fill=\"" << color
          << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    }
    if (s.x.size() > 1) {
      out << "<polyline points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << fmt(px(s.x[i])) << ',' << fmt(py(s.mean[i]))
            << (i + 1 == s.x.size() ? "" : " ");
      out << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\""
          << fmt(py(s.mean[i])) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
  }

  // Legend, top-right inside the frame.
  double ly = mt + 16;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % kPaletteSize];
    const double lx = ml + pw - 190;
    out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
        << fmt(lx + 26) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt(lx + 32) << "\" y=\"" << fmt(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape_xml(series[si].label) << "</text>\n";
    ly += 18;
  }

  out << "</svg>\n";
  return out.str();
}

std::string plot_from_aggregate_csv(const std::string& csv_text,
                                    const PlotOptions& options) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("aggregate csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "protocol,environment,checkpoint_t,mean_regret,std_regret,n_runs")
    throw std::invalid_argument("aggregate csv: unexpected header '" + line + "'");

  struct Key {
    std::string protocol, environment;
    bool operator<(const Key& o) const {
      return protocol != o.protocol ? protocol < o.protocol
                                    : environment < o.environment;
    }
  };
  std::map<Key, PlotSeries> grouped;
  std::vector<Key> order;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cell;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i)
      if (i == line.size() || line[i] == ',') {
        cell.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    if (cell.size() != 6)
      throw std::invalid_argument("aggregate csv: line " +
                                  std::to_string(line_no) + " has " +
                                  std::to_string(cell.size()) + " fields");
    auto num = [&](const std::string& v) {
      char* end = nullptr;
      const double x = std::strtod(v.c_str(), &end);
      if (end != v.c_str() + v.size())
        throw std::invalid_argument("aggregate csv: bad number '" + v +
                                    "' on line " + std::to_string(line_no));
      return x;
    };
    const Key key{cell[0], cell[1]};
    auto it = grouped.find(key);
    if (it == grouped.end()) {
      it = grouped.emplace(key, PlotSeries{}).first;
      order.push_back(key);
    }
    it->second.x.push_back(num(cell[2]));
    it->second.mean.push_back(num(cell[3]));
    it->second.stddev.push_back(num(cell[4]));
  }

  bool same_env = true;
  for (const auto& k : order)
    if (k.environment != order.front().environment) same_env = false;
  std::vector<PlotSeries> series;
  for (const auto& k : order) {
    PlotSeries s = grouped[k];
    s.label = same_env ? k.protocol : k.protocol + " / " + k.environment;
    series.push_back(std::move(s));
  }
  return render_line_plot(series, options);
}

}  // namespace mpmab
