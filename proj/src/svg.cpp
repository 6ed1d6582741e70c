#include "ivnnt/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace ivnnt {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct FiveNumber {
  double lo_whisker, q1, median, q3, hi_whisker;
  std::vector<double> outliers;
  std::size_t n_finite = 0;
  std::size_t n_nonfinite = 0;
};

// type-7 quantile (linear interpolation between order statistics)
double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

FiveNumber five_number(const std::vector<double>& values) {
  FiveNumber f{};
  std::vector<double> finite;
  for (double v : values) {
    if (std::isfinite(v))
      finite.push_back(v);
    else
      ++f.n_nonfinite;
  }
  f.n_finite = finite.size();
  if (finite.empty()) return f;
  std::sort(finite.begin(), finite.end());
  f.q1 = quantile(finite, 0.25);
  f.median = quantile(finite, 0.5);
  f.q3 = quantile(finite, 0.75);
  const double iqr = f.q3 - f.q1;
  const double lo_fence = f.q1 - 1.5 * iqr, hi_fence = f.q3 + 1.5 * iqr;
  f.lo_whisker = f.q3;
  f.hi_whisker = f.q1;
  bool any = false;
  for (double v : finite) {
    if (v >= lo_fence && v <= hi_fence) {
      if (!any) {
        f.lo_whisker = f.hi_whisker = v;
        any = true;
      } else {
        f.lo_whisker = std::min(f.lo_whisker, v);
        f.hi_whisker = std::max(f.hi_whisker, v);
      }
    } else {
      f.outliers.push_back(v);
    }
  }
  return f;
}

double nice_step(double range, int target_ticks) {
  const double raw = range / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (mag * mult >= raw) return mag * mult;
  }
  return mag * 10.0;
}

}  // namespace

std::string boxplot_svg(const std::string& title, const std::string& y_label, double truth,
                        const std::vector<BoxGroup>& groups) {
  const double width = 760, height = 460;
  const double ml = 64, mr = 24, mt = 46, mb = 54;
  const double plot_w = width - ml - mr, plot_h = height - mt - mb;

  std::vector<std::size_t> sizes;
  for (const auto& g : groups)
    if (std::find(sizes.begin(), sizes.end(), g.n) == sizes.end()) sizes.push_back(g.n);
  std::sort(sizes.begin(), sizes.end());

  std::map<std::pair<std::size_t, int>, FiveNumber> stats;
  double ymin = truth, ymax = truth;
  bool any_box = false;
  for (const auto& g : groups) {
    FiveNumber f = five_number(g.estimates);
    if (f.n_finite > 0) {
      ymin = std::min(ymin, f.lo_whisker);
      ymax = std::max(ymax, f.hi_whisker);
      any_box = true;
    }
    stats[{g.n, g.method}] = std::move(f);
  }
  if (!any_box) {
    ymin = truth - 1;
    ymax = truth + 1;
  }
  double pad = 0.08 * (ymax - ymin);
  if (pad <= 0) pad = 1.0;
  ymin -= pad;
  ymax += pad;

  auto ypix = [&](double v) { return mt + plot_h * (ymax - v) / (ymax - ymin); };

  const double group_w = plot_w / static_cast<double>(sizes.size());
  const double box_w = std::min(40.0, group_w / 3.2);
  auto xcenter = [&](std::size_t size_idx, int method) {
    const double cx = ml + group_w * (static_cast<double>(size_idx) + 0.5);
    return method == 0 ? cx - 0.65 * box_w : cx + 0.65 * box_w;
  };

  const char* color[2] = {"#d62728", "#1f77b4"};  // iv red, baseline blue
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
    << "\" fill=\"white\"/>\n"
    << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"16\">"
    << title << "</text>\n";

  // axes
  s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + plot_h
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << ml << "\" y1=\"" << mt + plot_h << "\" x2=\"" << ml + plot_w << "\" y2=\""
    << mt + plot_h << "\" stroke=\"black\"/>\n";
  s << "<text x=\"16\" y=\"" << mt + plot_h / 2
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
       "transform=\"rotate(-90 16 "
    << mt + plot_h / 2 << ")\">" << y_label << "</text>\n";

  // y ticks
  const double step = nice_step(ymax - ymin, 6);
  for (double v = std::ceil(ymin / step) * step; v <= ymax + 1e-12; v += step) {
    const double y = ypix(v);
    s << "<line x1=\"" << ml - 4 << "\" y1=\"" << num(y) << "\" x2=\"" << ml << "\" y2=\""
      << num(y) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << ml - 8 << "\" y=\"" << num(y + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(v)
      << "</text>\n";
  }

  // x labels
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    s << "<text x=\"" << num(ml + group_w * (static_cast<double>(k) + 0.5)) << "\" y=\""
      << mt + plot_h + 20
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">n=" << sizes[k]
      << "</text>\n";
  }

  // truth line
  s << "<line x1=\"" << ml << "\" y1=\"" << num(ypix(truth)) << "\" x2=\"" << ml + plot_w
    << "\" y2=\"" << num(ypix(truth))
    << "\" stroke=\"#d62728\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"/>\n";

  for (const auto& g : groups) {
    const auto it = std::find(sizes.begin(), sizes.end(), g.n);
    const auto size_idx = static_cast<std::size_t>(it - sizes.begin());
    const FiveNumber& f = stats[{g.n, g.method}];
    const double cx = xcenter(size_idx, g.method);
    const char* col = color[g.method];
    if (f.n_finite > 0) {
      const double x0 = cx - box_w / 2, x1 = cx + box_w / 2;
      s << "<line x1=\"" << num(cx) << "\" y1=\"" << num(ypix(f.lo_whisker)) << "\" x2=\""
        << num(cx) << "\" y2=\"" << num(ypix(f.q1)) << "\" stroke=\"" << col << "\"/>\n";
      s << "<line x1=\"" << num(cx) << "\" y1=\"" << num(ypix(f.q3)) << "\" x2=\"" << num(cx)
        << "\" y2=\"" << num(ypix(f.hi_whisker)) << "\" stroke=\"" << col << "\"/>\n";
      for (double w : {f.lo_whisker, f.hi_whisker}) {
        s << "<line x1=\"" << num(cx - box_w / 4) << "\" y1=\"" << num(ypix(w)) << "\" x2=\""
          << num(cx + box_w / 4) << "\" y2=\"" << num(ypix(w)) << "\" stroke=\"" << col
          << "\"/>\n";
      }
      s << "<rect class=\"box\" x=\"" << num(x0) << "\" y=\"" << num(ypix(f.q3)) << "\" width=\""
        << num(x1 - x0) << "\" height=\"" << num(ypix(f.q1) - ypix(f.q3)) << "\" fill=\"" << col
        << "\" fill-opacity=\"0.25\" stroke=\"" << col << "\"/>\n";
      s << "<line x1=\"" << num(x0) << "\" y1=\"" << num(ypix(f.median)) << "\" x2=\"" << num(x1)
        << "\" y2=\"" << num(ypix(f.median)) << "\" stroke=\"" << col
        << "\" stroke-width=\"2\"/>\n";
      for (double v : f.outliers) {
        if (v < ymin || v > ymax) continue;  // clipped; counted via range only
        s << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(ypix(v))
          << "\" r=\"1.8\" fill=\"none\" stroke=\"" << col << "\"/>\n";
      }
    }
    if (f.n_nonfinite > 0) {
      s << "<text x=\"" << num(cx) << "\" y=\"" << mt - 6
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\" fill=\"" << col
        << "\">&#8734;&#215;" << f.n_nonfinite << "</text>\n";
    }
  }

  // legend
  const double lx = ml + plot_w - 150, ly = mt + 10;
  const char* label[2] = {"IV-based", "baseline"};
  for (int mth = 0; mth < 2; ++mth) {
    s << "<rect x=\"" << lx << "\" y=\"" << ly + 18 * mth - 9 << "\" width=\"12\" height=\"12\" fill=\""
      << color[mth] << "\" fill-opacity=\"0.25\" stroke=\"" << color[mth] << "\"/>\n"
      << "<text x=\"" << lx + 18 << "\" y=\"" << ly + 18 * mth + 1
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << label[mth] << "</text>\n";
  }

  s << "</svg>\n";
  return s.str();
}

}  // namespace ivnnt
