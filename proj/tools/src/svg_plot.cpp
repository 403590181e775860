#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "varflow/errors.hpp"

namespace varflow::cli {

ContourSets read_contour_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open contour dump " + path);
  ContourSets sets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("sigma", 0) == 0) continue;
    if (line.empty()) continue;
    std::istringstream fields(line);
    double sigma = 0.0, f0 = 0.0;
    std::size_t sample = 0, frame = 0;
    if (!(fields >> sigma >> sample >> frame >> f0)) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected sigma, sample, frame, f0");
    }
    auto& samples = sets[sigma];
    if (samples.size() <= sample) samples.resize(sample + 1);
    auto& c = samples[sample];
    if (c.size() <= frame) c.resize(frame + 1, 0.0);
    c[frame] = f0;
  }
  if (sets.empty()) throw DataError(path + ": no contour rows");
  return sets;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
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

}  // namespace

std::string render_contours_svg(const ContourSets& sets, const std::string& title) {
  constexpr double width = 720, panel_h = 220, left = 60, right = 20, top = 40, gap = 50;
  std::size_t frames = 1;
  double lo = 1e300, hi = -1e300;
  for (const auto& [sigma, samples] : sets) {
    for (const auto& c : samples) {
      frames = std::max(frames, c.size());
      for (double v : c) {
        if (v > 0) lo = std::min(lo, v), hi = std::max(hi, v);
      }
    }
  }
  if (lo > hi) lo = 50, hi = 500;
  const double pad = std::max(5.0, 0.05 * (hi - lo));
  lo = std::max(0.0, lo - pad);
  hi += pad;

  const double height = top + static_cast<double>(sets.size()) * (panel_h + gap);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";

  const double plot_w = width - left - right;
  double y0 = top;
  for (const auto& [sigma, samples] : sets) {
    auto px = [&](std::size_t t) { return left + plot_w * static_cast<double>(t) / static_cast<double>(std::max<std::size_t>(frames - 1, 1)); };
    auto py = [&](double f) { return y0 + panel_h - panel_h * (f - lo) / (hi - lo); };
    svg << "<rect x=\"" << left << "\" y=\"" << y0 << "\" width=\"" << plot_w << "\" height=\"" << panel_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left + 6 << "\" y=\"" << y0 + 16 << "\">sigma = " << sigma << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
      const double f = lo + (hi - lo) * k / 4.0;
      svg << "<line x1=\"" << left - 4 << "\" x2=\"" << left << "\" y1=\"" << py(f) << "\" y2=\"" << py(f)
          << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << py(f) + 4
          << "\" text-anchor=\"end\">" << fmt(f) << "</text>\n";
    }
    for (int k = 0; k <= 5; ++k) {
      const auto t = static_cast<std::size_t>(std::lround(static_cast<double>(frames - 1) * k / 5.0));
      svg << "<text x=\"" << px(t) << "\" y=\"" << y0 + panel_h + 16 << "\" text-anchor=\"middle\">" << t
          << "</text>\n";
    }
    svg << "<text x=\"16\" y=\"" << y0 + panel_h / 2 << "\" transform=\"rotate(-90 16 " << y0 + panel_h / 2
        << ")\" text-anchor=\"middle\">f0 (Hz)</text>\n";
    for (std::size_t k = 0; k < samples.size(); ++k) {
      std::string d;
      bool pen = false;
      for (std::size_t t = 0; t < samples[k].size(); ++t) {
        const double f = samples[k][t];
        if (f <= 0) {
          pen = false;
          continue;
        }
        d += (pen ? " L" : " M") + fmt(px(t)) + "," + fmt(py(f));
        pen = true;
      }
      if (d.empty()) continue;
      svg << "<path d=\"" << d << "\" fill=\"none\" stroke-width=\"1.5\" stroke-opacity=\"0.8\" stroke=\""
          << kPalette[k % std::size(kPalette)] << "\"/>\n";
    }
    y0 += panel_h + gap;
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 8 << "\" text-anchor=\"middle\">frame</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace varflow::cli
