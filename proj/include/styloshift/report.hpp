#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "styloshift/cluster.hpp"
#include "styloshift/common.hpp"
#include "styloshift/stats.hpp"

namespace styloshift {

class UnpairedChunk : public Error {
public:
  using Error::Error;
};

struct Rgb {
  int r = 0, g = 0, b = 0;
  std::string hex() const {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
  }
};

struct ColorRamp {
  Rgb neutral{247, 247, 247};
  Rgb positive{0, 136, 0};   // green pole
  Rgb negative{178, 24, 43};  // red pole
};

inline ColorRamp default_ramp() { return {}; }

inline ColorRamp colorblind_safe_ramp() {
  // blue / orange diverging
  return {{247, 247, 247}, {33, 102, 172}, {230, 97, 1}};
}

// Linear, symmetric about 0, clipped exactly at +-cap.
inline Rgb ramp_color(double value, double cap, const ColorRamp& ramp) {
  double t = value / cap;
  if (t > 1.0) t = 1.0;
  if (t < -1.0) t = -1.0;
  const Rgb& end = t >= 0.0 ? ramp.positive : ramp.negative;
  double a = std::fabs(t);
  auto lerp = [a](int from, int to) {
    return static_cast<int>(std::lround(from + a * (to - from)));
  };
  return {lerp(ramp.neutral.r, end.r), lerp(ramp.neutral.g, end.g),
          lerp(ramp.neutral.b, end.b)};
}

struct ReportSpec {
  double color_cap = 50.0;  // |b| at full saturation, in baseline SE units
  bool colorblind_safe = false;
  std::size_t bootstrap_iters = 2000;
  RngSeed seed;
};

struct RenderOutput {
  std::string svg;
  std::string table;  // tab-separated; every plotted value appears here
};

namespace svgdetail {

inline std::string num(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v;
  std::string s = ss.str();
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string esc(const std::string& s) {
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

inline std::string open_svg(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " +
         num(h) + "\" font-family=\"sans-serif\">\n";
}

inline std::string rect(double x, double y, double w, double h,
                        const std::string& fill,
                        const std::string& extra = "") {
  return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
         num(w) + "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"" +
         (extra.empty() ? "" : " " + extra) + "/>\n";
}

inline std::string line(double x1, double y1, double x2, double y2,
                        const std::string& stroke, double width = 1.0,
                        const std::string& extra = "") {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" +
         num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke +
         "\" stroke-width=\"" + num(width) + "\"" +
         (extra.empty() ? "" : " " + extra) + "/>\n";
}

inline std::string text(double x, double y, const std::string& s,
                        double size = 11.0, const std::string& extra = "") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
         num(size) + "\"" + (extra.empty() ? "" : " " + extra) + ">" +
         esc(s) + "</text>\n";
}

inline std::string circle(double cx, double cy, double r,
                          const std::string& fill) {
  return "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" +
         num(r) + "\" fill=\"" + fill + "\"/>\n";
}

inline const std::vector<std::string>& genre_palette() {
  static const std::vector<std::string> colors = {
      "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
      "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b2df8a",
      "#fb9a99", "#cab2d6", "#fdbf6f", "#a6cee3", "#33a02c"};
  return colors;
}

// Stable genre -> color assignment: sorted genre order indexes the
// palette.
inline std::map<std::string, std::string> assign_genre_colors(
    const std::vector<std::string>& genres) {
  std::vector<std::string> uniq = genres;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < uniq.size(); ++i)
    out[uniq[i]] = genre_palette()[i % genre_palette().size()];
  return out;
}

}  // namespace svgdetail

// Heatmap of normalized shifts, rows ordered by the dendrogram display
// order, significant cells bold-stroked.
inline RenderOutput render_heatmap(const std::vector<BenchmarkResult>& results,
                                   const Dendrogram& dendro,
                                   const std::vector<std::string>& dim_ids,
                                   const ReportSpec& spec) {
  using namespace svgdetail;
  if (results.empty()) throw Error("no results to render");
  const std::size_t dims = dim_ids.size();
  for (const auto& r : results)
    if (r.b.size() != dims)
      throw DimensionMismatch("result " + r.config_id +
                              " has wrong dimension count");
  std::map<std::string, const BenchmarkResult*> by_id;
  for (const auto& r : results) by_id[r.config_id] = &r;
  std::vector<const BenchmarkResult*> ordered;
  for (std::size_t leaf : dendro.leaf_order) {
    auto it = by_id.find(dendro.leaves[leaf]);
    if (it == by_id.end())
      throw Error("dendrogram leaf '" + dendro.leaves[leaf] +
                  "' has no benchmark result");
    ordered.push_back(it->second);
  }
  // results without a dendrogram leaf go last, sorted by id
  for (const auto& [id, r] : by_id) {
    bool found = false;
    for (const auto* o : ordered)
      if (o == r) { found = true; break; }
    if (!found) ordered.push_back(r);
  }

  const ColorRamp ramp =
      spec.colorblind_safe ? colorblind_safe_ramp() : default_ramp();
  const double cell_w = 60, cell_h = 22, label_w = 220, header_h = 30;
  const double width = label_w + cell_w * dims + 20;
  const double height = header_h + cell_h * ordered.size() + 20;

  std::string svg = open_svg(width, height);
  std::string table = "config_id";
  for (const auto& d : dim_ids) table += "\t" + d;
  table += "\n";

  for (std::size_t d = 0; d < dims; ++d)
    svg += text(label_w + d * cell_w + cell_w / 2, header_h - 10, dim_ids[d],
                11, "text-anchor=\"middle\"");
  for (std::size_t row = 0; row < ordered.size(); ++row) {
    const BenchmarkResult& r = *ordered[row];
    double y = header_h + row * cell_h;
    svg += text(label_w - 6, y + cell_h - 7, r.config_id, 11,
                "text-anchor=\"end\"");
    table += r.config_id;
    for (std::size_t d = 0; d < dims; ++d) {
      Rgb color = ramp_color(r.b[d], spec.color_cap, ramp);
      std::string extra;
      if (r.significant[d]) extra = "stroke=\"#000000\" stroke-width=\"2\"";
      svg += rect(label_w + d * cell_w + 1, y + 1, cell_w - 2, cell_h - 2,
                  color.hex(), extra);
      svg += text(label_w + d * cell_w + cell_w / 2, y + cell_h - 7,
                  num(r.b[d]), 9, "text-anchor=\"middle\"");
      table += "\t" + format_real(r.b[d]);
    }
    table += "\n";
  }
  svg += "</svg>\n";
  return {svg, table};
}

// Bar chart of vector lengths B, ascending, with CI whiskers. Linear
// axis; ties break by config_id.
inline RenderOutput render_ranking(const std::vector<BenchmarkResult>& results,
                                   const ReportSpec& spec) {
  using namespace svgdetail;
  (void)spec;
  std::vector<const BenchmarkResult*> ordered;
  for (const auto& r : results) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const BenchmarkResult* a, const BenchmarkResult* b) {
              if (a->B != b->B) return a->B < b->B;
              return a->config_id < b->config_id;
            });
  double max_v = 1.0;
  for (const auto* r : ordered) max_v = std::max(max_v, r->B_ci_high);

  const double label_w = 220, bar_h = 18, gap = 6, plot_w = 420;
  const double width = label_w + plot_w + 30;
  const double height = 20 + ordered.size() * (bar_h + gap) + 20;
  auto xpos = [&](double v) { return label_w + v / max_v * plot_w; };

  std::string svg = open_svg(width, height);
  std::string table = "config_id\tB\tci_low\tci_high\n";
  svg += line(label_w, 10, label_w, height - 10, "#333333");
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const BenchmarkResult& r = *ordered[i];
    double y = 20 + i * (bar_h + gap);
    svg += text(label_w - 6, y + bar_h - 5, r.config_id, 11,
                "text-anchor=\"end\"");
    svg += rect(label_w, y, xpos(r.B) - label_w, bar_h, "#4477aa");
    double cy = y + bar_h / 2;
    svg += line(xpos(r.B_ci_low), cy, xpos(r.B_ci_high), cy, "#222222", 1.5);
    svg += line(xpos(r.B_ci_low), cy - 4, xpos(r.B_ci_low), cy + 4,
                "#222222", 1.5);
    svg += line(xpos(r.B_ci_high), cy - 4, xpos(r.B_ci_high), cy + 4,
                "#222222", 1.5);
    table += r.config_id + "\t" + format_real(r.B) + "\t" +
             format_real(r.B_ci_low) + "\t" + format_real(r.B_ci_high) + "\n";
  }
  svg += "</svg>\n";
  return {svg, table};
}

struct ScatterPoint {
  std::string chunk_id;
  std::string genre;
  double x = 0.0;  // reference score
  double y = 0.0;  // comparison score
};

// One panel per dimension: reference vs comparison scores with identity
// line, genre coloring and a mean-shift marker with bootstrap CI band.
inline RenderOutput render_scatter(
    const std::vector<std::vector<ScatterPoint>>& per_dim,
    const std::vector<std::string>& dim_ids, const ReportSpec& spec) {
  using namespace svgdetail;
  if (per_dim.size() != dim_ids.size())
    throw DimensionMismatch("scatter panels do not match dimension ids");

  std::vector<std::string> genres;
  for (const auto& pts : per_dim)
    for (const auto& p : pts) genres.push_back(p.genre);
  auto colors = assign_genre_colors(genres);

  const double panel = 220, margin = 46, legend_h = 26;
  const std::size_t cols = std::min<std::size_t>(3, dim_ids.size());
  const std::size_t rows = (dim_ids.size() + cols - 1) / cols;
  const double width = cols * (panel + margin) + margin;
  const double height = rows * (panel + margin) + margin + legend_h;

  std::string svg = open_svg(width, height);
  std::string table = "dim_id\tchunk_id\tgenre\tx\ty\n";

  for (std::size_t d = 0; d < dim_ids.size(); ++d) {
    const auto& pts = per_dim[d];
    double x0 = margin + (d % cols) * (panel + margin);
    double y0 = margin + (d / cols) * (panel + margin);
    double lo = 0.0, hi = 1.0;
    if (!pts.empty()) {
      lo = pts[0].x;
      hi = pts[0].x;
      for (const auto& p : pts) {
        lo = std::min({lo, p.x, p.y});
        hi = std::max({hi, p.x, p.y});
      }
      double pad = (hi - lo) * 0.08 + 1e-9;
      lo -= pad;
      hi += pad;
    }
    auto sx = [&](double v) { return x0 + (v - lo) / (hi - lo) * panel; };
    auto sy = [&](double v) {
      return y0 + panel - (v - lo) / (hi - lo) * panel;
    };
    svg += rect(x0, y0, panel, panel, "none", "stroke=\"#999999\"");
    svg += text(x0 + panel / 2, y0 - 8, dim_ids[d], 12,
                "text-anchor=\"middle\"");
    svg += line(sx(lo), sy(lo), sx(hi), sy(hi), "#bbbbbb", 1.0,
                "stroke-dasharray=\"4,3\"");

    std::vector<double> shifts;
    for (const auto& p : pts) {
      svg += circle(sx(p.x), sy(p.y), 2.6, colors[p.genre]);
      shifts.push_back(p.y - p.x);
      table += dim_ids[d] + "\t" + p.chunk_id + "\t" + p.genre + "\t" +
               format_real(p.x) + "\t" + format_real(p.y) + "\n";
    }
    if (shifts.size() >= 2) {
      double m = detail::mean(shifts);
      // bootstrap CI band of the mean shift, drawn around the identity line
      std::vector<double> draws;
      draws.reserve(spec.bootstrap_iters);
      for (std::size_t k = 0; k < spec.bootstrap_iters; ++k) {
        detail::Prng rng(detail::substream(spec.seed.seed, 0x5ca7 + d, k));
        double s = 0.0;
        for (std::size_t j = 0; j < shifts.size(); ++j)
          s += shifts[rng.index(shifts.size())];
        draws.push_back(s / static_cast<double>(shifts.size()));
      }
      std::sort(draws.begin(), draws.end());
      double ci_lo = detail::percentile(draws, 0.025);
      double ci_hi = detail::percentile(draws, 0.975);
      svg += line(sx(lo), sy(lo + m), sx(hi), sy(hi + m), "#cc3311", 1.5);
      svg += line(sx(lo), sy(lo + ci_lo), sx(hi), sy(hi + ci_lo), "#cc3311",
                  0.8, "stroke-dasharray=\"2,2\"");
      svg += line(sx(lo), sy(lo + ci_hi), sx(hi), sy(hi + ci_hi), "#cc3311",
                  0.8, "stroke-dasharray=\"2,2\"");
      table += dim_ids[d] + "\tmean_shift\t\t" + format_real(m) + "\t" +
               format_real(ci_lo) + ";" + format_real(ci_hi) + "\n";
    }
  }
  // legend
  double lx = margin, ly = height - legend_h + 8;
  for (const auto& [genre, color] : colors) {
    svg += circle(lx, ly, 4, color);
    svg += text(lx + 8, ly + 4, genre, 10);
    lx += 14 + 7.0 * static_cast<double>(genre.size()) + 16;
  }
  svg += "</svg>\n";
  return {svg, table};
}

// Pairs two score maps into scatter points per dimension; every chunk in
// `reference` must exist in `comparison`.
inline std::vector<std::vector<ScatterPoint>> pair_scores(
    const std::map<std::string, DimensionScores>& reference,
    const std::map<std::string, DimensionScores>& comparison,
    const std::map<std::string, std::string>& genre_of, std::size_t dims) {
  std::vector<std::vector<ScatterPoint>> per_dim(dims);
  for (const auto& [chunk, ref] : reference) {
    auto it = comparison.find(chunk);
    if (it == comparison.end())
      throw UnpairedChunk("chunk '" + chunk + "' has no comparison scores");
    if (ref.v.size() != dims || it->second.v.size() != dims)
      throw DimensionMismatch("score vectors of unexpected length");
    std::string genre;
    auto g = genre_of.find(chunk);
    if (g != genre_of.end()) genre = g->second;
    for (std::size_t d = 0; d < dims; ++d)
      per_dim[d].push_back({chunk, genre, ref.v[d], it->second.v[d]});
  }
  return per_dim;
}

}  // namespace styloshift
