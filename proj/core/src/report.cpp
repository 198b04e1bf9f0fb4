#include "csix/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csix/errors.hpp"
#include "format.hpp"

namespace csix {

namespace {

using detail::fmt_g6;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("svg: non-finite ") + what + " coordinate");
  }
}

std::string escape_xml(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
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

struct Rgb {
  double r, g, b;
};

std::string rgb_string(const Rgb& c) {
  auto clamp255 = [](double v) { return std::llround(std::clamp(v, 0.0, 255.0)); };
  std::ostringstream out;
  out << "rgb(" << clamp255(c.r) << ',' << clamp255(c.g) << ',' << clamp255(c.b) << ')';
  return out.str();
}

Rgb diverging_rgb(double value) {
  double v = std::clamp(value, -1.0, 1.0);
  auto lerp = [](const Rgb& a, const Rgb& b, double t) {
    return Rgb{a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
  };
  const Rgb blue{0, 0, 255};
  const Rgb cyan{0, 255, 255};
  const Rgb white{255, 255, 255};
  const Rgb yellow{255, 255, 0};
  const Rgb red{255, 0, 0};
  if (v <= -0.5) return lerp(blue, cyan, (v + 1.0) / 0.5);
  if (v < 0.0) return lerp(cyan, white, (v + 0.5) / 0.5);
  if (v < 0.5) return lerp(white, yellow, v / 0.5);
  return lerp(yellow, red, (v - 0.5) / 0.5);
}

// Maps data space to a pixel rectangle, y growing upward in data space.
struct Frame {
  double x0, x1, y0, y1;      // data range
  double px, py, pw, ph;      // pixel rectangle

  double x(double v) const { return px + (v - x0) / (x1 - x0) * pw; }
  double y(double v) const { return py + ph - (v - y0) / (y1 - y0) * ph; }
};

void draw_axes(SvgDocument& svg, const Frame& f) {
  svg.add_line(f.px, f.py + f.ph, f.px + f.pw, f.py + f.ph, "#333333", 1.0);
  svg.add_line(f.px, f.py, f.px, f.py + f.ph, "#333333", 1.0);
}

const char* kCurvePalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

SvgDocument::SvgDocument(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw ConfigError("svg: document size must be positive");
}

void SvgDocument::add_rect(double x, double y, double w, double h, const std::string& fill) {
  require_finite(x, "rect");
  require_finite(y, "rect");
  require_finite(w, "rect");
  require_finite(h, "rect");
  elements_.push_back("<rect x=\"" + fmt_g6(x) + "\" y=\"" + fmt_g6(y) + "\" width=\"" +
                      fmt_g6(w) + "\" height=\"" + fmt_g6(h) + "\" fill=\"" + fill + "\"/>");
}

void SvgDocument::add_circle(double cx, double cy, double r, const std::string& fill,
                             double opacity) {
  require_finite(cx, "circle");
  require_finite(cy, "circle");
  require_finite(r, "circle");
  std::string el = "<circle cx=\"" + fmt_g6(cx) + "\" cy=\"" + fmt_g6(cy) + "\" r=\"" +
                   fmt_g6(r) + "\" fill=\"" + fill + "\"";
  if (opacity != 1.0) el += " fill-opacity=\"" + fmt_g6(opacity) + "\"";
  el += "/>";
  elements_.push_back(std::move(el));
}

void SvgDocument::add_line(double x1, double y1, double x2, double y2,
                           const std::string& stroke, double width) {
  require_finite(x1, "line");
  require_finite(y1, "line");
  require_finite(x2, "line");
  require_finite(y2, "line");
  elements_.push_back("<line x1=\"" + fmt_g6(x1) + "\" y1=\"" + fmt_g6(y1) + "\" x2=\"" +
                      fmt_g6(x2) + "\" y2=\"" + fmt_g6(y2) + "\" stroke=\"" + stroke +
                      "\" stroke-width=\"" + fmt_g6(width) + "\"/>");
}

void SvgDocument::add_polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                               const std::string& stroke, double width, double opacity,
                               bool dashed) {
  if (xs.size() != ys.size() || xs.empty()) {
    throw ConfigError("svg: polyline needs matching non-empty coordinate lists");
  }
  std::string points;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require_finite(xs[i], "polyline");
    require_finite(ys[i], "polyline");
    if (i) points += ' ';
    points += fmt_g6(xs[i]) + "," + fmt_g6(ys[i]);
  }
  std::string el = "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + stroke +
                   "\" stroke-width=\"" + fmt_g6(width) + "\"";
  if (opacity != 1.0) el += " stroke-opacity=\"" + fmt_g6(opacity) + "\"";
  if (dashed) el += " stroke-dasharray=\"6,4\"";
  el += "/>";
  elements_.push_back(std::move(el));
}

void SvgDocument::add_text(double x, double y, const std::string& text, int font_size,
                           const std::string& fill) {
  require_finite(x, "text");
  require_finite(y, "text");
  elements_.push_back("<text x=\"" + fmt_g6(x) + "\" y=\"" + fmt_g6(y) +
                      "\" font-family=\"sans-serif\" font-size=\"" +
                      std::to_string(font_size) + "\" fill=\"" + fill + "\">" +
                      escape_xml(text) + "</text>");
}

std::string SvgDocument::to_xml() const {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
      << height_ << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n";
  for (const auto& el : elements_) out << "  " << el << '\n';
  out << "</svg>\n";
  return out.str();
}

std::string diverging_color(double value) {
  if (!std::isfinite(value)) throw NumericError("diverging_color: non-finite value");
  return rgb_string(diverging_rgb(value));
}

std::string class_color(int class_id, int num_classes, bool dark) {
  if (num_classes < 1 || class_id < 1 || class_id > num_classes) {
    throw ConfigError("class_color: class id outside [1, M]");
  }
  double hue = 360.0 * (class_id - 1) / num_classes;
  std::ostringstream out;
  out << "hsl(" << fmt_g6(hue) << ",70%," << (dark ? "32%" : "68%") << ")";
  return out.str();
}

SvgDocument render_scatter(const Embedding2D& embedding, Split highlight) {
  const auto n = embedding.points.rows();
  if (n == 0) throw ConfigError("render_scatter: empty embedding");
  if (embedding.labels.size() != static_cast<std::size_t>(n) ||
      embedding.splits.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("render_scatter: embedding lacks labels/splits");
  }
  int classes = *std::max_element(embedding.labels.begin(), embedding.labels.end());

  SvgDocument svg(760, 560);
  double x0 = embedding.points.col(0).minCoeff();
  double x1 = embedding.points.col(0).maxCoeff();
  double y0 = embedding.points.col(1).minCoeff();
  double y1 = embedding.points.col(1).maxCoeff();
  double pad_x = std::max(1e-9, (x1 - x0) * 0.05);
  double pad_y = std::max(1e-9, (y1 - y0) * 0.05);
  Frame f{x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y, 15, 15, 560, 530};
  svg.add_rect(f.px, f.py, f.pw, f.ph, "#fafafa");

  // Background split first, highlighted split on top.
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index i = 0; i < n; ++i) {
      bool highlighted = embedding.splits[i] == highlight;
      if ((pass == 1) != highlighted) continue;
      svg.add_circle(f.x(embedding.points(i, 0)), f.y(embedding.points(i, 1)), 2.5,
                     class_color(embedding.labels[i], classes, highlighted),
                     highlighted ? 0.9 : 0.5);
    }
  }

  double lx = 600;
  double ly = 30;
  svg.add_text(lx, ly - 12, "locations", 12);
  for (int c = 1; c <= classes; ++c) {
    svg.add_circle(lx + 6, ly + (c - 1) * 18, 5, class_color(c, classes, true));
    svg.add_text(lx + 18, ly + (c - 1) * 18 + 4, "p" + std::to_string(c), 12);
  }
  double ty = ly + classes * 18 + 10;
  svg.add_text(lx, ty, std::string("highlight: ") + to_string(highlight), 12);
  if (embedding.silhouette_score) {
    std::string split_name =
        embedding.silhouette_split ? to_string(*embedding.silhouette_split) : "all";
    svg.add_text(lx, ty + 18,
                 "silhouette (" + split_name + ") = " +
                     detail::fmt_fixed(*embedding.silhouette_score, 3),
                 12);
  }
  svg.add_text(lx, ty + 36, "KL = " + detail::fmt_fixed(embedding.final_kl, 4), 12);
  return svg;
}

namespace {

// Shared body for the channel and subcarrier heatmaps: polylines of the
// given traces plus a blended relevance strip of `cells` cells.
void heatmap_panel(SvgDocument& svg, const Frame& f, const std::vector<Vector>& traces,
                   const std::vector<Vector>& scores, int cells, double strip_y,
                   double strip_h) {
  for (const auto& trace : traces) {
    std::vector<double> xs(trace.size());
    std::vector<double> ys(trace.size());
    for (Eigen::Index k = 0; k < trace.size(); ++k) {
      xs[static_cast<std::size_t>(k)] = f.x(static_cast<double>(k + 1));
      ys[static_cast<std::size_t>(k)] = f.y(trace[k]);
    }
    svg.add_polyline(xs, ys, "#5b7aa6", 0.8, 0.45);
  }
  double cell_w = f.pw / cells;
  for (int k = 0; k < cells; ++k) {
    Rgb acc{0, 0, 0};
    for (const auto& s : scores) {
      Rgb c = diverging_rgb(s[k]);
      acc.r += c.r;
      acc.g += c.g;
      acc.b += c.b;
    }
    double count = static_cast<double>(scores.size());
    acc = {acc.r / count, acc.g / count, acc.b / count};
    svg.add_rect(f.px + k * cell_w, strip_y, cell_w, strip_h, rgb_string(acc));
  }
}

}  // namespace

SvgDocument render_heatmap(const std::vector<Vector>& samples,
                           const std::vector<Vector>& h_primes, int n, int m) {
  if (samples.empty() || samples.size() != h_primes.size()) {
    throw ConfigError("render_heatmap: need matching sample and score lists");
  }
  const auto K = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != K) throw ConfigError("render_heatmap: inconsistent channel counts");
  }
  for (const auto& h : h_primes) {
    if (h.size() != K) throw ConfigError("render_heatmap: score length mismatch");
  }

  SvgDocument svg(720, 420);
  double peak = 1e-9;
  for (const auto& s : samples) peak = std::max(peak, s.maxCoeff());
  Frame f{0.5, static_cast<double>(K) + 0.5, 0.0, peak * 1.05, 50, 40, 640, 300};
  draw_axes(svg, f);
  heatmap_panel(svg, f, samples, h_primes, static_cast<int>(K), 360, 14);
  svg.add_text(50, 24, "relevance h'(p" + std::to_string(n) + " -> p" + std::to_string(m) +
                            ") over " + std::to_string(samples.size()) + " samples",
               13);
  svg.add_text(50, 398, "channel", 11);
  svg.add_text(640, 398, "1 .. " + std::to_string(K), 11);
  return svg;
}

SvgDocument render_heatmap_subcarrier(const std::vector<Vector>& samples,
                                      const std::vector<Vector>& s_primes, int S, int A,
                                      int n, int m) {
  if (samples.empty() || samples.size() != s_primes.size()) {
    throw ConfigError("render_heatmap_subcarrier: need matching sample and score lists");
  }
  for (const auto& s : samples) {
    if (s.size() != static_cast<Eigen::Index>(S) * A) {
      throw ConfigError("render_heatmap_subcarrier: sample length != S*A");
    }
  }
  for (const auto& s : s_primes) {
    if (s.size() != S) throw ConfigError("render_heatmap_subcarrier: score length != S");
  }

  const int panel_h = 170;
  SvgDocument svg(720, 40 + A * panel_h);
  double peak = 1e-9;
  for (const auto& s : samples) peak = std::max(peak, s.maxCoeff());
  svg.add_text(50, 24, "subcarrier relevance s'(p" + std::to_string(n) + " -> p" +
                            std::to_string(m) + ")",
               13);
  for (int a = 0; a < A; ++a) {
    double top = 40.0 + a * panel_h;
    Frame f{0.5, S + 0.5, 0.0, peak * 1.05, 50, top, 640, panel_h - 50.0};
    draw_axes(svg, f);
    std::vector<Vector> block;
    block.reserve(samples.size());
    for (const auto& s : samples) block.push_back(s.segment(a * S, S));
    heatmap_panel(svg, f, block, s_primes, S, top + panel_h - 44.0, 12);
    svg.add_text(54, top + 14, "antenna pair " + std::to_string(a + 1), 11);
  }
  return svg;
}

SvgDocument render_curve(const std::vector<ExperimentCurve>& curves) {
  if (curves.empty()) throw ConfigError("render_curve: no curves");
  const std::size_t steps = curves.front().points.size();
  for (const auto& c : curves) {
    if (c.points.size() != steps) {
      throw ConfigError("render_curve: curves have different step counts");
    }
  }
  const int K = static_cast<int>(steps) - 1;

  SvgDocument svg(760, 480);
  Frame f{0.0, static_cast<double>(K), 0.0, 100.0, 60, 30, 500, 390};
  svg.add_rect(f.px, f.py, f.pw, f.ph, "#fcfcfc");
  for (int pct = 0; pct <= 100; pct += 20) {
    svg.add_line(f.px, f.y(pct), f.px + f.pw, f.y(pct), "#dddddd", 0.5);
    svg.add_text(f.px - 34, f.y(pct) + 4, std::to_string(pct) + "%", 11);
  }
  draw_axes(svg, f);
  svg.add_text(f.px + f.pw / 2 - 60, 462, "manipulated elements t", 12);

  double ly = 40;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& curve = curves[c];
    const std::string color = kCurvePalette[c % std::size(kCurvePalette)];
    std::vector<double> xs(steps);
    std::vector<double> ys_true(steps);
    std::vector<double> ys_target(steps);
    for (std::size_t i = 0; i < steps; ++i) {
      xs[i] = f.x(curve.points[i].t);
      ys_true[i] = f.y(curve.points[i].frac_true * 100.0);
      ys_target[i] = f.y(curve.points[i].frac_target * 100.0);
    }
    svg.add_polyline(xs, ys_true, color, 1.6);
    svg.add_polyline(xs, ys_target, color, 1.6, 1.0, true);

    std::string tag = to_string(curve.kind) + "(p" + std::to_string(curve.input_class) +
                      " -> p" + std::to_string(curve.target_class) + ") " +
                      to_string(curve.mode);
    if (curve.granularity == Granularity::subcarrier) tag += " [subcarrier]";
    svg.add_line(580, ly - 4, 606, ly - 4, color, 1.6);
    svg.add_text(612, ly, tag, 11);
    svg.add_text(612, ly + 14, "solid: true class, dashed: target", 9, "#777777");
    ly += 34;
  }
  return svg;
}

}  // namespace csix
