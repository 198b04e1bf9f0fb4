#pragma once

#include <string>
#include <vector>

#include "csix/dataset.hpp"
#include "csix/embedding.hpp"
#include "csix/manipulation.hpp"
#include "csix/types.hpp"

namespace csix {

/// Minimal SVG 1.1 builder. Rendering is pure: the same inputs always
/// produce byte-identical markup. All coordinates must be finite.
class SvgDocument {
 public:
  SvgDocument(int width, int height);

  void add_rect(double x, double y, double w, double h, const std::string& fill);
  void add_circle(double cx, double cy, double r, const std::string& fill,
                  double opacity = 1.0);
  void add_line(double x1, double y1, double x2, double y2, const std::string& stroke,
                double width = 1.0);
  void add_polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::string& stroke, double width, double opacity = 1.0,
                    bool dashed = false);
  void add_text(double x, double y, const std::string& text, int font_size,
                const std::string& fill = "#333333");

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t element_count() const { return elements_.size(); }

  std::string to_xml() const;

 private:
  int width_;
  int height_;
  std::vector<std::string> elements_;
};

/// Diverging blue-cyan-white-yellow-red map for values in [-1, 1],
/// anchored at 0 (white). Monotone in the value and symmetric around 0.
std::string diverging_color(double value);

/// Stable per-class hue; dark and light shades of the same hue mark the
/// highlighted and background splits.
std::string class_color(int class_id, int num_classes, bool dark);

/// Class-colored scatterplot of a 2D embedding; the highlighted split is
/// drawn in the darker shade on top. The legend carries the embedding's
/// silhouette annotation when present.
SvgDocument render_scatter(const Embedding2D& embedding, Split highlight);

/// CSI amplitude polylines of the given samples with a K-cell relevance
/// strip below. Per-sample h' scores are overlaid at display time: each
/// cell blends the per-sample colors, never the relevances themselves.
SvgDocument render_heatmap(const std::vector<Vector>& samples,
                           const std::vector<Vector>& h_primes, int n, int m);

/// One panel per antenna pair, each showing that pair's S subcarriers with
/// the per-subcarrier relevance strip.
SvgDocument render_heatmap_subcarrier(const std::vector<Vector>& samples,
                                      const std::vector<Vector>& s_primes, int S, int A,
                                      int n, int m);

/// Percentage-vs-step chart of one or more experiment curves: a solid
/// polyline for frac_true and a dashed one for frac_target per curve.
SvgDocument render_curve(const std::vector<ExperimentCurve>& curves);

}  // namespace csix
