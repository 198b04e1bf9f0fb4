#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csix/dataset.hpp"
#include "csix/mlp.hpp"
#include "csix/types.hpp"

namespace csix {

/// 2D embedding of N points with per-point class labels and split tags.
/// labels/splits may be empty when the embedding has no attached metadata.
struct Embedding2D {
  Matrix points;  ///< N x 2
  std::vector<int> labels;
  std::vector<Split> splits;
  double initial_kl = 0.0;  ///< KL divergence at the random initialization
  double final_kl = 0.0;    ///< KL divergence after optimization
  std::optional<double> silhouette_score;  ///< annotation for rendering
  std::optional<Split> silhouette_split;
};

struct TsneConfig {
  double perplexity = 30.0;
  int iters = 1000;
  std::uint64_t seed = 0;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iter = 250;
  double early_exaggeration = 12.0;
  int exaggeration_iters = 250;
  /// Constant-bandwidth joint Gaussian affinities instead of the
  /// perplexity-calibrated conditionals. For comparison only.
  bool paper_affinities = false;
};

/// Rows of last-hidden-layer activations, one per sample, computed with the
/// same per-sample forward pass the rest of the library uses.
Matrix extract_last_hidden(const NetworkParams& params, const Dataset& dataset);

/// Student-t SNE of the rows of `data` onto 2D by gradient descent with
/// momentum on KL(P||Q). Deterministic given the seed. Labels never enter
/// the computation.
Embedding2D tsne(const Matrix& data, const TsneConfig& config);
Embedding2D tsne(const Matrix& data, double perplexity, int iters, std::uint64_t seed);

/// Mean silhouette score over the points: (d_nearest - d_intra) / max of
/// the two, Euclidean distance; singleton-cluster points and 0/0 cases
/// score 0. Needs at least two clusters.
double silhouette(const Matrix& points, const std::vector<int>& labels);

/// Silhouette restricted to the points of one split.
double silhouette(const Embedding2D& embedding, Split subset);

/// CSV export: header `x,y,label,split`.
std::string embedding_to_csv(const Embedding2D& embedding);

}  // namespace csix
