#pragma once

#include <string>
#include <vector>

#include "csix/mlp.hpp"
#include "csix/types.hpp"

namespace csix {

/// Stabilizer added to relevance denominators, signed away from zero
/// (sign(0) counts as +).
inline constexpr double kLrpEpsilon = 1e-9;

/// Relevance decomposition of one pre-softmax output score back to the
/// input channels, for an input of class n and a target class m (1-based).
/// h_prime is h scaled so max|h'| = 1, or all zero when h is.
struct RelevanceMap {
  int input_class = 0;   ///< n
  int target_class = 0;  ///< m
  std::vector<Vector> layer_relevance;  ///< R^(L) down to R^(1)
  Vector h;
  Vector h_prime;
  double z_out = 0.0;  ///< z_m^(L+1)
};

/// Per-subcarrier relevance: each score averages the normalized channel
/// scores of the A antenna pairs carrying that subcarrier.
struct SubcarrierScores {
  Vector s_prime;  ///< length S, each entry in [-1, 1]
  int input_class = 0;
  int target_class = 0;
};

/// Relevance of the last hidden layer for output class m: each unit gets
/// its share a_i w_{m,i} of the stabilized pre-softmax sum, times z_m.
Vector relevance_last_hidden(const ForwardTrace& trace, const NetworkParams& params, int m);

/// Propagates relevance from hidden layer `layer` (2-based up to L) to the
/// layer below.
Vector relevance_backward(const ForwardTrace& trace, const NetworkParams& params,
                          const Vector& relevance, int layer);

/// Propagates relevance from the first hidden layer onto the input channels.
Vector relevance_input(const ForwardTrace& trace, const NetworkParams& params,
                       const Vector& relevance);

/// h / max|h|; the all-zero vector maps to itself.
Vector normalize_relevance(const Vector& h);

/// Full chain: forward, output-layer split, backward recursion, input
/// projection, normalization.
RelevanceMap explain(const NetworkParams& params, const Vector& x, int n, int m);

SubcarrierScores subcarrier_scores(const Vector& h_prime, int S, int A,
                                   int input_class, int target_class);

/// JSON document with fields n, m, z_out, h, h_prime, s_prime.
std::string relevance_map_to_json(const RelevanceMap& map, const SubcarrierScores& scores);

}  // namespace csix
