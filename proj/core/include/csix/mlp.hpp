#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csix/dataset.hpp"
#include "csix/types.hpp"

namespace csix {

enum class InitScheme { gaussian_unit, scaled };

InitScheme init_scheme_from_string(const std::string& text);
std::string to_string(InitScheme scheme);

/// Fully connected ReLU network with a softmax output layer. dims is
/// [K, n_1, ..., n_L, M]; weights[l] maps layer l to layer l+1 and has
/// shape n_{l+1} x n_l.
struct NetworkParams {
  std::vector<int> dims;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  int input_size() const { return dims.front(); }
  int output_size() const { return dims.back(); }
  /// Number of hidden layers L.
  int hidden_layers() const { return static_cast<int>(dims.size()) - 2; }

  void validate() const;
};

/// Every intermediate of one forward pass, retained for relevance
/// propagation: z holds pre-activations for layers 1..L+1, a holds the
/// ReLU activations for layers 1..L, y the softmax outputs.
struct ForwardTrace {
  Vector x;
  std::vector<Vector> z;
  std::vector<Vector> a;
  Vector y;
};

struct TrainConfig {
  int backprop_iters = 1500;  ///< epochs of supervised backprop
  int pretrain_iters = 30;    ///< autoencoder epochs per hidden layer; 0 disables
  double learning_rate = 0.01;
  int batch_size = 32;
  std::uint64_t seed = 1;
  InitScheme init = InitScheme::scaled;
};

/// Deterministic Gaussian initialization. gaussian_unit draws every weight
/// and bias from N(0, 1); scaled draws weights from N(0, 2/n_{l-1}) with
/// zero biases.
NetworkParams init_random(const std::vector<int>& dims, std::uint64_t seed, InitScheme init);

ForwardTrace forward(const NetworkParams& params, const Vector& x);

/// 1-based class id of the softmax argmax; ties resolve to the smallest id.
int predict(const NetworkParams& params, const Vector& x);

struct TrainResult {
  NetworkParams params;
  std::vector<double> loss_history;  ///< mean cross-entropy per epoch
};

/// Minibatch SGD on mean cross-entropy, optionally preceded by greedy
/// layer-wise autoencoder pretraining (tied decoder, squared error).
/// Pure function of (params, dataset, config); only train-split samples
/// are used.
TrainResult train(NetworkParams params, const Dataset& data, const TrainConfig& config);

/// Max relative error between the analytic cross-entropy gradient and
/// central finite differences over every parameter, for one sample.
double gradient_check(const NetworkParams& params, const Vector& x, int label, double epsilon);

/// JSON model file (format "mlp-v1"): dims, row-major weights, biases at
/// 17 significant digits, plus an optional input min-max scale block.
/// load(save(p)) reproduces p exactly.
void save_model(const NetworkParams& params, const std::string& path,
                const std::optional<MinMaxScale>& input_scale = std::nullopt);
NetworkParams load_model(const std::string& path,
                         std::optional<MinMaxScale>* input_scale = nullptr);

}  // namespace csix
