#include "csix/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "csix/errors.hpp"
#include "format.hpp"

namespace csix {

namespace {

Vector softmax(const Vector& z) {
  Vector shifted = z.array() - z.maxCoeff();
  Vector e = shifted.array().exp();
  return e / e.sum();
}

double logsumexp(const Vector& z) {
  double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

void check_input(const NetworkParams& params, const Vector& x) {
  if (x.size() != params.input_size()) {
    throw ConfigError("forward: input length " + std::to_string(x.size()) +
                      " does not match network input size " +
                      std::to_string(params.input_size()));
  }
  if (!x.allFinite()) throw ConfigError("forward: non-finite input");
}

// Batched forward over the columns of X; returns layer activations
// (index 0 is X itself) and output pre-activations.
struct BatchTrace {
  std::vector<Matrix> a;
  Matrix z_out;
};

BatchTrace forward_batch(const NetworkParams& params, const Matrix& X) {
  const int L = params.hidden_layers();
  BatchTrace t;
  t.a.reserve(L + 1);
  t.a.push_back(X);
  for (int l = 0; l < L; ++l) {
    Matrix z = (params.weights[l] * t.a.back()).colwise() + params.biases[l];
    t.a.push_back(z.cwiseMax(0.0));
  }
  t.z_out = (params.weights[L] * t.a.back()).colwise() + params.biases[L];
  return t;
}

// Mean cross-entropy over the batch and the gradients for every layer.
struct Gradients {
  std::vector<Matrix> w;
  std::vector<Vector> b;
  double loss = 0.0;
};

Gradients backprop_batch(const NetworkParams& params, const Matrix& X,
                         const std::vector<int>& labels0) {
  const int L = params.hidden_layers();
  const auto B = X.cols();
  BatchTrace t = forward_batch(params, X);

  double loss = 0.0;
  Matrix dz(t.z_out.rows(), B);
  for (Eigen::Index c = 0; c < B; ++c) {
    Vector z = t.z_out.col(c);
    loss += logsumexp(z) - z[labels0[c]];
    Vector y = softmax(z);
    y[labels0[c]] -= 1.0;
    dz.col(c) = y;
  }
  loss /= static_cast<double>(B);

  Gradients g;
  g.loss = loss;
  g.w.resize(L + 1);
  g.b.resize(L + 1);
  for (int l = L; l >= 0; --l) {
    g.w[l] = (dz * t.a[l].transpose()) / static_cast<double>(B);
    g.b[l] = dz.rowwise().sum() / static_cast<double>(B);
    if (l > 0) {
      Matrix da = params.weights[l].transpose() * dz;
      dz = da.cwiseProduct((t.a[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

// Greedy layer-wise autoencoder pretraining with a tied decoder. The
// reconstruction error is averaged per dimension, which keeps the step
// size usable on raw (unscaled) amplitudes.
void pretrain_layers(NetworkParams& params, const Matrix& X, const TrainConfig& config,
                     std::mt19937_64& rng) {
  const int L = params.hidden_layers();
  const auto N = X.cols();
  Matrix H = X;
  for (int l = 0; l < L; ++l) {
    Vector dec_bias = Vector::Zero(H.rows());
    std::vector<int> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), 0);
    const double dims = static_cast<double>(H.rows());
    for (int epoch = 0; epoch < config.pretrain_iters; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (Eigen::Index start = 0; start < N; start += config.batch_size) {
        Eigen::Index size = std::min<Eigen::Index>(config.batch_size, N - start);
        Matrix h(H.rows(), size);
        for (Eigen::Index c = 0; c < size; ++c) h.col(c) = H.col(order[start + c]);

        Matrix z = (params.weights[l] * h).colwise() + params.biases[l];
        Matrix a = z.cwiseMax(0.0);
        Matrix rec = (params.weights[l].transpose() * a).colwise() + dec_bias;
        Matrix dres = (rec - h) / (static_cast<double>(size) * dims);

        Matrix gw = dres * a.transpose();  // gradient on the decoder W^T
        Matrix da = params.weights[l] * dres;
        Matrix dz = da.cwiseProduct((z.array() > 0.0).cast<double>().matrix());

        Matrix grad_w = gw.transpose() + dz * h.transpose();
        Vector grad_b = dz.rowwise().sum();
        Vector grad_c = dres.rowwise().sum();

        params.weights[l] -= config.learning_rate * grad_w;
        params.biases[l] -= config.learning_rate * grad_b;
        dec_bias -= config.learning_rate * grad_c;

        if (!params.weights[l].allFinite() || !params.biases[l].allFinite()) {
          throw NumericError("pretraining diverged at hidden layer " + std::to_string(l + 1) +
                             ", epoch " + std::to_string(epoch + 1));
        }
      }
    }
    H = ((params.weights[l] * H).colwise() + params.biases[l]).cwiseMax(0.0);
  }
}

nlohmann::json parse_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + " '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc = nlohmann::json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path + ": invalid JSON");
  return doc;
}

}  // namespace

InitScheme init_scheme_from_string(const std::string& text) {
  if (text == "gaussian-unit" || text == "gaussian_unit") return InitScheme::gaussian_unit;
  if (text == "scaled") return InitScheme::scaled;
  throw ConfigError("unknown init scheme '" + text + "' (expected scaled or gaussian-unit)");
}

std::string to_string(InitScheme scheme) {
  return scheme == InitScheme::gaussian_unit ? "gaussian-unit" : "scaled";
}

void NetworkParams::validate() const {
  if (dims.size() < 3) {
    throw ConfigError("network needs at least one hidden layer (dims [K, n_1, ..., M])");
  }
  for (int d : dims) {
    if (d < 1) throw ConfigError("network dims must all be >= 1");
  }
  const auto layers = dims.size() - 1;
  if (weights.size() != layers || biases.size() != layers) {
    throw ConfigError("network has " + std::to_string(weights.size()) + " weight and " +
                      std::to_string(biases.size()) + " bias blocks, expected " +
                      std::to_string(layers));
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (weights[l].rows() != dims[l + 1] || weights[l].cols() != dims[l]) {
      throw ConfigError("layer " + std::to_string(l + 1) + " weights are " +
                        std::to_string(weights[l].rows()) + "x" +
                        std::to_string(weights[l].cols()) + ", expected " +
                        std::to_string(dims[l + 1]) + "x" + std::to_string(dims[l]));
    }
    if (biases[l].size() != dims[l + 1]) {
      throw ConfigError("layer " + std::to_string(l + 1) + " bias length mismatch");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw ConfigError("layer " + std::to_string(l + 1) + " has non-finite parameters");
    }
  }
}

NetworkParams init_random(const std::vector<int>& dims, std::uint64_t seed, InitScheme init) {
  if (dims.size() < 3) {
    throw ConfigError("init_random: dims must name input, hidden and output layers");
  }
  for (int d : dims) {
    if (d < 1) throw ConfigError("init_random: dims must all be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  NetworkParams p;
  p.dims = dims;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Matrix w(dims[l + 1], dims[l]);
    double scale = init == InitScheme::gaussian_unit ? 1.0 : std::sqrt(2.0 / dims[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = scale * gauss(rng);
    }
    Vector b = Vector::Zero(dims[l + 1]);
    if (init == InitScheme::gaussian_unit) {
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = gauss(rng);
    }
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  return p;
}

ForwardTrace forward(const NetworkParams& params, const Vector& x) {
  params.validate();
  check_input(params, x);
  const int L = params.hidden_layers();

  ForwardTrace t;
  t.x = x;
  t.z.reserve(L + 1);
  t.a.reserve(L);
  const Vector* prev = &t.x;
  for (int l = 0; l < L; ++l) {
    t.z.push_back(params.weights[l] * (*prev) + params.biases[l]);
    t.a.push_back(t.z.back().cwiseMax(0.0));
    prev = &t.a.back();
  }
  t.z.push_back(params.weights[L] * (*prev) + params.biases[L]);
  t.y = softmax(t.z.back());
  return t;
}

int predict(const NetworkParams& params, const Vector& x) {
  ForwardTrace t = forward(params, x);
  int best = 0;
  for (int i = 1; i < t.y.size(); ++i) {
    if (t.y[i] > t.y[best]) best = i;
  }
  return best + 1;
}

TrainResult train(NetworkParams params, const Dataset& data, const TrainConfig& config) {
  params.validate();
  data.validate();
  if (config.backprop_iters < 0 || config.pretrain_iters < 0) {
    throw ConfigError("train: iteration counts must be >= 0");
  }
  if (config.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw ConfigError("train: learning rate must be finite and >= 0");
  }

  std::vector<const CsiSample*> rows;
  for (const auto& s : data.samples) {
    if (s.split == Split::train) rows.push_back(&s);
  }
  if (rows.empty()) throw ConfigError("train: dataset has no train-split samples");
  if (data.K != params.input_size()) {
    throw ConfigError("train: dataset has K=" + std::to_string(data.K) +
                      " but network input size is " + std::to_string(params.input_size()));
  }

  const auto N = static_cast<Eigen::Index>(rows.size());
  Matrix X(params.input_size(), N);
  std::vector<int> labels0(rows.size());
  for (Eigen::Index i = 0; i < N; ++i) {
    const CsiSample& s = *rows[i];
    if (s.location_id > params.output_size()) {
      throw ConfigError("train: sample label " + std::to_string(s.location_id) +
                        " exceeds network output size " +
                        std::to_string(params.output_size()));
    }
    X.col(i) = s.channels;
    labels0[i] = s.location_id - 1;
  }

  std::mt19937_64 rng(config.seed);
  if (config.pretrain_iters > 0) pretrain_layers(params, X, config, rng);

  TrainResult result;
  result.loss_history.reserve(config.backprop_iters);
  std::vector<int> order(rows.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.backprop_iters; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < N; start += config.batch_size) {
      Eigen::Index size = std::min<Eigen::Index>(config.batch_size, N - start);
      Matrix xb(X.rows(), size);
      std::vector<int> lb(static_cast<std::size_t>(size));
      for (Eigen::Index c = 0; c < size; ++c) {
        xb.col(c) = X.col(order[start + c]);
        lb[c] = labels0[order[start + c]];
      }
      Gradients g = backprop_batch(params, xb, lb);
      if (!std::isfinite(g.loss)) {
        throw NumericError("train: loss diverged (non-finite) at epoch " +
                           std::to_string(epoch + 1));
      }
      epoch_loss += g.loss * static_cast<double>(size);
      for (std::size_t l = 0; l < params.weights.size(); ++l) {
        params.weights[l] -= config.learning_rate * g.w[l];
        params.biases[l] -= config.learning_rate * g.b[l];
      }
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(N));
  }

  result.params = std::move(params);
  return result;
}

double gradient_check(const NetworkParams& params, const Vector& x, int label, double epsilon) {
  params.validate();
  check_input(params, x);
  if (epsilon <= 0.0) throw ConfigError("gradient_check: epsilon must be > 0");
  if (label < 1 || label > params.output_size()) {
    throw ConfigError("gradient_check: label out of range");
  }

  Matrix xb(x.size(), 1);
  xb.col(0) = x;
  Gradients analytic = backprop_batch(params, xb, {label - 1});

  NetworkParams probe = params;
  auto loss_at = [&]() {
    BatchTrace t = forward_batch(probe, xb);
    Vector z = t.z_out.col(0);
    return logsumexp(z) - z[label - 1];
  };

  double max_rel = 0.0;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    auto probe_entry = [&](double* slot, double grad) {
      double saved = *slot;
      *slot = saved + epsilon;
      double up = loss_at();
      *slot = saved - epsilon;
      double down = loss_at();
      *slot = saved;
      double fd = (up - down) / (2.0 * epsilon);
      double denom = std::max(std::abs(grad), std::abs(fd));
      if (denom > 1e-10) max_rel = std::max(max_rel, std::abs(grad - fd) / denom);
    };
    for (Eigen::Index r = 0; r < probe.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < probe.weights[l].cols(); ++c) {
        probe_entry(&probe.weights[l](r, c), analytic.w[l](r, c));
      }
    }
    for (Eigen::Index i = 0; i < probe.biases[l].size(); ++i) {
      probe_entry(&probe.biases[l][i], analytic.b[l][i]);
    }
  }
  return max_rel;
}

void save_model(const NetworkParams& params, const std::string& path,
                const std::optional<MinMaxScale>& input_scale) {
  params.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model file '" + path + "'");

  auto write_numbers = [&out](auto&& get, Eigen::Index count) {
    for (Eigen::Index i = 0; i < count; ++i) {
      if (i) out << ',';
      out << detail::fmt_g17(get(i));
    }
  };

  out << "{\n  \"format\": \"mlp-v1\",\n  \"dims\": [";
  for (std::size_t i = 0; i < params.dims.size(); ++i) {
    if (i) out << ',';
    out << params.dims[i];
  }
  out << "],\n  \"layers\": [\n";
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const Matrix& w = params.weights[l];
    out << "    {\"weights\": [";
    write_numbers([&](Eigen::Index i) { return w(i / w.cols(), i % w.cols()); },
                  w.size());
    out << "], \"bias\": [";
    write_numbers([&](Eigen::Index i) { return params.biases[l][i]; },
                  params.biases[l].size());
    out << "]}";
    if (l + 1 < params.weights.size()) out << ',';
    out << '\n';
  }
  out << "  ]";
  if (input_scale) {
    out << ",\n  \"input_scale\": {\"min\": [";
    write_numbers([&](Eigen::Index i) { return input_scale->lo[i]; }, input_scale->lo.size());
    out << "], \"max\": [";
    write_numbers([&](Eigen::Index i) { return input_scale->hi[i]; }, input_scale->hi.size());
    out << "]}";
  }
  out << "\n}\n";
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

NetworkParams load_model(const std::string& path, std::optional<MinMaxScale>* input_scale) {
  nlohmann::json doc = parse_json_file(path, "model file");
  try {
    if (!doc.is_object() || doc.value("format", "") != "mlp-v1") {
      throw ConfigError(path + ": schema mismatch, expected format \"mlp-v1\"");
    }
    NetworkParams p;
    p.dims = doc.at("dims").get<std::vector<int>>();
    if (p.dims.size() < 3) throw ConfigError(path + ": dims must have at least 3 entries");
    const auto& layers = doc.at("layers");
    if (!layers.is_array() || layers.size() != p.dims.size() - 1) {
      throw ConfigError(path + ": expected " + std::to_string(p.dims.size() - 1) +
                        " layer blocks");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto flat = layers[l].at("weights").get<std::vector<double>>();
      auto bias = layers[l].at("bias").get<std::vector<double>>();
      const int rows = p.dims[l + 1];
      const int cols = p.dims[l];
      if (static_cast<int>(flat.size()) != rows * cols ||
          static_cast<int>(bias.size()) != rows) {
        throw ConfigError(path + ": layer " + std::to_string(l + 1) + " shape mismatch");
      }
      Matrix w(rows, cols);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) w(r, c) = flat[static_cast<std::size_t>(r) * cols + c];
      }
      p.weights.push_back(std::move(w));
      p.biases.push_back(Eigen::Map<const Vector>(bias.data(), rows));
    }
    if (input_scale) {
      input_scale->reset();
      if (doc.contains("input_scale")) {
        auto lo = doc["input_scale"].at("min").get<std::vector<double>>();
        auto hi = doc["input_scale"].at("max").get<std::vector<double>>();
        if (lo.size() != hi.size() || static_cast<int>(lo.size()) != p.dims.front()) {
          throw ConfigError(path + ": input_scale length mismatch");
        }
        MinMaxScale s;
        s.lo = Eigen::Map<const Vector>(lo.data(), static_cast<Eigen::Index>(lo.size()));
        s.hi = Eigen::Map<const Vector>(hi.data(), static_cast<Eigen::Index>(hi.size()));
        *input_scale = std::move(s);
      }
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": schema mismatch (" + e.what() + ")");
  }
}

}  // namespace csix
