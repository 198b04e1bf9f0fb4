#include "csix/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "csix/errors.hpp"
#include "csix/threads.hpp"
#include "format.hpp"

namespace csix {

namespace {

constexpr double kProbFloor = 1e-12;

Matrix squared_distances(const Matrix& data) {
  const auto n = data.rows();
  Vector norms = data.rowwise().squaredNorm();
  Matrix d2 = (-2.0 * data * data.transpose()).rowwise() + norms.transpose();
  d2.colwise() += norms;
  d2.diagonal().setZero();
  return d2.cwiseMax(0.0);
}

// Perplexity-calibrated conditional Gaussians, symmetrized to joints.
Matrix calibrated_affinities(const Matrix& d2, double perplexity) {
  const auto n = d2.rows();
  const double target_entropy = std::log(perplexity);
  Matrix conditional = Matrix::Zero(n, n);

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    double beta = 1.0;
    double beta_min = -std::numeric_limits<double>::infinity();
    double beta_max = std::numeric_limits<double>::infinity();
    Vector p(n);
    bool converged = false;
    for (int step = 0; step < 100; ++step) {
      double sum = 0.0;
      double weighted = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        double v = j == i ? 0.0 : std::exp(-beta * d2(i, j));
        p[j] = v;
        sum += v;
        weighted += v * d2(i, j);
      }
      double entropy = sum > 0.0 ? std::log(sum) + beta * weighted / sum : 0.0;
      double diff = entropy - target_entropy;
      if (std::abs(diff) < 1e-5) {
        converged = true;
        break;
      }
      if (diff > 0.0) {
        beta_min = beta;
        beta = std::isinf(beta_max) ? beta * 2.0 : 0.5 * (beta + beta_max);
      } else {
        beta_max = beta;
        beta = std::isinf(beta_min) ? beta * 0.5 : 0.5 * (beta + beta_min);
      }
    }
    if (!converged) {
      throw NumericError("tsne: perplexity calibration failed for point " +
                         std::to_string(i + 1));
    }
    double sum = p.sum();
    conditional.row(i) = (p / sum).transpose();
  });

  Matrix joint = (conditional + conditional.transpose()) / (2.0 * static_cast<double>(n));
  return joint.cwiseMax(kProbFloor);
}

// The constant-bandwidth joint form: exp(-d^2) normalized over all pairs.
Matrix constant_bandwidth_affinities(const Matrix& d2) {
  const auto n = d2.rows();
  Matrix joint = (-d2).array().exp();
  joint.diagonal().setZero();
  double sum = joint.sum();
  if (sum <= 0.0) throw NumericError("tsne: constant-bandwidth affinities underflowed");
  joint /= sum;
  return joint.cwiseMax(kProbFloor);
}

double kl_divergence(const Matrix& p, const Matrix& points) {
  const auto n = points.rows();
  Matrix num(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    num(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d2 = (points.row(i) - points.row(j)).squaredNorm();
      num(i, j) = num(j, i) = 1.0 / (1.0 + d2);
    }
  }
  double z = num.sum();
  double kl = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      double q = std::max(num(i, j) / z, kProbFloor);
      kl += p(i, j) * std::log(p(i, j) / q);
    }
  }
  return kl;
}

}  // namespace

Matrix extract_last_hidden(const NetworkParams& params, const Dataset& dataset) {
  params.validate();
  dataset.validate();
  if (dataset.K != params.input_size()) {
    throw ConfigError("extract_last_hidden: dataset/network channel count mismatch");
  }
  const int width = params.dims[params.hidden_layers()];
  Matrix out(static_cast<Eigen::Index>(dataset.samples.size()), width);
  parallel_for(dataset.samples.size(), [&](std::size_t i) {
    ForwardTrace t = forward(params, dataset.samples[i].channels);
    out.row(static_cast<Eigen::Index>(i)) = t.a.back().transpose();
  });
  return out;
}

Embedding2D tsne(const Matrix& data, const TsneConfig& config) {
  const auto n = data.rows();
  if (n < 4) throw ConfigError("tsne: need at least 4 points");
  if (!(config.perplexity > 0.0) || config.perplexity >= static_cast<double>(n)) {
    throw ConfigError("tsne: perplexity must be in (0, N)");
  }
  if (config.iters < 1) throw ConfigError("tsne: iteration count must be >= 1");
  if (!data.allFinite()) throw ConfigError("tsne: non-finite input data");

  Matrix d2 = squared_distances(data);
  if (d2.maxCoeff() <= 0.0) {
    throw ConfigError("tsne: all pairwise distances are zero (duplicate-only data)");
  }

  Matrix p = config.paper_affinities ? constant_bandwidth_affinities(d2)
                                     : calibrated_affinities(d2, config.perplexity);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1e-4);
  Matrix points(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < 2; ++d) points(i, d) = gauss(rng);
  }

  Embedding2D result;
  result.initial_kl = kl_divergence(p, points);

  bool exaggerated = config.exaggeration_iters > 0 && config.early_exaggeration != 1.0;
  if (exaggerated) p *= config.early_exaggeration;

  Matrix velocity = Matrix::Zero(n, 2);
  Matrix gains = Matrix::Ones(n, 2);
  Matrix num(n, n);
  Matrix grad(n, 2);

  for (int iter = 0; iter < config.iters; ++iter) {
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
      const auto i = static_cast<Eigen::Index>(row);
      num(i, i) = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        num(i, j) = 1.0 / (1.0 + (points.row(i) - points.row(j)).squaredNorm());
      }
    });
    const double z = num.sum();

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
      const auto i = static_cast<Eigen::Index>(row);
      double gx = 0.0;
      double gy = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        double q = std::max(num(i, j) / z, kProbFloor);
        double mult = (p(i, j) - q) * num(i, j);
        gx += mult * (points(i, 0) - points(j, 0));
        gy += mult * (points(i, 1) - points(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    });

    double momentum = iter < config.momentum_switch_iter ? config.initial_momentum
                                                         : config.final_momentum;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index d = 0; d < 2; ++d) {
        bool same_sign = (grad(i, d) > 0.0) == (velocity(i, d) > 0.0);
        gains(i, d) = same_sign ? std::max(gains(i, d) * 0.8, 0.01) : gains(i, d) + 0.2;
        velocity(i, d) = momentum * velocity(i, d) -
                         config.learning_rate * gains(i, d) * grad(i, d);
        points(i, d) += velocity(i, d);
      }
    }
    points.rowwise() -= points.colwise().mean();

    if (exaggerated && iter + 1 == config.exaggeration_iters) {
      p /= config.early_exaggeration;
      exaggerated = false;
    }
  }
  if (exaggerated) p /= config.early_exaggeration;

  if (!points.allFinite()) throw NumericError("tsne: embedding diverged to non-finite values");
  result.points = std::move(points);
  result.final_kl = kl_divergence(p, result.points);
  return result;
}

Embedding2D tsne(const Matrix& data, double perplexity, int iters, std::uint64_t seed) {
  TsneConfig config;
  config.perplexity = perplexity;
  config.iters = iters;
  config.seed = seed;
  return tsne(data, config);
}

double silhouette(const Matrix& points, const std::vector<int>& labels) {
  const auto n = points.rows();
  if (n < 2 || static_cast<Eigen::Index>(labels.size()) != n) {
    throw ConfigError("silhouette: need >= 2 points with one label each");
  }

  std::map<int, int> cluster_sizes;
  for (int label : labels) cluster_sizes[label]++;
  if (cluster_sizes.size() < 2) {
    throw ConfigError("silhouette: need at least 2 clusters, got " +
                      std::to_string(cluster_sizes.size()));
  }

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (cluster_sizes[labels[i]] == 1) continue;  // singleton scores 0

    std::map<int, double> dist_sum;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      dist_sum[labels[j]] += (points.row(i) - points.row(j)).norm();
    }
    double d_intra = dist_sum[labels[i]] / (cluster_sizes[labels[i]] - 1);
    double d_nearest = std::numeric_limits<double>::infinity();
    for (const auto& [label, sum] : dist_sum) {
      if (label == labels[i]) continue;
      d_nearest = std::min(d_nearest, sum / cluster_sizes[label]);
    }
    double denom = std::max(d_intra, d_nearest);
    if (denom > 0.0) total += (d_nearest - d_intra) / denom;
  }
  return total / static_cast<double>(n);
}

double silhouette(const Embedding2D& embedding, Split subset) {
  if (embedding.labels.size() != static_cast<std::size_t>(embedding.points.rows()) ||
      embedding.splits.size() != embedding.labels.size()) {
    throw ConfigError("silhouette: embedding lacks per-point labels/splits");
  }
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < embedding.splits.size(); ++i) {
    if (embedding.splits[i] == subset) keep.push_back(static_cast<Eigen::Index>(i));
  }
  if (keep.empty()) {
    throw ConfigError("silhouette: no points in the " + to_string(subset) + " split");
  }
  Matrix pts(static_cast<Eigen::Index>(keep.size()), 2);
  std::vector<int> labels(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    pts.row(static_cast<Eigen::Index>(i)) = embedding.points.row(keep[i]);
    labels[i] = embedding.labels[keep[i]];
  }
  return silhouette(pts, labels);
}

std::string embedding_to_csv(const Embedding2D& embedding) {
  const auto n = embedding.points.rows();
  if (embedding.labels.size() != static_cast<std::size_t>(n) ||
      embedding.splits.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("embedding_to_csv: embedding lacks per-point labels/splits");
  }
  std::ostringstream out;
  out << "x,y,label,split\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    out << detail::fmt_g17(embedding.points(i, 0)) << ','
        << detail::fmt_g17(embedding.points(i, 1)) << ',' << embedding.labels[i] << ','
        << to_string(embedding.splits[i]) << '\n';
  }
  return out.str();
}

}  // namespace csix
