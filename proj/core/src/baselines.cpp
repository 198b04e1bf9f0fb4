#include "csix/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "csix/errors.hpp"
#include "format.hpp"

namespace csix {

namespace {

constexpr double kSmoTol = 1e-3;
constexpr double kAlphaEps = 1e-12;
constexpr int kMaxSweeps = 10000;

double rbf(const Vector& u, const Vector& v, double gamma) {
  return std::exp(-gamma * (u - v).squaredNorm());
}

// Simplified SMO for one binary machine over a shared kernel matrix.
// Returns alpha (>= 0) and bias; y entries are +1/-1.
struct SmoResult {
  Vector alpha;
  double bias = 0.0;
};

SmoResult smo_train(const Matrix& kernel, const std::vector<double>& y, double C,
                    const std::string& machine_name) {
  const auto n = kernel.rows();
  SmoResult r;
  r.alpha = Vector::Zero(n);
  Vector errors(n);
  for (Eigen::Index i = 0; i < n; ++i) errors[i] = -y[i];  // f == 0 initially

  int sweeps = 0;
  int clean_passes = 0;
  while (clean_passes < 1) {
    if (++sweeps > kMaxSweeps) {
      throw NumericError("svm_train: SMO did not converge for machine " + machine_name +
                         " after " + std::to_string(kMaxSweeps) + " sweeps");
    }
    int changed = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double ri = errors[i] * y[i];
      bool violates = (ri < -kSmoTol && r.alpha[i] < C) || (ri > kSmoTol && r.alpha[i] > 0.0);
      if (!violates) continue;

      // Second index: largest |E_i - E_j|, smallest j on ties.
      Eigen::Index j = -1;
      double best = -1.0;
      for (Eigen::Index cand = 0; cand < n; ++cand) {
        if (cand == i) continue;
        double gap = std::abs(errors[i] - errors[cand]);
        if (gap > best) {
          best = gap;
          j = cand;
        }
      }
      if (j < 0) continue;

      double eta = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
      if (eta <= 0.0) continue;

      double lo;
      double hi;
      if (y[i] != y[j]) {
        lo = std::max(0.0, r.alpha[j] - r.alpha[i]);
        hi = std::min(C, C + r.alpha[j] - r.alpha[i]);
      } else {
        lo = std::max(0.0, r.alpha[i] + r.alpha[j] - C);
        hi = std::min(C, r.alpha[i] + r.alpha[j]);
      }
      if (lo >= hi) continue;

      double alpha_j_old = r.alpha[j];
      double alpha_i_old = r.alpha[i];
      double alpha_j = std::clamp(alpha_j_old + y[j] * (errors[i] - errors[j]) / eta, lo, hi);
      if (std::abs(alpha_j - alpha_j_old) < kAlphaEps) continue;
      double alpha_i = alpha_i_old + y[i] * y[j] * (alpha_j_old - alpha_j);

      double di = y[i] * (alpha_i - alpha_i_old);
      double dj = y[j] * (alpha_j - alpha_j_old);
      double b1 = r.bias - errors[i] - di * kernel(i, i) - dj * kernel(i, j);
      double b2 = r.bias - errors[j] - di * kernel(i, j) - dj * kernel(j, j);
      double new_bias;
      if (alpha_i > 0.0 && alpha_i < C) {
        new_bias = b1;
      } else if (alpha_j > 0.0 && alpha_j < C) {
        new_bias = b2;
      } else {
        new_bias = 0.5 * (b1 + b2);
      }
      double db = new_bias - r.bias;

      r.alpha[i] = alpha_i;
      r.alpha[j] = alpha_j;
      r.bias = new_bias;
      errors += di * kernel.col(i) + dj * kernel.col(j);
      errors.array() += db;
      ++changed;
    }
    clean_passes = changed == 0 ? clean_passes + 1 : 0;
  }
  return r;
}

}  // namespace

int knn_predict(const Dataset& train, const Vector& x, int k) {
  train.validate();
  const auto n = static_cast<int>(train.samples.size());
  if (n == 0) throw ConfigError("knn_predict: empty training set");
  if (k < 1 || k > n) {
    throw ConfigError("knn_predict: k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(n) + "]");
  }
  if (x.size() != train.K) throw ConfigError("knn_predict: query length mismatch");

  std::vector<std::pair<double, int>> ranked(n);
  for (int i = 0; i < n; ++i) {
    ranked[i] = {(train.samples[i].channels - x).squaredNorm(), i};
  }
  std::sort(ranked.begin(), ranked.end());

  std::vector<int> votes(train.M + 1, 0);
  for (int r = 0; r < k; ++r) votes[train.samples[ranked[r].second].location_id]++;

  int best_votes = *std::max_element(votes.begin(), votes.end());
  // Tie rule: among max-vote classes, the one owning the nearest neighbor.
  for (int r = 0; r < k; ++r) {
    int cls = train.samples[ranked[r].second].location_id;
    if (votes[cls] == best_votes) return cls;
  }
  return 0;  // unreachable
}

Vector SvmModel::decision_values(const Vector& x) const {
  const auto n = train_points.rows();
  Vector k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k[i] = rbf(train_points.row(i).transpose(), x, gamma);
  }
  return coeffs * k + bias;
}

SvmModel svm_train(const Dataset& train, double gamma, double C) {
  train.validate();
  if (train.M < 2) throw ConfigError("svm_train: need at least 2 classes");
  if (train.samples.empty()) throw ConfigError("svm_train: empty training set");
  if (!(C > 0.0)) throw ConfigError("svm_train: C must be > 0");

  SvmModel model;
  model.C = C;
  model.train_points = train.channel_matrix();
  model.train_labels = train.labels();

  if (gamma <= 0.0) {
    Eigen::Map<const Vector> flat(model.train_points.data(), model.train_points.size());
    double var = (flat.array() - flat.mean()).square().mean();
    gamma = 1.0 / (train.K * std::max(var, 1e-12));
  }
  model.gamma = gamma;

  const auto n = model.train_points.rows();
  Matrix kernel(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kernel(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      kernel(i, j) = kernel(j, i) = rbf(model.train_points.row(i).transpose(),
                                        model.train_points.row(j).transpose(), gamma);
    }
  }

  model.coeffs = Matrix::Zero(train.M, n);
  model.bias = Vector::Zero(train.M);
  for (int cls = 1; cls <= train.M; ++cls) {
    std::vector<double> y(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = model.train_labels[i] == cls ? 1.0 : -1.0;
    }
    SmoResult r = smo_train(kernel, y, C, "p" + std::to_string(cls));
    for (Eigen::Index i = 0; i < n; ++i) {
      model.coeffs(cls - 1, i) = r.alpha[i] * y[static_cast<std::size_t>(i)];
    }
    model.bias[cls - 1] = r.bias;
  }
  return model;
}

int svm_predict(const SvmModel& model, const Vector& x) {
  Vector values = model.decision_values(x);
  int best = 0;
  for (int i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best + 1;
}

double svm_kkt_excess(const SvmModel& model, double tol) {
  const auto n = model.train_points.rows();
  Matrix kernel(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kernel(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      kernel(i, j) = kernel(j, i) = rbf(model.train_points.row(i).transpose(),
                                        model.train_points.row(j).transpose(), model.gamma);
    }
  }
  double worst = 0.0;
  for (int cls = 0; cls < model.classes(); ++cls) {
    Vector f = kernel * model.coeffs.row(cls).transpose();
    f.array() += model.bias[cls];
    for (Eigen::Index i = 0; i < n; ++i) {
      double y = model.train_labels[i] == cls + 1 ? 1.0 : -1.0;
      double alpha = std::abs(model.coeffs(cls, i));
      double margin = y * f[i];
      if (alpha < kAlphaEps) {
        worst = std::max(worst, (1.0 - tol) - margin);
      } else if (alpha > model.C - kAlphaEps) {
        worst = std::max(worst, margin - (1.0 + tol));
      } else {
        worst = std::max(worst, std::abs(margin - 1.0) - tol);
      }
    }
  }
  return std::max(0.0, worst);
}

ConfusionMatrix confusion(const std::vector<int>& predictions,
                          const std::vector<int>& labels, int classes) {
  if (predictions.size() != labels.size()) {
    throw ConfigError("confusion: prediction/label count mismatch");
  }
  if (classes < 1) throw ConfigError("confusion: class count must be >= 1");
  ConfusionMatrix cm;
  cm.counts = Eigen::MatrixXi::Zero(classes, classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > classes) {
      throw ConfigError("confusion: label " + std::to_string(labels[i]) + " at sample " +
                        std::to_string(i + 1) + " outside [1, " + std::to_string(classes) + "]");
    }
    if (predictions[i] < 1 || predictions[i] > classes) {
      throw ConfigError("confusion: prediction " + std::to_string(predictions[i]) +
                        " at sample " + std::to_string(i + 1) + " outside [1, " +
                        std::to_string(classes) + "]");
    }
    cm.counts(labels[i] - 1, predictions[i] - 1)++;
  }
  return cm;
}

ClassMetrics precision_recall(const ConfusionMatrix& cm) {
  const int classes = cm.classes();
  if (classes < 1 || cm.counts.rows() != cm.counts.cols()) {
    throw ConfigError("precision_recall: malformed confusion matrix");
  }
  if (cm.total() == 0) throw ConfigError("precision_recall: confusion matrix is all zero");

  ClassMetrics metrics;
  metrics.precision.resize(classes);
  metrics.recall.resize(classes);
  double precision_sum = 0.0;
  int precision_count = 0;
  double recall_sum = 0.0;
  int recall_count = 0;
  for (int c = 0; c < classes; ++c) {
    int col = cm.counts.col(c).sum();
    int row = cm.counts.row(c).sum();
    if (col > 0) {
      metrics.precision[c] = static_cast<double>(cm.counts(c, c)) / col;
      precision_sum += *metrics.precision[c];
      precision_count++;
    }
    if (row > 0) {
      metrics.recall[c] = static_cast<double>(cm.counts(c, c)) / row;
      recall_sum += *metrics.recall[c];
      recall_count++;
    }
  }
  metrics.macro_precision = precision_count > 0 ? precision_sum / precision_count : 0.0;
  metrics.macro_recall = recall_count > 0 ? recall_sum / recall_count : 0.0;
  double pr = metrics.macro_precision + metrics.macro_recall;
  metrics.f1 = pr > 0.0 ? 2.0 * metrics.macro_precision * metrics.macro_recall / pr : 0.0;
  return metrics;
}

std::string evaluation_report_json(const std::vector<SchemeEvaluation>& schemes) {
  std::ostringstream out;
  out << "{\"schemes\":[";
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    const auto& scheme = schemes[s];
    ClassMetrics m = precision_recall(scheme.cm);
    if (s) out << ',';
    out << "{\"name\":\"" << scheme.name << "\",\"confusion\":[";
    for (int r = 0; r < scheme.cm.classes(); ++r) {
      if (r) out << ',';
      out << '[';
      for (int c = 0; c < scheme.cm.classes(); ++c) {
        if (c) out << ',';
        out << scheme.cm.counts(r, c);
      }
      out << ']';
    }
    out << ']';

    auto write_optional_list = [&out](const char* key,
                                      const std::vector<std::optional<double>>& values,
                                      bool percent) {
      out << ",\"" << key << "\":[";
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ',';
        if (values[i]) {
          if (percent) {
            out << std::llround(*values[i] * 100.0);
          } else {
            out << detail::fmt_g17(*values[i]);
          }
        } else {
          out << "null";
        }
      }
      out << ']';
    };
    write_optional_list("precision", m.precision, false);
    write_optional_list("recall", m.recall, false);
    write_optional_list("precision_percent", m.precision, true);
    write_optional_list("recall_percent", m.recall, true);
    out << ",\"macro_precision\":" << detail::fmt_g17(m.macro_precision)
        << ",\"macro_recall\":" << detail::fmt_g17(m.macro_recall)
        << ",\"f1\":" << detail::fmt_g17(m.f1)
        << ",\"macro_precision_percent\":" << detail::fmt_fixed(m.macro_precision * 100.0, 2)
        << ",\"macro_recall_percent\":" << detail::fmt_fixed(m.macro_recall * 100.0, 2)
        << '}';
  }
  out << "]}";
  return out.str();
}

}  // namespace csix
