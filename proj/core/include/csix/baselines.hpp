#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csix/dataset.hpp"
#include "csix/types.hpp"

namespace csix {

/// k-nearest-neighbor vote on raw channels under Euclidean distance.
/// Distance ties keep sample order; vote ties go to the tied class that
/// owns the single nearest neighbor among the k.
int knn_predict(const Dataset& train, const Vector& x, int k);

/// One-against-all RBF-kernel SVM trained by SMO.
struct SvmModel {
  double gamma = 0.0;
  double C = 1.0;
  Matrix train_points;       ///< N x K
  std::vector<int> train_labels;
  Matrix coeffs;             ///< M x N, alpha_i * y_i per binary machine
  Vector bias;               ///< length M

  int classes() const { return static_cast<int>(coeffs.rows()); }
  /// Decision value of each one-against-all machine for x.
  Vector decision_values(const Vector& x) const;
};

/// Trains M binary machines to KKT tolerance 1e-3. gamma <= 0 selects
/// 1 / (K * var(train channels)); sample order fixes the result.
SvmModel svm_train(const Dataset& train, double gamma = 0.0, double C = 1.0);

int svm_predict(const SvmModel& model, const Vector& x);

/// Largest violation of the KKT conditions beyond the training tolerance,
/// over all machines and training points. Zero (to rounding) after a
/// successful training run.
double svm_kkt_excess(const SvmModel& model, double tol = 1e-3);

/// Row = true class, column = predicted class, both 1-based outside.
struct ConfusionMatrix {
  Eigen::MatrixXi counts;

  int classes() const { return static_cast<int>(counts.rows()); }
  int total() const { return counts.sum(); }
};

ConfusionMatrix confusion(const std::vector<int>& predictions,
                          const std::vector<int>& labels, int classes);

/// Per-class precision/recall with macro averages. A class never predicted
/// (empty column) has undefined precision; a class never present (empty
/// row) has undefined recall. Undefined entries are excluded from the
/// macro means. F1 is the harmonic mean of the macro averages.
struct ClassMetrics {
  std::vector<std::optional<double>> precision;
  std::vector<std::optional<double>> recall;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double f1 = 0.0;
};

ClassMetrics precision_recall(const ConfusionMatrix& cm);

/// One evaluated scheme for the report: name, confusion matrix and the
/// derived metrics, including percentages rounded for display.
struct SchemeEvaluation {
  std::string name;
  ConfusionMatrix cm;
};

/// JSON report mirroring the per-class precision/recall table layout:
/// exact fractions plus rounded percent values per scheme.
std::string evaluation_report_json(const std::vector<SchemeEvaluation>& schemes);

}  // namespace csix
