#pragma once

#include <string>
#include <vector>

#include "csix/dataset.hpp"
#include "csix/lrp.hpp"
#include "csix/mlp.hpp"
#include "csix/types.hpp"

namespace csix {

/// Channel/subcarrier orderings by relevance score: O1 descending,
/// O2 ascending, O3 descending absolute, O4 ascending absolute.
enum class OrderingKind { O1, O2, O3, O4 };
enum class ManipulationMode { nullify, modify };
enum class Granularity { channel, subcarrier };

OrderingKind ordering_kind_from_string(const std::string& text);
std::string to_string(OrderingKind kind);
ManipulationMode manipulation_mode_from_string(const std::string& text);
std::string to_string(ManipulationMode mode);
Granularity granularity_from_string(const std::string& text);
std::string to_string(Granularity granularity);

/// A permutation r_1..r_K of 1-based channel (or subcarrier) ids whose
/// score sequence follows the kind's monotonicity; equal scores keep
/// ascending id order.
struct OrderingSequence {
  std::vector<int> order;
  OrderingKind kind = OrderingKind::O1;
  int input_class = 0;
  int target_class = 0;
  Granularity granularity = Granularity::channel;
};

OrderingSequence ordering(const Vector& scores, OrderingKind kind);

/// Returns x with the r-th element (1-based) set to zero.
Vector g_null(const Vector& x, int r);

/// Shifts the r-th element toward class m along the LMMSE line
/// mean_m + h' * (std_m / std_n) * (x_r - mean_n), clamped at zero.
Vector g_mod(const Vector& x, int r, const ClassStats& stats, int n, int m, double h_prime_r);

struct CurvePoint {
  int t = 0;
  double frac_true = 0.0;    ///< fraction of class-n samples still classified n
  double frac_target = 0.0;  ///< fraction classified as the target class m
};

/// Classification fractions of the class-n test samples after t cumulative
/// manipulation steps, t = 0..K (or 0..S at subcarrier granularity).
struct ExperimentCurve {
  ManipulationMode mode = ManipulationMode::nullify;
  OrderingKind kind = OrderingKind::O1;
  Granularity granularity = Granularity::channel;
  int input_class = 0;
  int target_class = 0;
  std::vector<CurvePoint> points;
};

/// Runs the manipulation experiment for the (n -> m) pair. Every class-n
/// sample uses its own relevance ordering, fixed once, and is manipulated
/// cumulatively; the prediction is recorded after each step. `stats` is
/// required for modify mode and should come from the training split.
ExperimentCurve progressive_curve(const NetworkParams& params, const Dataset& test,
                                  int n, int m, OrderingKind kind, ManipulationMode mode,
                                  const ClassStats* stats, Granularity granularity);

/// CSV export: header `t,frac_true,frac_target`, one row per step.
std::string curve_to_csv(const ExperimentCurve& curve);

/// Trapezoidal area under the frac_true series, for curve comparisons.
double curve_auc(const ExperimentCurve& curve);

}  // namespace csix
