#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csix/types.hpp"

namespace csix {

enum class Split { train, test };

std::string to_string(Split split);
Split split_from_string(const std::string& text);

/// One K-dimensional CSI amplitude fingerprint. Amplitudes are linear-scale,
/// non-negative and finite; location ids are 1-based.
struct CsiSample {
  Vector channels;
  int location_id = 1;
  int session_id = 0;
  Split split = Split::train;
};

/// A set of CSI samples plus the channel layout: K channels = S subcarriers
/// per antenna pair times A antenna pairs. Channel c (1-based) carries
/// subcarrier ((c-1) mod S)+1 of antenna pair (c-1)/S. Immutable after
/// construction by convention; safe for concurrent reads.
struct Dataset {
  std::vector<CsiSample> samples;
  int K = 120;
  int S = 30;
  int A = 4;
  int M = 0;
  std::vector<std::string> location_names;

  /// Throws ConfigError when a structural invariant is broken.
  void validate() const;

  std::vector<int> labels() const;
  /// Row-major N x K matrix of all sample channels.
  Matrix channel_matrix() const;
};

/// Lower bound applied to every per-channel standard deviation so the
/// modification ratio sigma_m / sigma_n stays finite.
inline constexpr double kStdFloor = 1e-8;

/// Per-class, per-channel moments of the training split (population
/// denominator N; std floored at kStdFloor).
struct ClassStats {
  Matrix mean;  // M x K
  Matrix std;   // M x K
};

/// Reads the CSV schema `location,session,split,c001,...`. Channel count is
/// taken from the header; when `subcarriers` is not given, S defaults to 30
/// when it divides K and to K (single antenna pair) otherwise.
Dataset load_csv(const std::string& path, std::optional<int> subcarriers = std::nullopt);

/// Writes the CSV schema above with 17-significant-digit amplitudes, so a
/// save/load round-trip is the identity (byte-wise for files produced here).
void save_csv(const Dataset& dataset, const std::string& path);

/// Moments over the train-split samples of `train`; every class needs at
/// least two such samples.
ClassStats class_stats(const Dataset& train);

/// Pearson correlation between adjacent subcarrier columns (i, i+1) inside
/// each antenna-pair block, averaged over the A blocks. Pairs touching a
/// zero-variance column are reported as nullopt rather than 0.
std::vector<std::optional<double>> adjacent_subcarrier_correlation(const Dataset& dataset);

/// Per-channel min-max ranges, fitted on one dataset (normally train).
/// Off by default everywhere; the DNN trains on raw amplitudes.
struct MinMaxScale {
  Vector lo;
  Vector hi;

  /// (x - lo) / (hi - lo) per channel, clamped at 0; degenerate channels
  /// (hi == lo) map to 0.
  Vector apply(const Vector& x) const;
};

MinMaxScale fit_minmax(const Dataset& train);
Dataset apply_scale(const Dataset& dataset, const MinMaxScale& scale);

}  // namespace csix
