#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "csix/dataset.hpp"

namespace csix {

/// Synthetic multipath CSI generation. Defaults give the desk-scale
/// eight-location layout used throughout the tests: 100 train / 50 test
/// samples per location, 30 subcarriers times 4 antenna pairs.
struct SynthConfig {
  int M = 8;
  int S = 30;
  int A = 4;
  int paths_per_location = 6;
  int train_per_loc = 100;
  int test_per_loc = 50;
  int sessions_train = 8;
  int sessions_test = 2;
  double session_drift_sigma = 0.08;
  double noise_sigma = 1.0;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Parses a SynthConfig from JSON. Missing keys keep their defaults;
/// unknown keys are rejected.
SynthConfig synth_config_from_json(const std::string& text);
SynthConfig synth_config_from_json_file(const std::string& path);

/// Deterministic function of the config. Per location and antenna pair a
/// fixed set of multipath components (complex gain, delay) defines the base
/// subcarrier response; every session applies a log-normal amplitude drift,
/// every sample adds Gaussian noise, and amplitudes are clamped at 0.
/// Train and test use disjoint session ids.
std::pair<Dataset, Dataset> generate_synthetic(const SynthConfig& config);

}  // namespace csix
