#include "csix/synth.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "csix/errors.hpp"

namespace csix {

namespace {

// Intel 5300 reports 30 grouped subcarriers: 312.5 kHz spacing times 4.
constexpr double kSubcarrierSpacingHz = 1.25e6;
// Per-path delay window grows with the path count, so richer multipath
// (lounge-like configs) is also more frequency-selective.
constexpr double kDelayUnitSeconds = 60e-9;
constexpr double kPathGain = 5.0;

nlohmann::json parse_json(const std::string& text, const std::string& origin) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(origin + ": invalid JSON");
  if (!doc.is_object()) throw ConfigError(origin + ": expected a JSON object");
  return doc;
}

}  // namespace

void SynthConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string("synth config: ") + name + " must be >= 1");
  };
  positive(M, "M");
  positive(S, "S");
  positive(A, "A");
  positive(paths_per_location, "paths_per_location");
  positive(train_per_loc, "train_per_loc");
  positive(test_per_loc, "test_per_loc");
  positive(sessions_train, "sessions_train");
  positive(sessions_test, "sessions_test");
  if (session_drift_sigma < 0.0 || !std::isfinite(session_drift_sigma)) {
    throw ConfigError("synth config: session_drift_sigma must be >= 0");
  }
  if (noise_sigma < 0.0 || !std::isfinite(noise_sigma)) {
    throw ConfigError("synth config: noise_sigma must be >= 0");
  }
}

SynthConfig synth_config_from_json(const std::string& text) {
  nlohmann::json doc = parse_json(text, "synth config");
  SynthConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "M") cfg.M = value.get<int>();
      else if (key == "S") cfg.S = value.get<int>();
      else if (key == "A") cfg.A = value.get<int>();
      else if (key == "paths_per_location") cfg.paths_per_location = value.get<int>();
      else if (key == "train_per_loc") cfg.train_per_loc = value.get<int>();
      else if (key == "test_per_loc") cfg.test_per_loc = value.get<int>();
      else if (key == "sessions_train") cfg.sessions_train = value.get<int>();
      else if (key == "sessions_test") cfg.sessions_test = value.get<int>();
      else if (key == "session_drift_sigma") cfg.session_drift_sigma = value.get<double>();
      else if (key == "noise_sigma") cfg.noise_sigma = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else throw ConfigError("synth config: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("synth config: bad value for key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

SynthConfig synth_config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return synth_config_from_json(buf.str());
}

std::pair<Dataset, Dataset> generate_synthetic(const SynthConfig& config) {
  config.validate();
  const int K = config.S * config.A;
  const int sessions_total = config.sessions_train + config.sessions_test;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Base response per (location, antenna pair): magnitude of the summed
  // path phasors on each subcarrier frequency.
  const double delay_window = kDelayUnitSeconds * config.paths_per_location;
  std::vector<Matrix> base(config.M, Matrix::Zero(config.A, config.S));
  for (int m = 0; m < config.M; ++m) {
    for (int a = 0; a < config.A; ++a) {
      std::vector<std::complex<double>> gains(config.paths_per_location);
      std::vector<double> delays(config.paths_per_location);
      for (int p = 0; p < config.paths_per_location; ++p) {
        double amplitude = kPathGain * (0.5 + uniform(rng));
        double phase = 2.0 * std::numbers::pi * uniform(rng);
        gains[p] = std::polar(amplitude, phase);
        delays[p] = delay_window * uniform(rng);
      }
      for (int s = 0; s < config.S; ++s) {
        double freq = (s + 1) * kSubcarrierSpacingHz;
        std::complex<double> h = 0.0;
        for (int p = 0; p < config.paths_per_location; ++p) {
          h += gains[p] * std::polar(1.0, -2.0 * std::numbers::pi * freq * delays[p]);
        }
        base[m](a, s) = std::abs(h);
      }
    }
  }

  // One multiplicative log-normal drift factor per (location, session).
  std::vector<std::vector<double>> drift(config.M, std::vector<double>(sessions_total, 1.0));
  for (int m = 0; m < config.M; ++m) {
    for (int s = 0; s < sessions_total; ++s) {
      if (config.session_drift_sigma > 0.0) {
        drift[m][s] = std::exp(config.session_drift_sigma * gauss(rng));
      }
    }
  }

  auto make_dataset = [&](Split split) {
    Dataset d;
    d.K = K;
    d.S = config.S;
    d.A = config.A;
    d.M = config.M;
    for (int m = 1; m <= config.M; ++m) d.location_names.push_back("p" + std::to_string(m));
    d.samples.reserve(static_cast<std::size_t>(config.M) *
                      (split == Split::train ? config.train_per_loc : config.test_per_loc));
    return d;
  };

  auto emit = [&](Dataset& d, Split split, int per_loc, int session_base, int session_count) {
    for (int m = 0; m < config.M; ++m) {
      for (int i = 0; i < per_loc; ++i) {
        CsiSample sample;
        sample.location_id = m + 1;
        sample.session_id = session_base + (i % session_count);
        sample.split = split;
        sample.channels.resize(K);
        double factor = drift[m][sample.session_id];
        for (int a = 0; a < config.A; ++a) {
          for (int s = 0; s < config.S; ++s) {
            double v = base[m](a, s) * factor;
            if (config.noise_sigma > 0.0) v += config.noise_sigma * gauss(rng);
            sample.channels[a * config.S + s] = std::max(0.0, v);
          }
        }
        d.samples.push_back(std::move(sample));
      }
    }
  };

  Dataset train = make_dataset(Split::train);
  Dataset test = make_dataset(Split::test);
  emit(train, Split::train, config.train_per_loc, 0, config.sessions_train);
  emit(test, Split::test, config.test_per_loc, config.sessions_train, config.sessions_test);
  train.validate();
  test.validate();
  return {std::move(train), std::move(test)};
}

}  // namespace csix
