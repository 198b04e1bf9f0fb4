#include "csix/manipulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "csix/errors.hpp"
#include "csix/threads.hpp"
#include "format.hpp"

namespace csix {

namespace {

void check_stats_class(const ClassStats& stats, int id, const char* name) {
  if (id < 1 || id > stats.mean.rows()) {
    throw ConfigError(std::string("g_mod: ") + name + "=" + std::to_string(id) +
                      " has no class statistics");
  }
}

}  // namespace

OrderingKind ordering_kind_from_string(const std::string& text) {
  if (text == "O1" || text == "o1") return OrderingKind::O1;
  if (text == "O2" || text == "o2") return OrderingKind::O2;
  if (text == "O3" || text == "o3") return OrderingKind::O3;
  if (text == "O4" || text == "o4") return OrderingKind::O4;
  throw ConfigError("unknown ordering kind '" + text + "' (expected O1..O4)");
}

std::string to_string(OrderingKind kind) {
  switch (kind) {
    case OrderingKind::O1: return "O1";
    case OrderingKind::O2: return "O2";
    case OrderingKind::O3: return "O3";
    default: return "O4";
  }
}

ManipulationMode manipulation_mode_from_string(const std::string& text) {
  if (text == "nullify") return ManipulationMode::nullify;
  if (text == "modify") return ManipulationMode::modify;
  throw ConfigError("unknown mode '" + text + "' (expected nullify or modify)");
}

std::string to_string(ManipulationMode mode) {
  return mode == ManipulationMode::nullify ? "nullify" : "modify";
}

Granularity granularity_from_string(const std::string& text) {
  if (text == "channel") return Granularity::channel;
  if (text == "subcarrier") return Granularity::subcarrier;
  throw ConfigError("unknown granularity '" + text + "' (expected channel or subcarrier)");
}

std::string to_string(Granularity granularity) {
  return granularity == Granularity::channel ? "channel" : "subcarrier";
}

OrderingSequence ordering(const Vector& scores, OrderingKind kind) {
  if (!scores.allFinite()) throw ConfigError("ordering: scores must be finite");
  OrderingSequence seq;
  seq.kind = kind;
  seq.order.resize(static_cast<std::size_t>(scores.size()));
  std::iota(seq.order.begin(), seq.order.end(), 1);

  auto key = [&](int id) {
    double v = scores[id - 1];
    switch (kind) {
      case OrderingKind::O1: return -v;
      case OrderingKind::O2: return v;
      case OrderingKind::O3: return -std::abs(v);
      default: return std::abs(v);
    }
  };
  std::stable_sort(seq.order.begin(), seq.order.end(),
                   [&](int lhs, int rhs) { return key(lhs) < key(rhs); });
  return seq;
}

Vector g_null(const Vector& x, int r) {
  if (r < 1 || r > x.size()) {
    throw ConfigError("g_null: channel " + std::to_string(r) + " outside [1, " +
                      std::to_string(x.size()) + "]");
  }
  Vector out = x;
  out[r - 1] = 0.0;
  return out;
}

Vector g_mod(const Vector& x, int r, const ClassStats& stats, int n, int m, double h_prime_r) {
  if (r < 1 || r > x.size() || r > stats.mean.cols()) {
    throw ConfigError("g_mod: channel " + std::to_string(r) + " out of range");
  }
  check_stats_class(stats, n, "n");
  check_stats_class(stats, m, "m");

  const int c = r - 1;
  double ratio = stats.std(m - 1, c) / stats.std(n - 1, c);
  double shifted = stats.mean(m - 1, c) + h_prime_r * ratio * (x[c] - stats.mean(n - 1, c));
  Vector out = x;
  out[c] = std::max(0.0, shifted);
  return out;
}

ExperimentCurve progressive_curve(const NetworkParams& params, const Dataset& test,
                                  int n, int m, OrderingKind kind, ManipulationMode mode,
                                  const ClassStats* stats, Granularity granularity) {
  params.validate();
  test.validate();
  if (mode == ManipulationMode::modify && stats == nullptr) {
    throw ConfigError("progressive_curve: modify mode needs class statistics");
  }
  if (test.K != params.input_size()) {
    throw ConfigError("progressive_curve: dataset/network channel count mismatch");
  }

  std::vector<const CsiSample*> subset;
  for (const auto& s : test.samples) {
    if (s.location_id == n) subset.push_back(&s);
  }
  if (subset.empty()) {
    throw ConfigError("progressive_curve: no test samples for location p" + std::to_string(n));
  }

  const int steps = granularity == Granularity::channel ? test.K : test.S;
  std::vector<std::vector<int>> predictions(subset.size());

  parallel_for(subset.size(), [&](std::size_t idx) {
    const Vector& x0 = subset[idx]->channels;
    RelevanceMap map = explain(params, x0, n, m);

    OrderingSequence seq;
    if (granularity == Granularity::channel) {
      seq = ordering(map.h_prime, kind);
    } else {
      seq = ordering(subcarrier_scores(map.h_prime, test.S, test.A, n, m).s_prime, kind);
    }

    std::vector<int>& preds = predictions[idx];
    preds.reserve(steps + 1);
    Vector x = x0;
    preds.push_back(predict(params, x));
    for (int t = 1; t <= steps; ++t) {
      int id = seq.order[t - 1];
      if (granularity == Granularity::channel) {
        x = mode == ManipulationMode::nullify
                ? g_null(x, id)
                : g_mod(x, id, *stats, n, m, map.h_prime[id - 1]);
      } else {
        // One subcarrier step touches the same tone on every antenna pair;
        // in modify mode each constituent channel keeps its own h' value.
        for (int a = 0; a < test.A; ++a) {
          int channel = id + a * test.S;
          x = mode == ManipulationMode::nullify
                  ? g_null(x, channel)
                  : g_mod(x, channel, *stats, n, m, map.h_prime[channel - 1]);
        }
      }
      preds.push_back(predict(params, x));
    }
  });

  ExperimentCurve curve;
  curve.mode = mode;
  curve.kind = kind;
  curve.granularity = granularity;
  curve.input_class = n;
  curve.target_class = m;
  curve.points.reserve(steps + 1);
  const double total = static_cast<double>(subset.size());
  for (int t = 0; t <= steps; ++t) {
    int hits_true = 0;
    int hits_target = 0;
    for (const auto& preds : predictions) {
      hits_true += preds[t] == n;
      hits_target += preds[t] == m;
    }
    curve.points.push_back({t, hits_true / total, hits_target / total});
  }
  return curve;
}

std::string curve_to_csv(const ExperimentCurve& curve) {
  std::ostringstream out;
  out << "t,frac_true,frac_target\n";
  for (const auto& p : curve.points) {
    out << p.t << ',' << detail::fmt_g17(p.frac_true) << ','
        << detail::fmt_g17(p.frac_target) << '\n';
  }
  return out.str();
}

double curve_auc(const ExperimentCurve& curve) {
  double auc = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    auc += 0.5 * (curve.points[i - 1].frac_true + curve.points[i].frac_true);
  }
  return auc;
}

}  // namespace csix
