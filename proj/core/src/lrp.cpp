#include "csix/lrp.hpp"

#include <cmath>
#include <sstream>

#include "csix/errors.hpp"
#include "format.hpp"

namespace csix {

namespace {

inline double stabilized(double denom) {
  return denom + (denom >= 0.0 ? kLrpEpsilon : -kLrpEpsilon);
}

void check_class(const NetworkParams& params, int m, const char* name) {
  if (m < 1 || m > params.output_size()) {
    throw ConfigError(std::string("lrp: ") + name + "=" + std::to_string(m) +
                      " outside [1, " + std::to_string(params.output_size()) + "]");
  }
}

void append_numbers(std::ostringstream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out << ',';
    out << detail::fmt_g17(v[i]);
  }
}

}  // namespace

Vector relevance_last_hidden(const ForwardTrace& trace, const NetworkParams& params, int m) {
  check_class(params, m, "m");
  const int L = params.hidden_layers();
  const Vector& a = trace.a.back();
  if (a.size() != params.dims[L]) throw ConfigError("lrp: trace does not match network");

  const Matrix& w = params.weights[L];
  double z_m = trace.z.back()[m - 1];
  double denom = a.dot(w.row(m - 1)) + params.biases[L][m - 1];
  return a.cwiseProduct(w.row(m - 1).transpose()) * (z_m / stabilized(denom));
}

Vector relevance_backward(const ForwardTrace& trace, const NetworkParams& params,
                          const Vector& relevance, int layer) {
  const int L = params.hidden_layers();
  if (layer < 2 || layer > L) {
    throw ConfigError("lrp: layer " + std::to_string(layer) + " outside [2, " +
                      std::to_string(L) + "]");
  }
  const Vector& a_prev = trace.a[layer - 2];
  const Matrix& w = params.weights[layer - 1];
  if (relevance.size() != w.rows() || a_prev.size() != w.cols()) {
    throw ConfigError("lrp: relevance/trace shape mismatch at layer " + std::to_string(layer));
  }

  Vector denom = w * a_prev + params.biases[layer - 1];
  Vector weighted = relevance.binaryExpr(denom, [](double r, double d) {
    return r / stabilized(d);
  });
  return a_prev.cwiseProduct(w.transpose() * weighted);
}

Vector relevance_input(const ForwardTrace& trace, const NetworkParams& params,
                       const Vector& relevance) {
  const Matrix& w = params.weights[0];
  if (relevance.size() != w.rows() || trace.x.size() != w.cols()) {
    throw ConfigError("lrp: relevance/trace shape mismatch at the input layer");
  }
  Vector denom = w * trace.x + params.biases[0];
  Vector weighted = relevance.binaryExpr(denom, [](double r, double d) {
    return r / stabilized(d);
  });
  return trace.x.cwiseProduct(w.transpose() * weighted);
}

Vector normalize_relevance(const Vector& h) {
  if (!h.allFinite()) throw NumericError("normalize_relevance: non-finite relevance");
  double peak = h.cwiseAbs().maxCoeff();
  if (peak == 0.0) return Vector::Zero(h.size());
  return h / peak;
}

RelevanceMap explain(const NetworkParams& params, const Vector& x, int n, int m) {
  params.validate();
  check_class(params, n, "n");
  check_class(params, m, "m");

  ForwardTrace trace = forward(params, x);
  const int L = params.hidden_layers();

  RelevanceMap map;
  map.input_class = n;
  map.target_class = m;
  map.z_out = trace.z.back()[m - 1];
  map.layer_relevance.reserve(L);
  map.layer_relevance.push_back(relevance_last_hidden(trace, params, m));
  for (int layer = L; layer >= 2; --layer) {
    map.layer_relevance.push_back(
        relevance_backward(trace, params, map.layer_relevance.back(), layer));
  }
  map.h = relevance_input(trace, params, map.layer_relevance.back());
  map.h_prime = normalize_relevance(map.h);
  return map;
}

SubcarrierScores subcarrier_scores(const Vector& h_prime, int S, int A,
                                   int input_class, int target_class) {
  if (S < 1 || A < 1 || h_prime.size() != static_cast<Eigen::Index>(S) * A) {
    throw ConfigError("subcarrier_scores: expected " + std::to_string(S) + "*" +
                      std::to_string(A) + " normalized scores, got " +
                      std::to_string(h_prime.size()));
  }
  SubcarrierScores scores;
  scores.input_class = input_class;
  scores.target_class = target_class;
  scores.s_prime = Vector::Zero(S);
  for (int a = 0; a < A; ++a) scores.s_prime += h_prime.segment(a * S, S);
  scores.s_prime /= static_cast<double>(A);
  return scores;
}

std::string relevance_map_to_json(const RelevanceMap& map, const SubcarrierScores& scores) {
  std::ostringstream out;
  out << "{\"n\":" << map.input_class << ",\"m\":" << map.target_class
      << ",\"z_out\":" << detail::fmt_g17(map.z_out) << ",\"h\":[";
  append_numbers(out, map.h);
  out << "],\"h_prime\":[";
  append_numbers(out, map.h_prime);
  out << "],\"s_prime\":[";
  append_numbers(out, scores.s_prime);
  out << "]}";
  return out.str();
}

}  // namespace csix
