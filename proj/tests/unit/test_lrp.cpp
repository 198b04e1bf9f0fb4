#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "csix/errors.hpp"
#include "csix/lrp.hpp"

using namespace csix;

namespace {

// All-positive weights and inputs keep every pre-activation (and so every
// relevance denominator) strictly positive, which is the exact-conservation
// regime for the zero-bias recursions.
NetworkParams positive_net(const std::vector<int>& dims, std::uint64_t seed) {
  NetworkParams p;
  p.dims = dims;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Matrix w(dims[l + 1], dims[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
    }
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vector::Zero(dims[l + 1]));
  }
  return p;
}

Vector positive_input(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  Vector x(size);
  for (int i = 0; i < size; ++i) x[i] = u(rng);
  return x;
}

}  // namespace

TEST_CASE("output-layer relevance: single active hidden unit takes it all") {
  NetworkParams p;
  p.dims = {2, 2, 2};
  p.weights = {Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  p.biases = {Vector::Zero(2), Vector::Zero(2)};
  p.weights[0] << 1.0, 0.0, -1.0, 0.0;  // x=[1,0] activates only unit 1
  p.weights[1] << 2.0, 5.0, 1.0, 1.0;

  Vector x(2);
  x << 1.0, 0.0;
  ForwardTrace t = forward(p, x);
  REQUIRE(t.a.back()[0] == 1.0);
  REQUIRE(t.a.back()[1] == 0.0);

  Vector r = relevance_last_hidden(t, p, 1);
  double z_m = t.z.back()[0];  // 2*1 + 5*0 = 2
  CHECK(z_m == doctest::Approx(2.0));
  CHECK(r[0] == doctest::Approx(z_m).epsilon(1e-8));
  CHECK(r[1] == 0.0);
}

TEST_CASE("output-layer relevance hand example") {
  // a = [1, 2], w_m = [3, -1], zero bias: z_m = 1, R = [3, -2].
  NetworkParams p;
  p.dims = {2, 2, 2};
  p.weights = {Matrix::Identity(2, 2), Matrix::Zero(2, 2)};
  p.biases = {Vector::Zero(2), Vector::Zero(2)};
  p.weights[1] << 3.0, -1.0, 0.5, 0.5;

  Vector x(2);
  x << 1.0, 2.0;
  ForwardTrace t = forward(p, x);
  Vector r = relevance_last_hidden(t, p, 1);
  CHECK(r[0] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(r[1] == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(r.sum() == doctest::Approx(t.z.back()[0]).epsilon(1e-9));
}

TEST_CASE("backward relevance hand example and null propagation") {
  // a_prev = [1, 1], W = [[1,0],[0,2]], zero bias, R = [4, 6] -> [4, 6].
  NetworkParams p;
  p.dims = {2, 2, 2, 2};
  p.weights = {Matrix::Identity(2, 2), Matrix::Zero(2, 2), Matrix::Identity(2, 2)};
  p.biases = {Vector::Zero(2), Vector::Zero(2), Vector::Zero(2)};
  p.weights[1] << 1.0, 0.0, 0.0, 2.0;

  Vector x(2);
  x << 1.0, 1.0;
  ForwardTrace t = forward(p, x);
  REQUIRE(t.a[0][0] == 1.0);
  REQUIRE(t.a[0][1] == 1.0);

  Vector upper(2);
  upper << 4.0, 6.0;
  Vector lower = relevance_backward(t, p, upper, 2);
  CHECK(lower[0] == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(lower[1] == doctest::Approx(6.0).epsilon(1e-8));
  CHECK(lower.sum() == doctest::Approx(upper.sum()).epsilon(1e-9));

  Vector zeros = relevance_backward(t, p, Vector::Zero(2), 2);
  CHECK(zeros.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(relevance_backward(t, p, upper, 1), ConfigError);
  CHECK_THROWS_AS(relevance_backward(t, p, upper, 3), ConfigError);
}

TEST_CASE("input relevance concentrates on the only nonzero channel") {
  NetworkParams p = positive_net({3, 4, 2}, 21);
  Vector x = Vector::Zero(3);
  x[1] = 2.0;
  ForwardTrace t = forward(p, x);
  Vector r1 = relevance_last_hidden(t, p, 1);
  Vector h = relevance_input(t, p, r1);
  CHECK(h[0] == 0.0);
  CHECK(h[2] == 0.0);
  CHECK(h[1] != 0.0);
  CHECK(h.sum() == doctest::Approx(r1.sum()).epsilon(1e-9));
}

TEST_CASE("zero-bias nets conserve relevance through the full chain") {
  NetworkParams p = positive_net({6, 8, 7, 5, 3}, 33);
  Vector x = positive_input(6, 12);
  for (int m = 1; m <= 3; ++m) {
    RelevanceMap map = explain(p, x, 1, m);
    double z_m = map.z_out;
    REQUIRE(std::abs(z_m) > 1e-6);
    // Every stored layer and the input layer carry the same total.
    for (const auto& layer : map.layer_relevance) {
      CHECK(layer.sum() == doctest::Approx(z_m).epsilon(1e-8));
    }
    CHECK(map.h.sum() == doctest::Approx(z_m).epsilon(1e-8));
  }
}

TEST_CASE("explain is deterministic and finds positive evidence") {
  NetworkParams p = positive_net({5, 6, 4}, 44);
  Vector x = positive_input(5, 9);
  int m = predict(p, x);
  RelevanceMap a = explain(p, x, 1, m);
  RelevanceMap b = explain(p, x, 1, m);
  CHECK(a.h == b.h);
  CHECK(a.h_prime == b.h_prime);
  CHECK(a.z_out == b.z_out);
  CHECK(a.h_prime.maxCoeff() > 0.0);  // some channel supports the prediction
}

TEST_CASE("normalize_relevance hand values and degenerate input") {
  Vector h(3);
  h << 2.0, -4.0, 1.0;
  Vector n = normalize_relevance(h);
  CHECK(n[0] == doctest::Approx(0.5));
  CHECK(n[1] == doctest::Approx(-1.0));
  CHECK(n[2] == doctest::Approx(0.25));

  Vector zeros = normalize_relevance(Vector::Zero(2));
  CHECK(zeros[0] == 0.0);
  CHECK(zeros[1] == 0.0);
}

TEST_CASE("normalization preserves order and sign") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int rep = 0; rep < 1000; ++rep) {
    Vector h(7);
    for (int i = 0; i < 7; ++i) h[i] = g(rng);
    Vector n = normalize_relevance(h);
    CHECK(n.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<int> idx(7);
    std::iota(idx.begin(), idx.end(), 0);
    auto by_h = idx;
    std::sort(by_h.begin(), by_h.end(), [&](int a, int b) { return h[a] < h[b]; });
    auto by_n = idx;
    std::sort(by_n.begin(), by_n.end(), [&](int a, int b) { return n[a] < n[b]; });
    CHECK(by_h == by_n);
    for (int i = 0; i < 7; ++i) {
      CHECK(n[i] * h[i] >= 0.0);
      CHECK(n[i] >= -1.0);
      CHECK(n[i] <= 1.0);
    }
  }
}

TEST_CASE("subcarrier scores average the antenna pairs") {
  const int S = 5;
  const int A = 4;
  SUBCASE("constant scores stay constant") {
    Vector h = Vector::Constant(S * A, 0.37);
    auto scores = subcarrier_scores(h, S, A, 1, 2);
    for (int i = 0; i < S; ++i) CHECK(scores.s_prime[i] == doctest::Approx(0.37));
  }
  SUBCASE("alternating blocks cancel") {
    Vector h(S * A);
    for (int a = 0; a < A; ++a) {
      h.segment(a * S, S).setConstant(a % 2 == 0 ? 1.0 : -1.0);
    }
    auto scores = subcarrier_scores(h, S, A, 1, 2);
    for (int i = 0; i < S; ++i) CHECK(scores.s_prime[i] == doctest::Approx(0.0));
  }
  SUBCASE("random scores match the brute-force average and stay bounded") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector h(S * A);
    for (int i = 0; i < S * A; ++i) h[i] = u(rng);
    auto scores = subcarrier_scores(h, S, A, 1, 2);
    for (int i = 0; i < S; ++i) {
      double sum = 0.0;
      double peak = 0.0;
      for (int a = 0; a < A; ++a) {
        sum += h[i + a * S];
        peak = std::max(peak, std::abs(h[i + a * S]));
      }
      CHECK(std::abs(scores.s_prime[i] - sum / A) < 1e-12);
      CHECK(std::abs(scores.s_prime[i]) <= peak + 1e-12);
    }
  }
  SUBCASE("length mismatch is rejected") {
    CHECK_THROWS_AS(subcarrier_scores(Vector::Zero(7), S, A, 1, 2), ConfigError);
  }
}

TEST_CASE("relevance JSON carries the contract fields") {
  NetworkParams p = positive_net({4, 5, 3}, 50);
  Vector x = positive_input(4, 3);
  RelevanceMap map = explain(p, x, 1, 2);
  auto scores = subcarrier_scores(map.h_prime, 2, 2, 1, 2);
  std::string json = relevance_map_to_json(map, scores);
  CHECK(json.find("\"n\":1") != std::string::npos);
  CHECK(json.find("\"m\":2") != std::string::npos);
  CHECK(json.find("\"h\":[") != std::string::npos);
  CHECK(json.find("\"h_prime\":[") != std::string::npos);
  CHECK(json.find("\"s_prime\":[") != std::string::npos);
  CHECK(json.find("\"z_out\":") != std::string::npos);
}
