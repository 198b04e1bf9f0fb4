#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "csix/baselines.hpp"
#include "csix/errors.hpp"
#include "csix/synth.hpp"

using namespace csix;

namespace {

Dataset grid_dataset() {
  Dataset d;
  d.K = 2;
  d.S = 2;
  d.A = 1;
  d.M = 2;
  d.location_names = {"p1", "p2"};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    CsiSample s;
    s.location_id = (i % 2) + 1;
    s.channels.resize(2);
    if (s.location_id == 1) {
      s.channels << u(rng), u(rng);
    } else {
      s.channels << 3.0 + u(rng), 3.0 + u(rng);
    }
    d.samples.push_back(s);
  }
  return d;
}

// Exhaustive oracle: full sort by (distance, index), majority vote,
// vote ties resolved by the earliest-ranked member of a tied class.
int knn_oracle(const Dataset& train, const Vector& x, int k) {
  std::vector<std::pair<double, int>> all;
  for (std::size_t i = 0; i < train.samples.size(); ++i) {
    all.emplace_back((train.samples[i].channels - x).squaredNorm(), static_cast<int>(i));
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  std::vector<int> votes(train.M + 1, 0);
  for (int r = 0; r < k; ++r) votes[train.samples[all[r].second].location_id]++;
  int best = *std::max_element(votes.begin(), votes.end());
  for (int r = 0; r < k; ++r) {
    int cls = train.samples[all[r].second].location_id;
    if (votes[cls] == best) return cls;
  }
  return 0;
}

}  // namespace

TEST_CASE("knn with k=1 returns the class of an exact match") {
  Dataset d = grid_dataset();
  for (int i : {0, 5, 11}) {
    CHECK(knn_predict(d, d.samples[i].channels, 1) == d.samples[i].location_id);
  }
}

TEST_CASE("knn validates k") {
  Dataset d = grid_dataset();
  Vector x = Vector::Zero(2);
  CHECK_THROWS_AS(knn_predict(d, x, 0), ConfigError);
  CHECK_THROWS_AS(knn_predict(d, x, static_cast<int>(d.samples.size()) + 1), ConfigError);
}

TEST_CASE("knn matches the exhaustive oracle on random queries") {
  SynthConfig cfg;
  cfg.M = 5;
  cfg.S = 6;
  cfg.A = 2;
  cfg.train_per_loc = 12;
  cfg.test_per_loc = 2;
  cfg.seed = 23;
  auto [train, test] = generate_synthetic(cfg);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 12.0);
  for (int q = 0; q < 200; ++q) {
    Vector x(train.K);
    for (int i = 0; i < train.K; ++i) x[i] = u(rng);
    for (int k : {1, 5}) {
      CHECK(knn_predict(train, x, k) == knn_oracle(train, x, k));
    }
  }
}

TEST_CASE("knn vote tie goes to the class owning the nearest neighbor") {
  Dataset d;
  d.K = 1;
  d.S = 1;
  d.A = 1;
  d.M = 2;
  d.location_names = {"p1", "p2"};
  // Class 2 owns the single nearest neighbor; both classes get 2 votes at k=4.
  for (auto [v, cls] : std::vector<std::pair<double, int>>{
           {1.0, 2}, {2.0, 1}, {3.0, 1}, {4.0, 2}}) {
    CsiSample s;
    s.location_id = cls;
    s.channels = Vector::Constant(1, v);
    d.samples.push_back(s);
  }
  CHECK(knn_predict(d, Vector::Zero(1), 4) == 2);
}

TEST_CASE("svm separates a toy problem and satisfies KKT") {
  Dataset d = grid_dataset();
  SvmModel model = svm_train(d, 0.0, 10.0);
  int hits = 0;
  for (const auto& s : d.samples) hits += svm_predict(model, s.channels) == s.location_id;
  CHECK(hits == static_cast<int>(d.samples.size()));
  CHECK(svm_kkt_excess(model, 1e-3) <= 1e-9);
}

TEST_CASE("svm predictions are invariant under sample duplication") {
  Dataset d = grid_dataset();
  Dataset doubled = d;
  for (const auto& s : d.samples) doubled.samples.push_back(s);

  SvmModel a = svm_train(d, 0.5, 10.0);
  SvmModel b = svm_train(doubled, 0.5, 10.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.5, 4.5);
  for (int q = 0; q < 100; ++q) {
    Vector x(2);
    x << u(rng), u(rng);
    CHECK(svm_predict(a, x) == svm_predict(b, x));
  }
}

TEST_CASE("svm training is deterministic and validates inputs") {
  Dataset d = grid_dataset();
  SvmModel a = svm_train(d);
  SvmModel b = svm_train(d);
  CHECK(a.coeffs == b.coeffs);
  CHECK(a.bias == b.bias);
  CHECK(a.gamma == b.gamma);

  Dataset one_class = d;
  for (auto& s : one_class.samples) s.location_id = 1;
  one_class.M = 1;
  one_class.location_names = {"p1"};
  CHECK_THROWS_AS(svm_train(one_class), ConfigError);
  CHECK_THROWS_AS(svm_train(d, 0.5, -1.0), ConfigError);
}

TEST_CASE("confusion matrix counts and rejects out-of-range entries") {
  ConfusionMatrix cm = confusion({1, 2, 2, 1}, {1, 2, 1, 1}, 2);
  CHECK(cm.counts(0, 0) == 2);  // true 1 predicted 1
  CHECK(cm.counts(0, 1) == 1);  // true 1 predicted 2
  CHECK(cm.counts(1, 1) == 1);
  CHECK(cm.total() == 4);

  CHECK_THROWS_AS(confusion({1, 3}, {1, 1}, 2), ConfigError);
  CHECK_THROWS_AS(confusion({1}, {1, 1}, 2), ConfigError);

  // Perfect predictor -> diagonal; constant predictor -> one column.
  ConfusionMatrix diag = confusion({1, 2, 3}, {1, 2, 3}, 3);
  CHECK(diag.counts.diagonal().sum() == diag.total());
  ConfusionMatrix col = confusion({2, 2, 2}, {1, 2, 3}, 3);
  CHECK(col.counts.col(1).sum() == col.total());
  CHECK(col.counts.col(0).sum() == 0);
}

TEST_CASE("precision/recall hand values") {
  ConfusionMatrix cm;
  cm.counts = Eigen::MatrixXi(2, 2);
  cm.counts << 8, 2, 4, 6;
  ClassMetrics m = precision_recall(cm);
  REQUIRE(m.precision[0].has_value());
  REQUIRE(m.precision[1].has_value());
  CHECK(*m.precision[0] == doctest::Approx(8.0 / 12.0));
  CHECK(*m.precision[1] == doctest::Approx(6.0 / 8.0));
  CHECK(*m.recall[0] == doctest::Approx(0.8));
  CHECK(*m.recall[1] == doctest::Approx(0.6));
  double p = 0.5 * (8.0 / 12.0 + 6.0 / 8.0);
  double r = 0.7;
  CHECK(m.macro_precision == doctest::Approx(p));
  CHECK(m.macro_recall == doctest::Approx(r));
  CHECK(m.f1 == doctest::Approx(2.0 * p * r / (p + r)));
}

TEST_CASE("diagonal confusion gives perfect metrics") {
  ConfusionMatrix cm;
  cm.counts = Eigen::MatrixXi::Zero(3, 3);
  cm.counts.diagonal() << 5, 7, 2;
  ClassMetrics m = precision_recall(cm);
  for (int c = 0; c < 3; ++c) {
    CHECK(*m.precision[c] == 1.0);
    CHECK(*m.recall[c] == 1.0);
  }
  CHECK(m.f1 == doctest::Approx(1.0));
}

TEST_CASE("never-predicted classes are excluded from the macro mean") {
  ConfusionMatrix cm;
  cm.counts = Eigen::MatrixXi::Zero(3, 3);
  cm.counts(0, 0) = 4;
  cm.counts(1, 0) = 2;
  cm.counts(2, 2) = 3;  // class 2 never predicted
  ClassMetrics m = precision_recall(cm);
  CHECK_FALSE(m.precision[1].has_value());
  CHECK(m.macro_precision == doctest::Approx((4.0 / 6.0 + 1.0) / 2.0));

  CHECK_THROWS_AS(precision_recall(ConfusionMatrix{Eigen::MatrixXi::Zero(2, 2)}),
                  ConfigError);
}

TEST_CASE("micro accuracy is invariant under class permutation") {
  ConfusionMatrix cm;
  cm.counts = Eigen::MatrixXi(3, 3);
  cm.counts << 5, 1, 0, 2, 6, 1, 0, 0, 9;
  double micro = static_cast<double>(cm.counts.diagonal().sum()) / cm.total();

  Eigen::MatrixXi perm(3, 3);
  perm.setZero();
  perm(0, 2) = perm(1, 0) = perm(2, 1) = 1;  // cyclic permutation
  ConfusionMatrix shuffled;
  shuffled.counts = perm * cm.counts * perm.transpose();
  double micro2 = static_cast<double>(shuffled.counts.diagonal().sum()) / shuffled.total();
  CHECK(micro == doctest::Approx(micro2));
}

TEST_CASE("evaluation report JSON mirrors the table layout") {
  ConfusionMatrix cm;
  cm.counts = Eigen::MatrixXi(2, 2);
  cm.counts << 8, 2, 4, 6;
  std::string json = evaluation_report_json({{"dnn", cm}, {"knn(k=5)", cm}});
  CHECK(json.find("\"name\":\"dnn\"") != std::string::npos);
  CHECK(json.find("\"name\":\"knn(k=5)\"") != std::string::npos);
  CHECK(json.find("\"confusion\":[[8,2],[4,6]]") != std::string::npos);
  CHECK(json.find("\"recall_percent\":[80,60]") != std::string::npos);
  CHECK(json.find("\"precision_percent\":[67,75]") != std::string::npos);
  CHECK(json.find("\"macro_recall_percent\":70.00") != std::string::npos);
}
