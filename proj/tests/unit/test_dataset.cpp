#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "csix/dataset.hpp"
#include "csix/errors.hpp"
#include "csix/synth.hpp"

using namespace csix;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

Dataset tiny_dataset(int K = 120) {
  Dataset d;
  d.K = K;
  d.S = K % 30 == 0 ? 30 : K;
  d.A = d.K / d.S;
  d.M = 2;
  d.location_names = {"p1", "p2"};
  for (int i = 0; i < 4; ++i) {
    CsiSample s;
    s.location_id = (i % 2) + 1;
    s.session_id = i;
    s.split = i < 2 ? Split::train : Split::test;
    s.channels = Vector::Constant(K, 1.0 + 0.25 * i);
    s.channels[0] = 1.0 / 3.0 + i;  // non-terminating decimal to stress formatting
    d.samples.push_back(s);
  }
  return d;
}

std::string header_120() {
  std::string h = "location,session,split";
  for (int k = 1; k <= 120; ++k) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), ",c%03d", k);
    h += buf;
  }
  return h;
}

std::string row_of(int location, int session, const std::string& split, int count,
                   double value) {
  std::ostringstream out;
  out << location << ',' << session << ',' << split;
  for (int k = 0; k < count; ++k) out << ',' << value;
  return out.str();
}

// Independent two-pass Pearson oracle over two channel columns.
double pearson_oracle(const Dataset& d, int col_a, int col_b) {
  const auto n = static_cast<double>(d.samples.size());
  double ma = 0.0, mb = 0.0;
  for (const auto& s : d.samples) {
    ma += s.channels[col_a];
    mb += s.channels[col_b];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (const auto& s : d.samples) {
    double da = s.channels[col_a] - ma;
    double db = s.channels[col_b] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  return cov / std::sqrt(va * vb);
}

}  // namespace

TEST_CASE("load_csv accepts a single-row file") {
  std::string path = temp_path("csix_single.csv");
  write_file(path, header_120() + "\n" + row_of(1, 0, "train", 120, 0.5) + "\n");
  Dataset d = load_csv(path);
  CHECK(d.samples.size() == 1);
  CHECK(d.K == 120);
  CHECK(d.S == 30);
  CHECK(d.A == 4);
  CHECK(d.M == 1);
  CHECK(d.samples[0].channels[119] == 0.5);
  std::remove(path.c_str());
}

TEST_CASE("load_csv reports the malformed row number") {
  std::string path = temp_path("csix_short_row.csv");
  write_file(path, header_120() + "\n" + row_of(1, 0, "train", 120, 0.5) + "\n" +
                       row_of(1, 0, "train", 119, 0.5) + "\n");
  CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("row 2"), ConfigError);
  CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("expected 120 channels"),
                       ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("load_csv rejects negative and non-finite amplitudes") {
  std::string path = temp_path("csix_bad_amp.csv");
  std::string row = row_of(1, 0, "train", 119, 0.5);
  write_file(path, header_120() + "\n" + row + ",-1\n");
  CHECK_THROWS_AS(load_csv(path), ConfigError);
  write_file(path, header_120() + "\n" + row + ",nan\n");
  CHECK_THROWS_AS(load_csv(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("load_csv rejects a missing file and a bad location id") {
  CHECK_THROWS_AS(load_csv(temp_path("csix_does_not_exist.csv")), ConfigError);
  std::string path = temp_path("csix_bad_loc.csv");
  write_file(path, header_120() + "\n" + row_of(0, 0, "train", 120, 0.5) + "\n");
  CHECK_THROWS_AS(load_csv(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("save_csv writes a header-only file for an empty dataset") {
  Dataset d;
  d.K = 120;
  d.S = 30;
  d.A = 4;
  d.M = 0;
  std::string path = temp_path("csix_empty.csv");
  save_csv(d, path);
  std::string text = read_file(path);
  CHECK(text.substr(0, 22) == "location,session,split");
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  std::remove(path.c_str());
}

TEST_CASE("save_csv writes one line per sample plus header") {
  Dataset d = tiny_dataset();
  d.samples.resize(1);
  std::string path = temp_path("csix_one.csv");
  save_csv(d, path);
  std::string text = read_file(path);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  std::remove(path.c_str());
}

TEST_CASE("save/load round-trip is byte-identical") {
  std::string path_a = temp_path("csix_rt_a.csv");
  std::string path_b = temp_path("csix_rt_b.csv");
  SynthConfig cfg;
  cfg.M = 3;
  cfg.train_per_loc = 5;
  cfg.test_per_loc = 2;
  auto [train, test] = generate_synthetic(cfg);
  save_csv(train, path_a);
  Dataset loaded = load_csv(path_a);
  save_csv(loaded, path_b);
  CHECK(read_file(path_a) == read_file(path_b));
  CHECK(loaded.samples.size() == train.samples.size());
  CHECK(loaded.S == train.S);
  CHECK(loaded.A == train.A);
  std::remove(path_a.c_str());
  std::remove(path_b.c_str());
}

TEST_CASE("class_stats hand values") {
  Dataset d;
  d.K = 2;
  d.S = 2;
  d.A = 1;
  d.M = 1;
  d.location_names = {"p1"};
  for (double v : {1.0, 3.0}) {
    CsiSample s;
    s.location_id = 1;
    s.channels = Vector::Constant(2, v);
    s.channels[1] = 3.0;  // constant column
    d.samples.push_back(s);
  }
  ClassStats stats = class_stats(d);
  CHECK(stats.mean(0, 0) == doctest::Approx(2.0));
  CHECK(stats.std(0, 0) == doctest::Approx(1.0));  // population denominator
  CHECK(stats.mean(0, 1) == doctest::Approx(3.0));
  CHECK(stats.std(0, 1) == kStdFloor);
}

TEST_CASE("class_stats rejects classes with fewer than two train samples") {
  Dataset d = tiny_dataset(4);
  d.samples.resize(1);  // only one train sample for p1, none for p2
  CHECK_THROWS_AS(class_stats(d), ConfigError);
}

TEST_CASE("class_stats is deterministic and matches brute-force means") {
  SynthConfig cfg;
  cfg.M = 4;
  cfg.S = 6;
  cfg.A = 2;
  cfg.train_per_loc = 9;
  cfg.test_per_loc = 2;
  auto [train, test] = generate_synthetic(cfg);
  ClassStats a = class_stats(train);
  ClassStats b = class_stats(train);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.std - b.std).cwiseAbs().maxCoeff() == 0.0);

  // Brute-force column averages per class.
  for (int m = 1; m <= cfg.M; ++m) {
    for (int k = 0; k < train.K; ++k) {
      double sum = 0.0;
      int count = 0;
      for (const auto& s : train.samples) {
        if (s.location_id != m) continue;
        sum += s.channels[k];
        ++count;
      }
      double mean = sum / count;
      double rel = std::abs(a.mean(m - 1, k) - mean) / std::max(1.0, std::abs(mean));
      CHECK(rel < 1e-12);
    }
  }
}

TEST_CASE("adjacent correlation detects exact linear dependence") {
  Dataset d;
  d.K = 3;
  d.S = 3;
  d.A = 1;
  d.M = 1;
  d.location_names = {"p1"};
  for (double v : {1.0, 2.0, 5.0}) {
    CsiSample s;
    s.location_id = 1;
    s.channels.resize(3);
    s.channels << v, 2.0 * v, 10.0 - v;  // col2 = 2*col1, col3 = -col2/... decreasing
    d.samples.push_back(s);
  }
  auto corr = adjacent_subcarrier_correlation(d);
  REQUIRE(corr.size() == 2);
  REQUIRE(corr[0].has_value());
  REQUIRE(corr[1].has_value());
  CHECK(*corr[0] == doctest::Approx(1.0));
  CHECK(*corr[1] == doctest::Approx(-1.0));
}

TEST_CASE("adjacent correlation marks zero-variance pairs undefined") {
  Dataset d;
  d.K = 3;
  d.S = 3;
  d.A = 1;
  d.M = 1;
  d.location_names = {"p1"};
  for (double v : {1.0, 2.0}) {
    CsiSample s;
    s.location_id = 1;
    s.channels.resize(3);
    s.channels << v, 4.0, v + 1.0;  // middle column constant
    d.samples.push_back(s);
  }
  auto corr = adjacent_subcarrier_correlation(d);
  REQUIRE(corr.size() == 2);
  CHECK_FALSE(corr[0].has_value());
  CHECK_FALSE(corr[1].has_value());
}

TEST_CASE("adjacent correlation agrees with a Pearson oracle") {
  SynthConfig cfg;
  cfg.M = 3;
  cfg.S = 8;
  cfg.A = 2;
  cfg.train_per_loc = 20;
  cfg.test_per_loc = 2;
  cfg.seed = 7;
  auto [train, test] = generate_synthetic(cfg);
  auto corr = adjacent_subcarrier_correlation(train);
  REQUIRE(corr.size() == static_cast<std::size_t>(cfg.S - 1));
  for (int i = 0; i + 1 < cfg.S; ++i) {
    REQUIRE(corr[i].has_value());
    double expected = 0.0;
    for (int a = 0; a < cfg.A; ++a) {
      expected += pearson_oracle(train, a * cfg.S + i, a * cfg.S + i + 1);
    }
    expected /= cfg.A;
    CHECK(std::abs(*corr[i] - expected) < 1e-12);
    CHECK(*corr[i] >= -1.0);
    CHECK(*corr[i] <= 1.0);
  }
}

TEST_CASE("richer multipath lowers adjacent-subcarrier correlation") {
  SynthConfig conference;
  conference.M = 6;
  conference.paths_per_location = 3;
  conference.train_per_loc = 40;
  conference.test_per_loc = 2;
  conference.seed = 11;
  SynthConfig lounge = conference;
  lounge.paths_per_location = 12;

  auto conf_data = generate_synthetic(conference).first;
  auto lounge_data = generate_synthetic(lounge).first;
  auto conf_corr = adjacent_subcarrier_correlation(conf_data);
  auto lounge_corr = adjacent_subcarrier_correlation(lounge_data);

  int lower = 0;
  int total = 0;
  for (std::size_t i = 0; i < conf_corr.size(); ++i) {
    if (!conf_corr[i] || !lounge_corr[i]) continue;
    ++total;
    if (*lounge_corr[i] < *conf_corr[i]) ++lower;
  }
  REQUIRE(total > 0);
  CHECK(lower * 2 > total);  // majority of pairs lower with richer multipath
}

TEST_CASE("min-max scaling maps the fitted dataset into [0, 1]") {
  SynthConfig cfg;
  cfg.M = 2;
  cfg.S = 5;
  cfg.A = 1;
  cfg.train_per_loc = 10;
  cfg.test_per_loc = 3;
  auto [train, test] = generate_synthetic(cfg);
  MinMaxScale scale = fit_minmax(train);
  Dataset scaled = apply_scale(train, scale);
  for (const auto& s : scaled.samples) {
    CHECK(s.channels.minCoeff() >= 0.0);
    CHECK(s.channels.maxCoeff() <= 1.0 + 1e-12);
  }
}
