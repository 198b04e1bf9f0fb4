#include "csix/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csix/errors.hpp"
#include "format.hpp"

namespace csix {

namespace {

std::string channel_label(int index_1based, int K) {
  int width = 3;
  for (int v = K; v >= 1000 && width < 10; v /= 10) ++width;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "c%0*d", std::min(width, 10), index_1based);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

int parse_int(const std::string& text, const std::string& context) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(context + ": invalid integer '" + text + "'");
  }
  return value;
}

double parse_double(const std::string& text, const std::string& context) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(context + ": invalid number '" + text + "'");
  }
  return value;
}

void infer_layout(Dataset& d, std::optional<int> subcarriers) {
  if (subcarriers) {
    if (*subcarriers < 1 || d.K % *subcarriers != 0) {
      throw ConfigError("subcarrier count " + std::to_string(*subcarriers) +
                        " does not divide channel count " + std::to_string(d.K));
    }
    d.S = *subcarriers;
  } else if (d.K % 30 == 0) {
    d.S = 30;
  } else {
    d.S = d.K;
  }
  d.A = d.K / d.S;
}

}  // namespace

std::string to_string(Split split) { return split == Split::train ? "train" : "test"; }

Split split_from_string(const std::string& text) {
  if (text == "train") return Split::train;
  if (text == "test") return Split::test;
  throw ConfigError("unknown split tag '" + text + "' (expected train or test)");
}

void Dataset::validate() const {
  if (K < 1 || S < 1 || A < 1 || K != S * A) {
    throw ConfigError("dataset layout broken: K=" + std::to_string(K) + " S=" +
                      std::to_string(S) + " A=" + std::to_string(A));
  }
  if (M < 0 || static_cast<int>(location_names.size()) != M) {
    throw ConfigError("dataset has " + std::to_string(location_names.size()) +
                      " location names for M=" + std::to_string(M));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const CsiSample& s = samples[i];
    if (s.channels.size() != K) {
      throw ConfigError("sample " + std::to_string(i + 1) + ": expected " +
                        std::to_string(K) + " channels, got " +
                        std::to_string(s.channels.size()));
    }
    for (int k = 0; k < K; ++k) {
      double v = s.channels[k];
      if (!std::isfinite(v) || v < 0.0) {
        throw ConfigError("sample " + std::to_string(i + 1) + ", channel " +
                          std::to_string(k + 1) + ": amplitude " + detail::fmt_g17(v) +
                          " is negative or non-finite");
      }
    }
    if (s.location_id < 1 || s.location_id > M) {
      throw ConfigError("sample " + std::to_string(i + 1) + ": location " +
                        std::to_string(s.location_id) + " outside [1, " +
                        std::to_string(M) + "]");
    }
    if (s.session_id < 0) {
      throw ConfigError("sample " + std::to_string(i + 1) + ": negative session id");
    }
  }
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.location_id);
  return out;
}

Matrix Dataset::channel_matrix() const {
  Matrix m(static_cast<Eigen::Index>(samples.size()), K);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) = samples[i].channels.transpose();
  return m;
}

Dataset load_csv(const std::string& path, std::optional<int> subcarriers) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file '" + path + "'");

  std::string header;
  if (!std::getline(in, header)) throw ConfigError(path + ": empty file, header expected");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  auto columns = split_fields(header);
  if (columns.size() < 4 || columns[0] != "location" || columns[1] != "session" ||
      columns[2] != "split") {
    throw ConfigError(path + ": header must start with location,session,split,c001,...");
  }
  int K = static_cast<int>(columns.size()) - 3;
  for (int k = 0; k < K; ++k) {
    std::string expected = channel_label(k + 1, K);
    if (columns[k + 3] != expected) {
      throw ConfigError(path + ": header column " + std::to_string(k + 4) +
                        " is '" + columns[k + 3] + "', expected '" + expected + "'");
    }
  }

  Dataset d;
  d.K = K;
  infer_layout(d, subcarriers);

  std::string line;
  int row = 0;
  int max_location = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::string where = "row " + std::to_string(row);
    auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != K + 3) {
      throw ConfigError(path + ": " + where + ": expected " + std::to_string(K) +
                        " channels, got " + std::to_string(static_cast<int>(fields.size()) - 3));
    }
    CsiSample s;
    s.location_id = parse_int(fields[0], where);
    s.session_id = parse_int(fields[1], where);
    s.split = split_from_string(fields[2]);
    if (s.location_id < 1) throw ConfigError(path + ": " + where + ": location id must be >= 1");
    if (s.session_id < 0) throw ConfigError(path + ": " + where + ": session id must be >= 0");
    s.channels.resize(K);
    for (int k = 0; k < K; ++k) {
      double v = parse_double(fields[k + 3], where);
      if (!std::isfinite(v) || v < 0.0) {
        throw ConfigError(path + ": " + where + ": channel " + std::to_string(k + 1) +
                          ": amplitude must be finite and >= 0");
      }
      s.channels[k] = v;
    }
    max_location = std::max(max_location, s.location_id);
    d.samples.push_back(std::move(s));
  }

  d.M = max_location;
  d.location_names.reserve(d.M);
  for (int m = 1; m <= d.M; ++m) d.location_names.push_back("p" + std::to_string(m));
  d.validate();
  return d;
}

void save_csv(const Dataset& dataset, const std::string& path) {
  dataset.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write dataset file '" + path + "'");

  out << "location,session,split";
  for (int k = 1; k <= dataset.K; ++k) out << ',' << channel_label(k, dataset.K);
  out << '\n';
  for (const auto& s : dataset.samples) {
    out << s.location_id << ',' << s.session_id << ',' << to_string(s.split);
    for (int k = 0; k < dataset.K; ++k) out << ',' << detail::fmt_g17(s.channels[k]);
    out << '\n';
  }
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

ClassStats class_stats(const Dataset& train) {
  train.validate();
  if (train.M < 1) throw ConfigError("class_stats: dataset has no location classes");

  std::vector<int> counts(train.M, 0);
  Matrix sum = Matrix::Zero(train.M, train.K);
  for (const auto& s : train.samples) {
    if (s.split != Split::train) continue;
    counts[s.location_id - 1]++;
    sum.row(s.location_id - 1) += s.channels.transpose();
  }
  for (int m = 0; m < train.M; ++m) {
    if (counts[m] < 2) {
      throw ConfigError("class_stats: location p" + std::to_string(m + 1) + " has " +
                        std::to_string(counts[m]) + " train samples, need at least 2");
    }
  }

  ClassStats stats;
  stats.mean = Matrix::Zero(train.M, train.K);
  for (int m = 0; m < train.M; ++m) stats.mean.row(m) = sum.row(m) / counts[m];

  Matrix sq = Matrix::Zero(train.M, train.K);
  for (const auto& s : train.samples) {
    if (s.split != Split::train) continue;
    int m = s.location_id - 1;
    Eigen::RowVectorXd diff = s.channels.transpose() - stats.mean.row(m);
    sq.row(m) += diff.cwiseProduct(diff);
  }
  stats.std = Matrix::Zero(train.M, train.K);
  for (int m = 0; m < train.M; ++m) {
    stats.std.row(m) = (sq.row(m) / counts[m]).cwiseSqrt().cwiseMax(kStdFloor);
  }
  return stats;
}

std::vector<std::optional<double>> adjacent_subcarrier_correlation(const Dataset& dataset) {
  dataset.validate();
  const auto n = static_cast<Eigen::Index>(dataset.samples.size());
  if (n < 2) throw ConfigError("adjacent_subcarrier_correlation: need at least 2 samples");

  Matrix data = dataset.channel_matrix();
  Eigen::RowVectorXd mean = data.colwise().mean();
  Matrix centered = data.rowwise() - mean;
  Eigen::RowVectorXd var = centered.array().square().colwise().mean();

  std::vector<std::optional<double>> result;
  result.reserve(dataset.S - 1);
  for (int i = 0; i + 1 < dataset.S; ++i) {
    double acc = 0.0;
    bool defined = true;
    for (int a = 0; a < dataset.A && defined; ++a) {
      int c0 = a * dataset.S + i;
      int c1 = c0 + 1;
      if (var[c0] <= 0.0 || var[c1] <= 0.0) {
        defined = false;
        break;
      }
      double cov = centered.col(c0).cwiseProduct(centered.col(c1)).mean();
      acc += cov / std::sqrt(var[c0] * var[c1]);
    }
    if (defined) {
      result.emplace_back(acc / dataset.A);
    } else {
      result.emplace_back(std::nullopt);
    }
  }
  return result;
}

Vector MinMaxScale::apply(const Vector& x) const {
  if (x.size() != lo.size()) {
    throw ConfigError("min-max scale fitted for " + std::to_string(lo.size()) +
                      " channels, got input of length " + std::to_string(x.size()));
  }
  Vector out(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    double range = hi[k] - lo[k];
    out[k] = range > 0.0 ? std::max(0.0, (x[k] - lo[k]) / range) : 0.0;
  }
  return out;
}

MinMaxScale fit_minmax(const Dataset& train) {
  train.validate();
  if (train.samples.empty()) throw ConfigError("fit_minmax: empty dataset");
  MinMaxScale scale;
  scale.lo = train.samples.front().channels;
  scale.hi = train.samples.front().channels;
  for (const auto& s : train.samples) {
    scale.lo = scale.lo.cwiseMin(s.channels);
    scale.hi = scale.hi.cwiseMax(s.channels);
  }
  return scale;
}

Dataset apply_scale(const Dataset& dataset, const MinMaxScale& scale) {
  Dataset out = dataset;
  for (auto& s : out.samples) s.channels = scale.apply(s.channels);
  return out;
}

}  // namespace csix
