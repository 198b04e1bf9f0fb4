// csix: generate CSI datasets, train and evaluate the localization DNN,
// and explain its decisions (relevance maps, manipulation curves, t-SNE).
// Every command writes plain files and is byte-reproducible given the
// same inputs and seeds.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "csix/baselines.hpp"
#include "csix/dataset.hpp"
#include "csix/embedding.hpp"
#include "csix/errors.hpp"
#include "csix/lrp.hpp"
#include "csix/manipulation.hpp"
#include "csix/mlp.hpp"
#include "csix/report.hpp"
#include "csix/synth.hpp"

namespace fs = std::filesystem;

namespace {

void write_text(const std::string& path, const std::string& content) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw csix::ConfigError("cannot write '" + path + "'");
  out << content;
  if (!out) throw csix::ConfigError("write failed for '" + path + "'");
}

std::vector<int> parse_hidden(const std::string& spec) {
  std::vector<int> dims;
  std::stringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      dims.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw csix::ConfigError("bad hidden layer spec '" + spec + "'");
    }
    if (dims.back() < 1) throw csix::ConfigError("hidden layer sizes must be >= 1");
  }
  if (dims.empty()) throw csix::ConfigError("hidden layer spec is empty");
  return dims;
}

struct BaselineSpec {
  std::string kind;  // "knn" or "svm"
  int k = 5;
  double gamma = 0.0;  // 0 selects the variance-scaled default
  double C = 1.0;
};

BaselineSpec parse_baseline(const std::string& text) {
  BaselineSpec spec;
  auto colon = text.find(':');
  spec.kind = text.substr(0, colon);
  if (spec.kind != "knn" && spec.kind != "svm") {
    throw csix::ConfigError("unknown baseline '" + spec.kind + "' (expected knn or svm)");
  }
  if (colon == std::string::npos) return spec;
  std::stringstream in(text.substr(colon + 1));
  std::string item;
  while (std::getline(in, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw csix::ConfigError("bad baseline option '" + item + "'");
    std::string key = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    try {
      if (key == "k" && spec.kind == "knn") {
        spec.k = std::stoi(value);
      } else if (key == "gamma" && spec.kind == "svm") {
        spec.gamma = std::stod(value);
      } else if (key == "C" && spec.kind == "svm") {
        spec.C = std::stod(value);
      } else {
        throw csix::ConfigError("unknown baseline option '" + key + "' for " + spec.kind);
      }
    } catch (const csix::ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw csix::ConfigError("bad value in baseline option '" + item + "'");
    }
  }
  return spec;
}

csix::Dataset load_for_model(const std::string& path,
                             const std::optional<csix::MinMaxScale>& scale,
                             std::optional<int> subcarriers) {
  csix::Dataset d = csix::load_csv(path, subcarriers);
  if (scale) d = csix::apply_scale(d, *scale);
  return d;
}

// ---- gen ----------------------------------------------------------------

struct GenOptions {
  std::string config_path;
  std::string out_dir;
};

int run_gen(const GenOptions& opt) {
  csix::SynthConfig config;
  if (!opt.config_path.empty()) config = csix::synth_config_from_json_file(opt.config_path);
  auto [train, test] = csix::generate_synthetic(config);
  fs::create_directories(opt.out_dir);
  csix::save_csv(train, (fs::path(opt.out_dir) / "train.csv").string());
  csix::save_csv(test, (fs::path(opt.out_dir) / "test.csv").string());

  for (int m = 1; m <= config.M; ++m) {
    int train_count = 0;
    int test_count = 0;
    for (const auto& s : train.samples) train_count += s.location_id == m;
    for (const auto& s : test.samples) test_count += s.location_id == m;
    std::cout << "p" << m << ": " << train_count << " train / " << test_count
              << " test samples\n";
  }
  std::cout << "wrote " << (fs::path(opt.out_dir) / "train.csv").string() << " and "
            << (fs::path(opt.out_dir) / "test.csv").string() << "\n";
  return 0;
}

// ---- train ---------------------------------------------------------------

struct TrainOptions {
  std::string data_path;
  std::string model_out;
  std::string loss_out;
  std::string hidden = "300,280,260";
  csix::TrainConfig config;
  std::string init = "scaled";
  bool scale_minmax = false;
};

int run_train(const TrainOptions& opt) {
  csix::Dataset data = csix::load_csv(opt.data_path);
  std::optional<csix::MinMaxScale> scale;
  if (opt.scale_minmax) {
    scale = csix::fit_minmax(data);
    data = csix::apply_scale(data, *scale);
  }

  std::vector<int> dims;
  dims.push_back(data.K);
  for (int h : parse_hidden(opt.hidden)) dims.push_back(h);
  dims.push_back(data.M);

  csix::TrainConfig config = opt.config;
  config.init = csix::init_scheme_from_string(opt.init);
  csix::NetworkParams params = csix::init_random(dims, config.seed, config.init);
  csix::TrainResult result = csix::train(std::move(params), data, config);

  csix::save_model(result.params, opt.model_out, scale);

  std::ostringstream loss;
  loss << "epoch,loss\n";
  for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", result.loss_history[i]);
    loss << (i + 1) << ',' << buf << '\n';
  }
  std::string loss_path = opt.loss_out.empty() ? opt.model_out + ".loss.csv" : opt.loss_out;
  write_text(loss_path, loss.str());

  std::cout << "trained ";
  for (std::size_t i = 0; i < dims.size(); ++i) std::cout << (i ? "-" : "") << dims[i];
  std::cout << " network on " << data.samples.size() << " samples";
  if (!result.loss_history.empty()) {
    std::cout << ", final loss " << result.loss_history.back();
  }
  std::cout << "\nwrote " << opt.model_out << " and " << loss_path << "\n";
  return 0;
}

// ---- eval ----------------------------------------------------------------

struct EvalOptions {
  std::string model_path;
  std::string data_path;
  std::string train_path;
  std::vector<std::string> baselines;
  std::string report_out;
};

int run_eval(const EvalOptions& opt) {
  std::optional<csix::MinMaxScale> scale;
  csix::NetworkParams params = csix::load_model(opt.model_path, &scale);
  csix::Dataset test = load_for_model(opt.data_path, scale, std::nullopt);
  if (test.M > params.output_size()) {
    throw csix::ConfigError("dataset has location ids beyond the model's classes");
  }
  const int classes = params.output_size();

  std::vector<csix::SchemeEvaluation> schemes;
  std::vector<int> labels = test.labels();

  std::vector<int> dnn_preds;
  dnn_preds.reserve(test.samples.size());
  for (const auto& s : test.samples) dnn_preds.push_back(csix::predict(params, s.channels));
  schemes.push_back({"dnn", csix::confusion(dnn_preds, labels, classes)});

  if (!opt.baselines.empty()) {
    if (opt.train_path.empty()) {
      throw csix::ConfigError("baselines need --train <train.csv>");
    }
    // Baselines classify raw CSI; the min-max scale applies to the DNN only.
    csix::Dataset train_raw = csix::load_csv(opt.train_path);
    csix::Dataset test_raw = csix::load_csv(opt.data_path);
    for (const auto& text : opt.baselines) {
      BaselineSpec spec = parse_baseline(text);
      std::vector<int> preds;
      preds.reserve(test_raw.samples.size());
      if (spec.kind == "knn") {
        for (const auto& s : test_raw.samples) {
          preds.push_back(csix::knn_predict(train_raw, s.channels, spec.k));
        }
        schemes.push_back({"knn(k=" + std::to_string(spec.k) + ")",
                           csix::confusion(preds, labels, classes)});
      } else {
        csix::SvmModel svm = csix::svm_train(train_raw, spec.gamma, spec.C);
        for (const auto& s : test_raw.samples) {
          preds.push_back(csix::svm_predict(svm, s.channels));
        }
        schemes.push_back({"svm", csix::confusion(preds, labels, classes)});
      }
    }
  }

  write_text(opt.report_out, csix::evaluation_report_json(schemes));
  for (const auto& scheme : schemes) {
    csix::ClassMetrics m = csix::precision_recall(scheme.cm);
    std::cout << scheme.name << ": macro precision "
              << std::llround(m.macro_precision * 10000.0) / 100.0 << "%, macro recall "
              << std::llround(m.macro_recall * 10000.0) / 100.0 << "%\n";
  }
  std::cout << "wrote " << opt.report_out << "\n";
  return 0;
}

// ---- embed ---------------------------------------------------------------

struct EmbedOptions {
  std::string model_path;
  std::string data_path;
  std::string layer = "last-hidden";
  double perplexity = 30.0;
  int iters = 1000;
  std::uint64_t seed = 0;
  std::string out_svg;
  std::string out_csv;
  std::string silhouette_on = "train";
  bool paper_affinities = false;
};

int run_embed(const EmbedOptions& opt) {
  if (opt.layer != "input" && opt.layer != "last-hidden") {
    throw csix::ConfigError("--layer must be input or last-hidden");
  }
  csix::Split subset = csix::split_from_string(opt.silhouette_on);

  csix::Matrix features;
  csix::Dataset data = csix::load_csv(opt.data_path);
  if (opt.layer == "input") {
    features = data.channel_matrix();
  } else {
    if (opt.model_path.empty()) {
      throw csix::ConfigError("--layer last-hidden needs --model");
    }
    std::optional<csix::MinMaxScale> scale;
    csix::NetworkParams params = csix::load_model(opt.model_path, &scale);
    if (scale) data = csix::apply_scale(data, *scale);
    features = csix::extract_last_hidden(params, data);
  }

  csix::TsneConfig config;
  config.perplexity = opt.perplexity;
  config.iters = opt.iters;
  config.seed = opt.seed;
  config.paper_affinities = opt.paper_affinities;
  csix::Embedding2D embedding = csix::tsne(features, config);
  embedding.labels = data.labels();
  embedding.splits.reserve(data.samples.size());
  for (const auto& s : data.samples) embedding.splits.push_back(s.split);
  embedding.silhouette_score = csix::silhouette(embedding, subset);
  embedding.silhouette_split = subset;

  write_text(opt.out_csv, csix::embedding_to_csv(embedding));
  write_text(opt.out_svg, csix::render_scatter(embedding, subset).to_xml());
  std::cout << "silhouette (" << csix::to_string(subset)
            << ") = " << *embedding.silhouette_score << ", final KL = " << embedding.final_kl
            << "\nwrote " << opt.out_svg << " and " << opt.out_csv << "\n";
  return 0;
}

// ---- curve ---------------------------------------------------------------

struct CurveOptions {
  std::string model_path;
  std::string data_path;
  std::string stats_from;
  int true_class = 0;
  int target_class = 0;
  std::string kind = "O3";
  std::string mode = "nullify";
  std::string granularity = "channel";
  std::string out_prefix;
};

int run_curve(const CurveOptions& opt) {
  csix::OrderingKind kind = csix::ordering_kind_from_string(opt.kind);
  csix::ManipulationMode mode = csix::manipulation_mode_from_string(opt.mode);
  csix::Granularity granularity = csix::granularity_from_string(opt.granularity);
  if (mode == csix::ManipulationMode::modify && opt.stats_from.empty()) {
    throw csix::ConfigError("modify mode needs --stats-from <train.csv>");
  }

  std::optional<csix::MinMaxScale> scale;
  csix::NetworkParams params = csix::load_model(opt.model_path, &scale);
  csix::Dataset test = load_for_model(opt.data_path, scale, std::nullopt);

  std::optional<csix::ClassStats> stats;
  if (!opt.stats_from.empty()) {
    stats = csix::class_stats(load_for_model(opt.stats_from, scale, std::nullopt));
  }

  csix::ExperimentCurve curve =
      csix::progressive_curve(params, test, opt.true_class, opt.target_class, kind, mode,
                              stats ? &*stats : nullptr, granularity);

  write_text(opt.out_prefix + ".csv", csix::curve_to_csv(curve));
  write_text(opt.out_prefix + ".svg", csix::render_curve({curve}).to_xml());
  std::cout << csix::to_string(kind) << "(p" << opt.true_class << " -> p" << opt.target_class
            << ") " << csix::to_string(mode) << ": frac_true " << curve.points.front().frac_true
            << " -> " << curve.points.back().frac_true << ", frac_target "
            << curve.points.back().frac_target << "\nwrote " << opt.out_prefix << ".csv and "
            << opt.out_prefix << ".svg\n";
  return 0;
}

// ---- explain -------------------------------------------------------------

struct ExplainOptions {
  std::string model_path;
  std::string data_path;
  int true_class = 0;
  int target_class = 0;
  std::string out_svg;
  std::string out_json;
  bool subcarrier = false;
};

int run_explain(const ExplainOptions& opt) {
  std::optional<csix::MinMaxScale> scale;
  csix::NetworkParams params = csix::load_model(opt.model_path, &scale);
  csix::Dataset data = load_for_model(opt.data_path, scale, std::nullopt);

  std::vector<csix::Vector> samples;
  std::vector<csix::Vector> h_primes;
  std::vector<csix::Vector> s_primes;
  std::ostringstream json;
  json << "[";
  bool first = true;
  for (const auto& s : data.samples) {
    if (s.location_id != opt.true_class) continue;
    csix::RelevanceMap map = csix::explain(params, s.channels, opt.true_class,
                                           opt.target_class);
    csix::SubcarrierScores scores = csix::subcarrier_scores(map.h_prime, data.S, data.A,
                                                            opt.true_class, opt.target_class);
    if (!first) json << ",";
    json << csix::relevance_map_to_json(map, scores);
    first = false;
    samples.push_back(s.channels);
    h_primes.push_back(map.h_prime);
    s_primes.push_back(scores.s_prime);
  }
  json << "]";
  if (samples.empty()) {
    throw csix::ConfigError("no samples of location p" + std::to_string(opt.true_class) +
                            " in '" + opt.data_path + "'");
  }

  write_text(opt.out_json, json.str());
  csix::SvgDocument svg =
      opt.subcarrier
          ? csix::render_heatmap_subcarrier(samples, s_primes, data.S, data.A,
                                            opt.true_class, opt.target_class)
          : csix::render_heatmap(samples, h_primes, opt.true_class, opt.target_class);
  write_text(opt.out_svg, svg.to_xml());
  std::cout << "explained " << samples.size() << " samples of p" << opt.true_class
            << " toward p" << opt.target_class << "\nwrote " << opt.out_svg << " and "
            << opt.out_json << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CSI fingerprint localization: train, evaluate and explain a DNN"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* cmd_gen = app.add_subcommand("gen", "generate a synthetic CSI dataset");
  cmd_gen->add_option("--config", gen.config_path, "SynthConfig JSON file");
  cmd_gen->add_option("--out", gen.out_dir, "output directory")->required();

  TrainOptions tr;
  auto* cmd_train = app.add_subcommand("train", "train the DNN on a dataset");
  cmd_train->add_option("--data", tr.data_path, "training CSV")->required();
  cmd_train->add_option("--model-out", tr.model_out, "model JSON output")->required();
  cmd_train->add_option("--loss-out", tr.loss_out, "loss log CSV (default <model>.loss.csv)");
  cmd_train->add_option("--hidden", tr.hidden, "hidden layer sizes (default 300,280,260)");
  cmd_train->add_option("--iters", tr.config.backprop_iters, "backprop epochs");
  cmd_train->add_option("--pretrain", tr.config.pretrain_iters,
                        "autoencoder pretraining epochs per hidden layer");
  cmd_train->add_option("--lr", tr.config.learning_rate, "learning rate");
  cmd_train->add_option("--batch", tr.config.batch_size, "minibatch size");
  cmd_train->add_option("--seed", tr.config.seed, "RNG seed");
  cmd_train->add_option("--init", tr.init, "weight init: scaled | gaussian-unit");
  cmd_train->add_flag("--scale-minmax", tr.scale_minmax,
                      "min-max scale inputs (stored in the model)");

  EvalOptions ev;
  auto* cmd_eval = app.add_subcommand("eval", "evaluate a model and optional baselines");
  cmd_eval->add_option("--model", ev.model_path, "model JSON")->required();
  cmd_eval->add_option("--data", ev.data_path, "evaluation CSV")->required();
  cmd_eval->add_option("--train", ev.train_path, "training CSV (needed for baselines)");
  cmd_eval->add_option("--baseline", ev.baselines,
                       "baseline spec, e.g. knn:k=5 or svm:gamma=0.01,C=1 (repeatable)");
  cmd_eval->add_option("--report", ev.report_out, "report JSON output")->required();

  EmbedOptions em;
  auto* cmd_embed = app.add_subcommand("embed", "t-SNE embedding of inputs or activations");
  cmd_embed->add_option("--model", em.model_path, "model JSON (needed for last-hidden)");
  cmd_embed->add_option("--data", em.data_path, "dataset CSV")->required();
  cmd_embed->add_option("--layer", em.layer, "input | last-hidden");
  cmd_embed->add_option("--perplexity", em.perplexity, "t-SNE perplexity");
  cmd_embed->add_option("--iters", em.iters, "t-SNE iterations");
  cmd_embed->add_option("--seed", em.seed, "t-SNE seed");
  cmd_embed->add_option("--out-svg", em.out_svg, "scatterplot SVG output")->required();
  cmd_embed->add_option("--out-csv", em.out_csv, "embedding CSV output")->required();
  cmd_embed->add_option("--silhouette-on", em.silhouette_on,
                        "split scored in the annotation: train | test");
  cmd_embed->add_flag("--paper-affinities", em.paper_affinities,
                      "constant-bandwidth joint affinities");

  CurveOptions cv;
  auto* cmd_curve = app.add_subcommand("curve", "progressive nullification/modification");
  cmd_curve->add_option("--model", cv.model_path, "model JSON")->required();
  cmd_curve->add_option("--data", cv.data_path, "test CSV")->required();
  cmd_curve->add_option("--true", cv.true_class, "true location n")->required();
  cmd_curve->add_option("--target", cv.target_class, "target location m")->required();
  cmd_curve->add_option("--kind", cv.kind, "ordering O1 | O2 | O3 | O4");
  cmd_curve->add_option("--mode", cv.mode, "nullify | modify");
  cmd_curve->add_option("--granularity", cv.granularity, "channel | subcarrier");
  cmd_curve->add_option("--stats-from", cv.stats_from, "train CSV for class statistics");
  cmd_curve->add_option("--out", cv.out_prefix, "output prefix (.csv and .svg)")->required();

  ExplainOptions ex;
  auto* cmd_explain = app.add_subcommand("explain", "relevance heatmap for a class pair");
  cmd_explain->add_option("--model", ex.model_path, "model JSON")->required();
  cmd_explain->add_option("--data", ex.data_path, "dataset CSV")->required();
  cmd_explain->add_option("--true", ex.true_class, "input location n")->required();
  cmd_explain->add_option("--target", ex.target_class, "output location m")->required();
  cmd_explain->add_option("--out-svg", ex.out_svg, "heatmap SVG output")->required();
  cmd_explain->add_option("--out-json", ex.out_json, "relevance JSON output")->required();
  cmd_explain->add_flag("--subcarrier", ex.subcarrier, "per-subcarrier four-panel heatmap");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(cmd_gen)) return run_gen(gen);
    if (app.got_subcommand(cmd_train)) return run_train(tr);
    if (app.got_subcommand(cmd_eval)) return run_eval(ev);
    if (app.got_subcommand(cmd_embed)) return run_embed(em);
    if (app.got_subcommand(cmd_curve)) return run_curve(cv);
    if (app.got_subcommand(cmd_explain)) return run_explain(ex);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const csix::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const csix::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
