#include "fstat/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fstat/errors.hpp"
#include "fstat/io.hpp"
#include "fstat/metrics.hpp"
#include "fstat/rng.hpp"
#include "fstat/sampling.hpp"
#include "fstat/synthdata.hpp"
#include "fstat/train.hpp"

namespace fse {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitTrainFailure = 3;
constexpr int kExitIncompatible = 4;

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw config_error(path + ": " + e.what());
  }
  return doc;
}

// typo guard: configs may only contain known keys
void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw config_error(where + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known) throw config_error(where + ": unknown key '" + it.key() + "'");
  }
}

FactorSpec parse_factor_spec(const json& j, const std::string& where) {
  require_keys(j, where,
               {"factors", "instances_per_combination", "observation_dim",
                "observation_noise_sd", "mixing_seed"});
  FactorSpec spec;
  if (!j.contains("factors")) throw config_error(where + ": missing 'factors'");
  for (const auto& f : j.at("factors")) {
    require_keys(f, where + ".factors[]", {"name", "values", "role"});
    Factor factor;
    factor.name = f.at("name").get<std::string>();
    factor.value_count = f.at("values").get<int>();
    const std::string role = f.value("role", "class");
    if (role == "noise") {
      factor.role = FactorRole::kNoise;
    } else if (role == "class") {
      factor.role = FactorRole::kClassRelevant;
    } else {
      throw config_error(where + ": unknown factor role '" + role + "'");
    }
    spec.factors.push_back(std::move(factor));
  }
  spec.instances_per_combination = j.value("instances_per_combination", 1);
  spec.observation_dim = j.value("observation_dim", spec.one_hot_width());
  spec.observation_noise_sd = j.value("observation_noise_sd", 0.0);
  spec.mixing_seed = j.value("mixing_seed", std::uint64_t{0});
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(where + ": " + e.what());
  }
  return spec;
}

struct ExperimentConfig {
  std::string dataset_path;
  std::uint64_t seed = 0;
  std::vector<int> hidden_sizes{64};
  int embedding_dim = 16;
  TrainConfig train;
  std::string out_model;
  std::string out_log;
};

ExperimentConfig parse_experiment(const json& j) {
  require_keys(j, "config", {"dataset", "seed", "encoder", "loss", "oracle", "train", "out"});
  ExperimentConfig cfg;
  if (!j.contains("dataset")) throw config_error("config: missing 'dataset'");
  cfg.dataset_path = j.at("dataset").get<std::string>();
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.train.seed = cfg.seed;

  if (j.contains("encoder")) {
    const auto& enc = j.at("encoder");
    require_keys(enc, "config.encoder", {"hidden_sizes", "embedding_dim"});
    cfg.hidden_sizes = enc.value("hidden_sizes", cfg.hidden_sizes);
    cfg.embedding_dim = enc.value("embedding_dim", cfg.embedding_dim);
  }

  if (j.contains("oracle")) {
    const auto& oracle = j.at("oracle");
    require_keys(oracle, "config.oracle", {"kind", "max_labels", "max_per_label"});
    const std::string kind = oracle.value("kind", "conjunction");
    if (kind == "factor") {
      cfg.train.oracle = OracleKind::kFactor;
    } else if (kind == "class" || kind == "conjunction") {
      cfg.train.oracle = OracleKind::kConjunction;
    } else {
      throw config_error("config.oracle: unknown kind '" + kind + "'");
    }
    if (oracle.contains("max_labels")) cfg.train.episode.max_labels = oracle.at("max_labels");
    if (oracle.contains("max_per_label")) {
      cfg.train.episode.max_per_label = oracle.at("max_per_label").get<int>();
    }
  }

  bool lr_given = false;
  bool per_label_given = j.contains("oracle") && j.at("oracle").contains("max_per_label");
  if (j.contains("loss")) {
    const auto& loss = j.at("loss");
    require_keys(loss, "config.loss", {"kind", "d", "phi_floor", "margin", "learning_rate"});
    const std::string kind = loss.value("kind", "fstat");
    if (kind == "fstat") {
      cfg.train.loss = LossKind::kFStat;
      cfg.train.floss.d = loss.value("d", cfg.train.floss.d);
      cfg.train.floss.phi_floor = loss.value("phi_floor", cfg.train.floss.phi_floor);
      if (loss.contains("margin")) throw config_error("config.loss: 'margin' is a triplet key");
    } else if (kind == "triplet") {
      cfg.train.loss = LossKind::kTriplet;
      cfg.train.margin = loss.value("margin", cfg.train.margin);
      if (loss.contains("d") || loss.contains("phi_floor")) {
        throw config_error("config.loss: 'd'/'phi_floor' are fstat keys");
      }
    } else {
      throw config_error("config.loss: unknown kind '" + kind + "'");
    }
    if (loss.contains("learning_rate")) {
      cfg.train.learning_rate = loss.at("learning_rate").get<double>();
      lr_given = true;
    }
  }
  if (!lr_given) {
    cfg.train.learning_rate = cfg.train.loss == LossKind::kFStat ? 2e-4 : 1e-4;
  }
  if (!per_label_given && cfg.train.oracle == OracleKind::kFactor &&
      cfg.train.loss == LossKind::kFStat) {
    cfg.train.episode.max_per_label = 5;  // small per-value groups avoid underfitting
  }

  // validation metric defaults to the oracle's natural choice
  cfg.train.val_metric = cfg.train.oracle == OracleKind::kFactor
                             ? ValMetricKind::kMeanExplicitness
                             : ValMetricKind::kRecallAt1;
  if (j.contains("train")) {
    const auto& tr = j.at("train");
    require_keys(tr, "config.train",
                 {"max_epochs", "patience", "validation_metric", "val_fraction"});
    cfg.train.max_epochs = tr.value("max_epochs", cfg.train.max_epochs);
    cfg.train.patience = tr.value("patience", cfg.train.patience);
    cfg.train.val_fraction = tr.value("val_fraction", cfg.train.val_fraction);
    if (tr.contains("validation_metric")) {
      const std::string metric = tr.at("validation_metric");
      if (metric == "recall_at_1") {
        cfg.train.val_metric = ValMetricKind::kRecallAt1;
      } else if (metric == "mean_explicitness") {
        cfg.train.val_metric = ValMetricKind::kMeanExplicitness;
      } else {
        throw config_error("config.train: unknown validation_metric '" + metric + "'");
      }
    }
  }

  if (j.contains("out")) {
    const auto& out = j.at("out");
    require_keys(out, "config.out", {"model", "log"});
    cfg.out_model = out.value("model", "");
    cfg.out_log = out.value("log", "");
  }

  try {
    cfg.train.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("config.train: ") + e.what());
  }
  if (cfg.embedding_dim < 1) throw config_error("config.encoder: embedding_dim must be >= 1");
  if (cfg.train.loss == LossKind::kFStat && cfg.train.floss.d > cfg.embedding_dim) {
    throw config_error("config.loss: d exceeds the embedding dimension");
  }
  return cfg;
}

std::vector<int> class_labels_from_columns(const FactorTable& factors) {
  std::vector<int> labels(factors.n_instances(), 0);
  for (std::size_t f = 0; f < factors.n_factors(); ++f) {
    int card = 1;
    for (int v : factors.columns[f]) card = std::max(card, v + 1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      labels[i] = labels[i] * card + factors.columns[f][i];
    }
  }
  return labels;
}

int cmd_gen_data(const std::string& config_path, const std::string& golden,
                 const std::string& out_path, int points_per_cluster, double jitter,
                 std::uint64_t seed) {
  Rng rng(seed);
  if (!golden.empty()) {
    if (golden.size() != 1 || golden[0] < 'a' || golden[0] > 'p') {
      throw config_error("--golden expects a pattern letter in a..p");
    }
    const GoldenCode code = generate_golden_code(golden[0], points_per_cluster, jitter, rng);
    save_codes(codes_from_golden(code), out_path);
    std::cout << "golden pattern " << golden << ": " << code.size() << " points, "
              << code.factors.n_factors() << " factor(s) -> " << out_path << "\n";
    return kExitOk;
  }
  if (config_path.empty()) throw config_error("gen-data needs --config or --golden");
  const FactorSpec spec = parse_factor_spec(load_json(config_path), "spec");
  const FactorialDataset ds = generate_factorial(spec, rng);
  save_dataset(ds, out_path);
  std::cout << "dataset: " << ds.size() << " instances, " << ds.n_factors()
            << " factors (" << ds.class_relevant_factors().size() << " class-relevant), "
            << spec.observation_dim << " observation dims -> " << out_path << "\n";
  return kExitOk;
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed_override,
              const std::string& out_override) {
  ExperimentConfig cfg = parse_experiment(load_json(config_path));
  if (seed_override) {
    cfg.seed = *seed_override;
    cfg.train.seed = *seed_override;
  }
  if (!out_override.empty()) cfg.out_model = out_override;
  if (cfg.out_model.empty()) throw config_error("config.out: missing model path");

  const FactorialDataset dataset = load_dataset(cfg.dataset_path);
  std::vector<int> layers;
  layers.push_back(dataset.spec.observation_dim);
  layers.insert(layers.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  layers.push_back(cfg.embedding_dim);

  Rng root(cfg.seed);
  Rng init_rng = root.child(0);
  const EncoderModel initial = EncoderModel::init(layers, init_rng);

  const TrainResult result = train(initial, dataset, cfg.train);
  save_model(result.model, cfg.out_model);
  if (!cfg.out_log.empty()) save_train_log(result.log, cfg.out_log);

  std::cout << "trained " << result.log.size() << " epoch(s); best epoch " << result.best_epoch
            << " with validation metric " << result.best_metric << " -> " << cfg.out_model
            << "\n";
  if (!result.improved) {
    std::cout << "warning: validation metric never improved on the initial parameters\n";
  }
  return kExitOk;
}

int cmd_embed(const std::string& model_path, const std::string& data_path,
              const std::string& out_path) {
  const EncoderModel model = load_model(model_path);
  const FactorialDataset dataset = load_dataset(data_path);
  if (model.input_dim() != dataset.spec.observation_dim) {
    throw shape_error("embed: model input dim does not match the dataset");
  }
  std::vector<std::size_t> all(dataset.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  CodeTable table;
  table.dim = model.embedding_dim();
  table.codes = forward(model, gather_observations(dataset, all), all.size());
  table.factors = dataset.metric_factors();
  table.origin = model_path;
  save_codes(table, out_path);
  std::cout << "embedded " << table.size() << " instances at dim " << table.dim << " -> "
            << out_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& data_path, bool codes_direct,
             int k, const std::string& config_path, const std::string& out_path,
             const std::string& mi_csv_path) {
  if (k < 1) throw config_error("--k must be >= 1");

  CodeTable table;
  std::string subset = "all";
  if (codes_direct) {
    table = load_codes(data_path);
  } else {
    if (model_path.empty()) throw config_error("eval needs --model unless --codes-direct");
    const EncoderModel model = load_model(model_path);
    const FactorialDataset dataset = load_dataset(data_path);
    if (model.input_dim() != dataset.spec.observation_dim) {
      throw shape_error("eval: model input dim does not match the dataset");
    }
    std::vector<std::size_t> indices(dataset.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    if (!config_path.empty()) {
      // reproduce the training split and keep the held-out instances
      const ExperimentConfig cfg = parse_experiment(load_json(config_path));
      indices = split_by_conjunction(dataset, cfg.train.val_fraction, cfg.train.seed).val_indices;
      subset = "held-out";
    }
    table.dim = model.embedding_dim();
    table.codes = forward(model, gather_observations(dataset, indices), indices.size());
    table.factors = dataset.metric_factors(indices);
    table.origin = model_path;
  }

  DisentanglementReport report = evaluate_disentanglement(table.codes, table.dim, table.factors);
  const auto class_labels = class_labels_from_columns(table.factors);
  LabeledEmbeddingBatch batch(table.dim, table.codes, class_labels);
  report.recall_at_1 = recall_at_k(batch, k);
  report.metadata.emplace_back("source", table.origin.empty() ? data_path : table.origin);
  report.metadata.emplace_back("subset", subset);
  report.metadata.emplace_back("k", std::to_string(k));

  if (!out_path.empty()) save_report(report, out_path);
  if (!mi_csv_path.empty()) save_mi_csv(table.codes, table.dim, table.factors, 20, mi_csv_path);

  std::cout << "instances: " << table.size() << "\n";
  if (report.modularity) std::cout << "modularity mean: " << report.modularity->mean << "\n";
  std::cout << "explicitness mean: " << report.explicitness_mean << "\n";
  std::cout << "recall@" << k << ": " << *report.recall_at_1 << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"F-statistic embedding experiments"};
  app.require_subcommand(1);

  std::string config_path, golden, out_path, model_path, data_path, mi_csv_path;
  int points_per_cluster = 100;
  double jitter = 0.0;
  std::uint64_t seed = 0;
  bool codes_direct = false;
  int k = 1;

  auto* gen = app.add_subcommand("gen-data", "generate a factorial dataset or a golden code");
  gen->add_option("--config", config_path, "factor spec JSON");
  gen->add_option("--golden", golden, "golden pattern letter a..p");
  gen->add_option("--out", out_path, "output path")->required();
  gen->add_option("--points-per-cluster", points_per_cluster, "golden points per cluster");
  gen->add_option("--jitter", jitter, "extra jitter sd for golden codes");
  gen->add_option("--seed", seed, "RNG seed");

  auto* tr = app.add_subcommand("train", "train an encoder per the experiment config");
  tr->add_option("--config", config_path, "experiment config JSON")->required();
  auto* tr_seed = tr->add_option("--seed", seed, "override the config seed");
  tr->add_option("--out", out_path, "override the model output path");

  auto* em = app.add_subcommand("embed", "embed a dataset with a trained model");
  em->add_option("--model", model_path, "model JSON")->required();
  em->add_option("--data", data_path, "dataset file")->required();
  em->add_option("--out", out_path, "codes output path")->required();

  auto* ev = app.add_subcommand("eval", "evaluate recall and disentanglement");
  ev->add_option("--model", model_path, "model JSON");
  ev->add_option("--data", data_path, "dataset file, or codes file with --codes-direct")
      ->required();
  ev->add_flag("--codes-direct", codes_direct, "treat --data as a codes file");
  ev->add_option("--k", k, "recall@k neighborhood size");
  ev->add_option("--config", config_path, "experiment config, evaluates the held-out split");
  ev->add_option("--out", out_path, "report JSON path");
  ev->add_option("--mi-csv", mi_csv_path, "write (dimension, factor, MI) CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen_data(config_path, golden, out_path, points_per_cluster, jitter, seed);
    }
    if (tr->parsed()) {
      return cmd_train(config_path,
                       tr_seed->count() > 0 ? std::optional<std::uint64_t>(seed) : std::nullopt,
                       out_path);
    }
    if (em->parsed()) return cmd_embed(model_path, data_path, out_path);
    if (ev->parsed()) {
      return cmd_eval(model_path, data_path, codes_direct, k, config_path, out_path, mi_csv_path);
    }
  } catch (const train_error& e) {
    std::cerr << "training failure: " << e.what() << "\n";
    return kExitTrainFailure;
  } catch (const shape_error& e) {
    std::cerr << "incompatible inputs: " << e.what() << "\n";
    return kExitIncompatible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fse
