#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fstat/encoder.hpp"
#include "fstat/floss.hpp"
#include "fstat/metrics.hpp"
#include "fstat/rng.hpp"
#include "fstat/sampling.hpp"
#include "fstat/specfun.hpp"
#include "fstat/synthdata.hpp"
#include "fstat/train.hpp"
#include "fstat/triplet.hpp"

namespace py = pybind11;
using namespace fse;

namespace {

LabeledEmbeddingBatch make_batch(const std::vector<std::vector<double>>& rows,
                                 std::vector<int> labels) {
  return LabeledEmbeddingBatch::from_rows(rows, std::move(labels));
}

FactorRole role_from_string(const std::string& role) {
  if (role == "noise") return FactorRole::kNoise;
  if (role == "class") return FactorRole::kClassRelevant;
  throw py::value_error("factor role must be 'class' or 'noise'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "F-statistic embedding loss and disentanglement metrics";

  // special functions
  m.def("log_gamma", &log_gamma, py::arg("x"));
  m.def("log_beta", py::overload_cast<double, double>(&log_beta), py::arg("a"), py::arg("b"));
  m.def("reg_inc_beta", py::overload_cast<double, double, double>(&reg_inc_beta),
        py::arg("x"), py::arg("a"), py::arg("b"));
  m.def("reg_inc_beta_dx", py::overload_cast<double, double, double>(&reg_inc_beta_dx),
        py::arg("x"), py::arg("a"), py::arg("b"));
  m.def("f_cdf", &f_cdf, py::arg("s"), py::arg("d1"), py::arg("d2"));

  // batches and the losses
  py::class_<LabeledEmbeddingBatch>(m, "LabeledEmbeddingBatch")
      .def(py::init(&make_batch), py::arg("rows"), py::arg("labels"))
      .def_readonly("dim", &LabeledEmbeddingBatch::dim)
      .def_readonly("embeddings", &LabeledEmbeddingBatch::embeddings)
      .def_readonly("labels", &LabeledEmbeddingBatch::labels)
      .def("__len__", &LabeledEmbeddingBatch::size);

  py::class_<FLossConfig>(m, "FLossConfig")
      .def(py::init<>())
      .def_readwrite("d", &FLossConfig::d)
      .def_readwrite("phi_floor", &FLossConfig::phi_floor);

  py::class_<SeparationTable::PairRow>(m, "SeparationPair")
      .def_readonly("label_a", &SeparationTable::PairRow::label_a)
      .def_readonly("label_b", &SeparationTable::PairRow::label_b)
      .def_readonly("n_tilde", &SeparationTable::PairRow::n_tilde)
      .def_readonly("s", &SeparationTable::PairRow::s)
      .def_readonly("phi", &SeparationTable::PairRow::phi);

  py::class_<SeparationTable>(m, "SeparationTable")
      .def_readonly("dim", &SeparationTable::dim)
      .def_readonly("pairs", &SeparationTable::pairs);

  m.def("f_statistic_per_dim", &f_statistic_per_dim, py::arg("batch"), py::arg("alpha"),
        py::arg("beta"), py::arg("k"));
  m.def("separation_probability", &separation_probability, py::arg("s"), py::arg("n_tilde"));
  m.def("build_separation_table", &build_separation_table, py::arg("batch"));
  m.def(
      "select_dimensions",
      [](const std::vector<double>& phi, int d) { return select_dimensions(phi, d); },
      py::arg("phi_row"), py::arg("d"));
  m.def("f_loss", &f_loss, py::arg("batch"), py::arg("config") = FLossConfig{});
  m.def("f_loss_grad", &f_loss_grad, py::arg("batch"), py::arg("config") = FLossConfig{});
  m.def("triplet_loss", &triplet_loss, py::arg("batch"), py::arg("margin") = 0.1);
  m.def("triplet_loss_grad", &triplet_loss_grad, py::arg("batch"), py::arg("margin") = 0.1);

  // synthetic data
  py::class_<FactorialDataset>(m, "FactorialDataset")
      .def_readonly("observations", &FactorialDataset::observations)
      .def_readonly("factor_values", &FactorialDataset::factor_values)
      .def_property_readonly("observation_dim",
                             [](const FactorialDataset& d) { return d.spec.observation_dim; })
      .def("__len__", &FactorialDataset::size)
      .def("value", &FactorialDataset::value, py::arg("instance"), py::arg("factor"));

  m.def(
      "generate_factorial",
      [](const std::vector<std::tuple<std::string, int, std::string>>& factors,
         int instances_per_combination, int observation_dim, double observation_noise_sd,
         std::uint64_t mixing_seed, std::uint64_t seed) {
        FactorSpec spec;
        for (const auto& [name, values, role] : factors) {
          spec.factors.push_back({name, values, role_from_string(role)});
        }
        spec.instances_per_combination = instances_per_combination;
        spec.observation_dim = observation_dim;
        spec.observation_noise_sd = observation_noise_sd;
        spec.mixing_seed = mixing_seed;
        Rng rng(seed);
        return generate_factorial(spec, rng);
      },
      py::arg("factors"), py::arg("instances_per_combination"), py::arg("observation_dim"),
      py::arg("observation_noise_sd") = 0.0, py::arg("mixing_seed") = 0, py::arg("seed") = 0);

  py::class_<GoldenCode>(m, "GoldenCode")
      .def_readonly("pattern", &GoldenCode::pattern)
      .def_readonly("points", &GoldenCode::points)
      .def_readonly("flag_modular", &GoldenCode::flag_modular)
      .def_readonly("flag_explicit", &GoldenCode::flag_explicit)
      .def_readonly("entangled_factor", &GoldenCode::entangled_factor)
      .def_property_readonly("factor_names",
                             [](const GoldenCode& g) { return g.factors.names; })
      .def_property_readonly("factor_columns",
                             [](const GoldenCode& g) { return g.factors.columns; })
      .def("__len__", &GoldenCode::size);

  m.def(
      "generate_golden_code",
      [](const std::string& pattern, int points_per_cluster, double jitter_sd,
         std::uint64_t seed) {
        if (pattern.size() != 1) throw py::value_error("pattern must be a single letter a..p");
        Rng rng(seed);
        return generate_golden_code(pattern[0], points_per_cluster, jitter_sd, rng);
      },
      py::arg("pattern"), py::arg("points_per_cluster") = 100, py::arg("jitter_sd") = 0.0,
      py::arg("seed") = 0);

  // sampling
  py::class_<Episode>(m, "Episode")
      .def_readonly("indices", &Episode::indices)
      .def_readonly("labels", &Episode::labels)
      .def_readonly("factor_index", &Episode::factor_index)
      .def("__len__", &Episode::size);

  m.def("conjunction_labels", &conjunction_labels, py::arg("dataset"));
  m.def(
      "sample_class_episode",
      [](const FactorialDataset& ds, int max_labels, int max_per_label, std::uint64_t seed) {
        Rng rng(seed);
        return sample_class_episode(ds, max_labels, max_per_label, rng);
      },
      py::arg("dataset"), py::arg("max_labels") = 12, py::arg("max_per_label") = 10,
      py::arg("seed") = 0);
  m.def(
      "sample_factor_episode",
      [](const FactorialDataset& ds, int cycle_position, int max_values, int max_per_value,
         std::uint64_t seed) {
        Rng rng(seed);
        return sample_factor_episode(ds, cycle_position, max_values, max_per_value, rng);
      },
      py::arg("dataset"), py::arg("cycle_position"), py::arg("max_values") = 12,
      py::arg("max_per_value") = 5, py::arg("seed") = 0);

  // encoder and training
  py::class_<EncoderModel>(m, "EncoderModel")
      .def_static(
          "init",
          [](std::vector<int> layer_sizes, std::uint64_t seed) {
            Rng rng(seed);
            return EncoderModel::init(std::move(layer_sizes), rng);
          },
          py::arg("layer_sizes"), py::arg("seed") = 0)
      .def_readonly("layer_sizes", &EncoderModel::layer_sizes)
      .def_readwrite("weights", &EncoderModel::weights)
      .def_readwrite("biases", &EncoderModel::biases)
      .def_property_readonly("input_dim", &EncoderModel::input_dim)
      .def_property_readonly("embedding_dim", &EncoderModel::embedding_dim);

  m.def(
      "forward",
      [](const EncoderModel& model, const std::vector<double>& inputs, std::size_t n) {
        return forward(model, inputs, n);
      },
      py::arg("model"), py::arg("inputs"), py::arg("n"));

  py::class_<AdamState>(m, "AdamState")
      .def_static("init", &AdamState::init, py::arg("model"), py::arg("learning_rate"))
      .def_readonly("step", &AdamState::step)
      .def_readwrite("learning_rate", &AdamState::learning_rate);

  m.def(
      "adam_step",
      [](EncoderModel& model, const std::vector<std::vector<double>>& weight_grads,
         const std::vector<std::vector<double>>& bias_grads, AdamState& state) {
        ParamGrads grads{weight_grads, bias_grads};
        adam_step(model, grads, state);
      },
      py::arg("model"), py::arg("weight_grads"), py::arg("bias_grads"), py::arg("state"));

  py::enum_<LossKind>(m, "LossKind")
      .value("fstat", LossKind::kFStat)
      .value("triplet", LossKind::kTriplet);
  py::enum_<OracleKind>(m, "OracleKind")
      .value("conjunction", OracleKind::kConjunction)
      .value("factor", OracleKind::kFactor);
  py::enum_<ValMetricKind>(m, "ValMetricKind")
      .value("recall_at_1", ValMetricKind::kRecallAt1)
      .value("mean_explicitness", ValMetricKind::kMeanExplicitness);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("loss", &TrainConfig::loss)
      .def_readwrite("floss", &TrainConfig::floss)
      .def_readwrite("margin", &TrainConfig::margin)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("oracle", &TrainConfig::oracle)
      .def_readwrite("val_metric", &TrainConfig::val_metric)
      .def_readwrite("max_epochs", &TrainConfig::max_epochs)
      .def_readwrite("patience", &TrainConfig::patience)
      .def_readwrite("val_fraction", &TrainConfig::val_fraction)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<EpochStats>(m, "EpochStats")
      .def_readonly("epoch", &EpochStats::epoch)
      .def_readonly("train_loss", &EpochStats::train_loss)
      .def_readonly("val_metric", &EpochStats::val_metric)
      .def_readonly("min_selected_phi", &EpochStats::min_selected_phi)
      .def_readonly("grad_max_norm", &EpochStats::grad_max_norm);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("model", &TrainResult::model)
      .def_readonly("log", &TrainResult::log)
      .def_readonly("best_epoch", &TrainResult::best_epoch)
      .def_readonly("best_metric", &TrainResult::best_metric)
      .def_readonly("improved", &TrainResult::improved)
      .def_readonly("train_indices", &TrainResult::train_indices)
      .def_readonly("val_indices", &TrainResult::val_indices);

  m.def("train", &train, py::arg("initial"), py::arg("dataset"), py::arg("config"));

  // metrics
  m.def(
      "discretize_code",
      [](const std::vector<double>& values, int bins) { return discretize_code(values, bins); },
      py::arg("values"), py::arg("bins") = 20);
  m.def(
      "mutual_information",
      [](const std::vector<int>& bins, const std::vector<int>& values) {
        return mutual_information(bins, values);
      },
      py::arg("code_bins"), py::arg("factor_values"));
  m.def(
      "modularity_score",
      [](const std::vector<std::vector<double>>& rows) {
        MutualInfoMatrix mat;
        mat.n_dims = static_cast<int>(rows.size());
        mat.n_factors = rows.empty() ? 0 : static_cast<int>(rows.front().size());
        for (const auto& row : rows) mat.m.insert(mat.m.end(), row.begin(), row.end());
        const auto scores = modularity_score(mat);
        return py::make_tuple(scores.per_dim, scores.mean);
      },
      py::arg("mi_rows"));
  m.def(
      "explicitness_auc",
      [](const std::vector<double>& codes, int dim, const std::vector<int>& values) {
        const auto res = explicitness_auc(codes, dim, values);
        std::vector<std::pair<int, double>> per_value;
        for (const auto& v : res.per_value) per_value.emplace_back(v.value, v.auc);
        return py::make_tuple(per_value, res.mean);
      },
      py::arg("codes"), py::arg("dim"), py::arg("factor_values"));
  m.def(
      "recall_at_k",
      [](const LabeledEmbeddingBatch& refs, const LabeledEmbeddingBatch& queries, int k) {
        return recall_at_k(refs, queries, k);
      },
      py::arg("references"), py::arg("queries"), py::arg("k") = 1);
  m.def(
      "recall_at_k_loo",
      [](const LabeledEmbeddingBatch& set, int k) { return recall_at_k(set, k); },
      py::arg("set"), py::arg("k") = 1);

  py::class_<DisentanglementReport>(m, "DisentanglementReport")
      .def_property_readonly("modularity_mean",
                             [](const DisentanglementReport& r) -> py::object {
                               if (!r.modularity) return py::none();
                               return py::float_(r.modularity->mean);
                             })
      .def_property_readonly("modularity_per_dim",
                             [](const DisentanglementReport& r) -> py::object {
                               if (!r.modularity) return py::none();
                               return py::cast(r.modularity->per_dim);
                             })
      .def_readonly("explicitness_mean", &DisentanglementReport::explicitness_mean)
      .def_property_readonly("explicitness_per_value", [](const DisentanglementReport& r) {
        std::vector<std::tuple<std::string, int, double>> out;
        for (const auto& v : r.explicitness_per_value) {
          out.emplace_back(v.factor, v.value, v.auc);
        }
        return out;
      });

  m.def(
      "evaluate_disentanglement",
      [](const std::vector<double>& codes, int dim, const std::vector<std::string>& names,
         const std::vector<std::vector<int>>& columns) {
        FactorTable table{names, columns};
        return evaluate_disentanglement(codes, dim, table);
      },
      py::arg("codes"), py::arg("dim"), py::arg("factor_names"), py::arg("factor_columns"));
  m.def(
      "evaluate_dataset_codes",
      [](const std::vector<double>& codes, int dim, const FactorialDataset& dataset) {
        return evaluate_disentanglement(codes, dim, dataset.metric_factors());
      },
      py::arg("codes"), py::arg("dim"), py::arg("dataset"));
}
