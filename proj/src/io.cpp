#include "fstat/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fstat/errors.hpp"

namespace fse {

using nlohmann::json;

namespace {

constexpr const char* kDatasetFormat = "fstat-embed-dataset";
constexpr const char* kCodesFormat = "fstat-embed-codes";
constexpr const char* kModelFormat = "fstat-embed-model";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

json spec_to_json(const FactorSpec& spec) {
  json factors = json::array();
  for (const auto& f : spec.factors) {
    factors.push_back({{"name", f.name},
                       {"values", f.value_count},
                       {"role", f.role == FactorRole::kNoise ? "noise" : "class"}});
  }
  return {{"factors", factors},
          {"instances_per_combination", spec.instances_per_combination},
          {"observation_dim", spec.observation_dim},
          {"observation_noise_sd", spec.observation_noise_sd},
          {"mixing_seed", spec.mixing_seed}};
}

FactorSpec spec_from_json(const json& j) {
  FactorSpec spec;
  for (const auto& f : j.at("factors")) {
    Factor factor;
    factor.name = f.at("name").get<std::string>();
    factor.value_count = f.at("values").get<int>();
    const std::string role = f.at("role").get<std::string>();
    if (role == "noise") {
      factor.role = FactorRole::kNoise;
    } else if (role == "class") {
      factor.role = FactorRole::kClassRelevant;
    } else {
      throw std::runtime_error("dataset: unknown factor role '" + role + "'");
    }
    spec.factors.push_back(std::move(factor));
  }
  spec.instances_per_combination = j.at("instances_per_combination").get<int>();
  spec.observation_dim = j.at("observation_dim").get<int>();
  spec.observation_noise_sd = j.at("observation_noise_sd").get<double>();
  spec.mixing_seed = j.at("mixing_seed").get<std::uint64_t>();
  return spec;
}

json read_header(std::ifstream& in, const char* expected_format, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  json header = json::parse(line);
  if (header.value("format", "") != expected_format) {
    throw std::runtime_error(path + ": expected format '" + expected_format + "'");
  }
  return header;
}

}  // namespace

void save_dataset(const FactorialDataset& dataset, const std::string& path) {
  auto out = open_out(path);
  json header = {{"format", kDatasetFormat}, {"version", 1}, {"spec", spec_to_json(dataset.spec)}};
  out << header.dump() << "\n";

  out << "id";
  for (const auto& f : dataset.spec.factors) out << "," << f.name;
  for (int o = 0; o < dataset.spec.observation_dim; ++o) out << ",o" << o;
  out << "\n";

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << i;
    for (int f = 0; f < dataset.n_factors(); ++f) out << "," << dataset.value(i, f);
    for (double v : dataset.observation(i)) out << "," << fmt_double(v);
    out << "\n";
  }
}

FactorialDataset load_dataset(const std::string& path) {
  auto in = open_in(path);
  const json header = read_header(in, kDatasetFormat, path);

  FactorialDataset ds;
  ds.spec = spec_from_json(header.at("spec"));

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing CSV header");
  const std::size_t n_factors = ds.spec.factors.size();
  const std::size_t expected = 1 + n_factors + static_cast<std::size_t>(ds.spec.observation_dim);
  if (split_csv(line).size() != expected) {
    throw std::runtime_error(path + ": CSV header does not match the declared factors");
  }

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != expected) throw std::runtime_error(path + ": malformed row");
    for (std::size_t f = 0; f < n_factors; ++f) {
      ds.factor_values.push_back(std::stoi(fields[1 + f]));
    }
    for (std::size_t o = 0; o < static_cast<std::size_t>(ds.spec.observation_dim); ++o) {
      ds.observations.push_back(std::stod(fields[1 + n_factors + o]));
    }
  }
  return ds;
}

void save_codes(const CodeTable& table, const std::string& path) {
  auto out = open_out(path);
  json header = {{"format", kCodesFormat},
                 {"version", 1},
                 {"factors", table.factors.names},
                 {"dim", table.dim},
                 {"origin", table.origin}};
  out << header.dump() << "\n";

  out << "id";
  for (const auto& name : table.factors.names) out << "," << name;
  for (int d = 0; d < table.dim; ++d) out << ",z" << d;
  out << "\n";

  for (std::size_t i = 0; i < table.size(); ++i) {
    out << i;
    for (const auto& col : table.factors.columns) out << "," << col[i];
    for (int d = 0; d < table.dim; ++d) {
      out << "," << fmt_double(table.codes[i * static_cast<std::size_t>(table.dim) + d]);
    }
    out << "\n";
  }
}

CodeTable load_codes(const std::string& path) {
  auto in = open_in(path);
  const json header = read_header(in, kCodesFormat, path);

  CodeTable table;
  table.dim = header.at("dim").get<int>();
  table.origin = header.value("origin", "");
  table.factors.names = header.at("factors").get<std::vector<std::string>>();
  table.factors.columns.resize(table.factors.names.size());

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing CSV header");
  const std::size_t expected = 1 + table.factors.names.size() + static_cast<std::size_t>(table.dim);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != expected) throw std::runtime_error(path + ": malformed row");
    for (std::size_t f = 0; f < table.factors.columns.size(); ++f) {
      table.factors.columns[f].push_back(std::stoi(fields[1 + f]));
    }
    for (int d = 0; d < table.dim; ++d) {
      table.codes.push_back(std::stod(fields[1 + table.factors.columns.size() + d]));
    }
  }
  return table;
}

CodeTable codes_from_golden(const GoldenCode& golden) {
  CodeTable table;
  table.dim = 2;
  table.codes = golden.points;
  table.factors = golden.factors;
  table.origin = std::string("golden:") + golden.pattern;
  return table;
}

void save_model(const EncoderModel& model, const std::string& path) {
  model.validate();
  json doc = {{"format", kModelFormat},
              {"version", 1},
              {"layer_sizes", model.layer_sizes},
              {"weights", model.weights},
              {"biases", model.biases}};
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

EncoderModel load_model(const std::string& path) {
  auto in = open_in(path);
  json doc;
  in >> doc;
  if (doc.value("format", "") != kModelFormat) {
    throw std::runtime_error(path + ": not a model file");
  }
  if (doc.at("version").get<int>() != 1) {
    throw std::runtime_error(path + ": unsupported model version");
  }
  EncoderModel model;
  model.layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
  model.weights = doc.at("weights").get<std::vector<std::vector<double>>>();
  model.biases = doc.at("biases").get<std::vector<std::vector<double>>>();
  model.validate();
  return model;
}

void save_train_log(const std::vector<EpochStats>& log, const std::string& path) {
  auto out = open_out(path);
  out << "epoch,train_loss,val_metric\n";
  for (const auto& row : log) {
    out << row.epoch << "," << fmt_double(row.train_loss) << "," << fmt_double(row.val_metric)
        << "\n";
  }
}

json report_to_json(const DisentanglementReport& report) {
  json doc;
  if (report.modularity) {
    doc["modularity"] = {{"per_dim", report.modularity->per_dim},
                         {"mean", report.modularity->mean}};
  } else {
    doc["modularity"] = nullptr;
  }
  json per_value = json::array();
  for (const auto& v : report.explicitness_per_value) {
    per_value.push_back({{"factor", v.factor}, {"value", v.value}, {"auc", v.auc}});
  }
  doc["explicitness"] = {{"per_factor_value", per_value}, {"mean", report.explicitness_mean}};
  if (report.recall_at_1) {
    doc["recall_at_1"] = *report.recall_at_1;
  } else {
    doc["recall_at_1"] = nullptr;
  }
  json metadata = json::object();
  for (const auto& [key, value] : report.metadata) metadata[key] = value;
  doc["metadata"] = metadata;
  return doc;
}

void save_report(const DisentanglementReport& report, const std::string& path) {
  auto out = open_out(path);
  out << report_to_json(report).dump(2) << "\n";
}

void save_mi_csv(std::span<const double> codes, int dim, const FactorTable& factors,
                 int bins, const std::string& path) {
  const std::size_t n = factors.n_instances();
  if (codes.size() != n * static_cast<std::size_t>(dim)) {
    throw shape_error("save_mi_csv: codes do not align with factor table");
  }
  auto out = open_out(path);
  out << "dimension,factor,mi_nats\n";
  std::vector<double> column(n);
  for (int d = 0; d < dim; ++d) {
    for (std::size_t i = 0; i < n; ++i) column[i] = codes[i * dim + d];
    const auto code_bins = discretize_code(column, bins);
    for (std::size_t f = 0; f < factors.n_factors(); ++f) {
      out << d << "," << factors.names[f] << ","
          << fmt_double(mutual_information(code_bins, factors.columns[f])) << "\n";
    }
  }
}

}  // namespace fse
