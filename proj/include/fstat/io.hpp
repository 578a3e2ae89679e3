#pragma once

#include <string>

#include "fstat/encoder.hpp"
#include "fstat/metrics.hpp"
#include "fstat/synthdata.hpp"
#include "fstat/train.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fse {

// Dataset container: one JSON header line (format tag plus the generating
// spec), then a CSV column-header line and one row per instance
// (id, factor columns, o0..o{M-1}).
void save_dataset(const FactorialDataset& dataset, const std::string& path);
FactorialDataset load_dataset(const std::string& path);

// Code tables share the dataset container shape with z0..z{D-1} columns in
// place of observations; used for golden codes and encoder output.
struct CodeTable {
  int dim = 0;
  std::vector<double> codes;  // row-major, n x dim
  FactorTable factors;
  std::string origin;  // e.g. "golden:a" or a model path

  std::size_t size() const { return factors.n_instances(); }
};
void save_codes(const CodeTable& table, const std::string& path);
CodeTable load_codes(const std::string& path);

CodeTable codes_from_golden(const GoldenCode& golden);

// Versioned model document: layer sizes plus row-major parameter arrays.
void save_model(const EncoderModel& model, const std::string& path);
EncoderModel load_model(const std::string& path);

// CSV: epoch, train_loss, val_metric.
void save_train_log(const std::vector<EpochStats>& log, const std::string& path);

nlohmann::json report_to_json(const DisentanglementReport& report);
void save_report(const DisentanglementReport& report, const std::string& path);

// CSV of (dimension, factor, mutual information) triples for external plots.
void save_mi_csv(std::span<const double> codes, int dim, const FactorTable& factors,
                 int bins, const std::string& path);

}  // namespace fse
