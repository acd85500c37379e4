#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gresnet/model.hpp"
#include "gresnet/optimizer.hpp"

namespace gresnet {

struct TrainOptions {
  NetworkConfig net;
  AdamNesterovConfig opt;
  int epochs = 100;
  std::size_t batch_size = 128;
};

struct EpochRow {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_error = 0.0;  // %, running average over the epoch's batches
  double test_error = 0.0;   // %, full test set after the epoch
};

/// The self-describing record of one training run. Everything that shaped
/// the result is embedded, so the file alone reproduces the run; output
/// paths are deliberately left out, making reports from identical
/// configurations byte-comparable (wall_time_seconds aside).
struct RunReport {
  int format_version = 1;
  TrainOptions options;
  std::string init_scheme = "he_uniform";
  std::string rng_algorithm;
  std::vector<EpochRow> per_epoch;
  double final_test_error = 0.0;
  std::optional<double> mean_k;  // gresnet only
  std::vector<std::pair<int, double>> k_profile;  // gresnet only
  double wall_time_seconds = 0.0;
};

std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);

void write_report_json(const std::filesystem::path& path, const RunReport& report);
RunReport read_report_json(const std::filesystem::path& path);

std::string metrics_csv_header();
std::string metrics_csv_row(const EpochRow& row);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace gresnet
