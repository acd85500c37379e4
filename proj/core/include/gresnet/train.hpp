#pragma once

#include <filesystem>

#include "gresnet/data.hpp"
#include "gresnet/report.hpp"

namespace gresnet {

/// Runs one training job end to end: build from the config seed, iterate
/// epochs of shuffled batches, evaluate the test error after every epoch.
/// Writes into out_dir as it goes: metrics.csv row by row (partial runs
/// stay inspectable), then checkpoint.bin and report.json. Train loss and
/// train error are running averages over the epoch's batches, computed in
/// train mode.
RunReport train_run(const TrainOptions& options, const MnistSplits& data,
                    const std::filesystem::path& out_dir);

}  // namespace gresnet
