#include "gresnet/train.hpp"

#include <chrono>
#include <fstream>
#include <stdexcept>

#include "gresnet/checkpoint.hpp"
#include "gresnet/optimizer.hpp"
#include "gresnet/rng.hpp"

namespace gresnet {

RunReport train_run(const TrainOptions& options, const MnistSplits& data,
                    const std::filesystem::path& out_dir) {
  if (options.epochs < 0)
    throw std::invalid_argument("epochs must be >= 0, got " + std::to_string(options.epochs));
  if (options.batch_size < 2)
    throw std::invalid_argument("batch_size must be >= 2 for train-mode normalization");
  if (options.opt.k_decay != 0.0 && options.net.family != Family::gresnet)
    throw std::invalid_argument("k_decay only applies to gresnet, " +
                                family_name(options.net.family) + " has no gates");

  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);

  Network net = build_network(options.net);
  AdamNesterov optimizer(options.opt);
  auto params = learnable_params(net);

  // Separate stream from the init draws, so batch order never perturbs the
  // initialization and vice versa.
  Rng shuffle_rng(options.net.seed ^ 0x9E3779B97F4A7C15ull);

  RunReport report;
  report.options = options;
  report.rng_algorithm = Rng::kAlgorithm;

  const auto metrics_path = out_dir / "metrics.csv";
  std::ofstream metrics(metrics_path);
  if (!metrics) throw std::runtime_error("cannot write " + metrics_path.string());
  metrics << metrics_csv_header() << '\n' << std::flush;

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    BatchSequence batches(data.train, options.batch_size, shuffle_rng, true);
    double loss_sum = 0.0;
    std::size_t wrong = 0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < batches.batch_count(); ++b) {
      auto [x, labels] = batches.batch(b);
      auto [logits, cache] = network_forward(net, x, Mode::train);
      const double loss = softmax_xent_forward(logits, labels).first;
      const NetworkGrads grads = network_backward(net, cache, labels);
      optimizer.step(params, grad_views(net, grads));

      loss_sum += loss * static_cast<double>(x.rows());
      seen += x.rows();
      for (std::size_t r = 0; r < logits.rows(); ++r) {
        const double* lr = logits.row(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols(); ++c)
          if (lr[c] > lr[best]) best = c;
        if (static_cast<int>(best) != labels[r]) ++wrong;
      }
    }

    EpochRow row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(seen);
    row.train_error = 100.0 * static_cast<double>(wrong) / static_cast<double>(seen);
    row.test_error = error_rate(net, data.test.images, data.test.labels);
    report.per_epoch.push_back(row);
    metrics << metrics_csv_row(row) << '\n' << std::flush;
  }

  report.final_test_error = report.per_epoch.empty()
                                ? error_rate(net, data.test.images, data.test.labels)
                                : report.per_epoch.back().test_error;
  if (options.net.family == Family::gresnet) {
    report.mean_k = mean_k(net);
    report.k_profile = k_profile(net);
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  save_checkpoint(out_dir / "checkpoint.bin", net, options.opt, report.init_scheme);
  write_report_json(out_dir / "report.json", report);
  return report;
}

}  // namespace gresnet
