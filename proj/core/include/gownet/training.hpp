#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gownet/model.hpp"

namespace gownet {

struct TrainConfig {
  double lr0 = 0.001;
  double decay_factor = 0.1;
  std::vector<int> decay_epochs{30, 50};
  int epochs = 60;
  std::size_t batch_size = 256;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  // When false, the wall_seconds metric column is written as 0 so that
  // runs with equal seeds produce byte-identical metrics files.
  bool record_wall_time = true;

  void validate() const;
};

struct TrainState {
  std::uint64_t step = 0;
  std::vector<Matrix> m;  // first moments, aligned with params.groups
  std::vector<Matrix> v;  // second moments
};

TrainState init_train_state(const ModelParams& params);

// Piecewise-constant schedule: lr0 scaled by decay_factor once per
// passed decay epoch.
double lr_at(int epoch, const TrainConfig& cfg);

// Standard bias-corrected Adam update, in place. Throws NumericError on
// NaN gradients, naming the offending group.
void adam_step(ModelParams& params, const std::vector<Matrix>& grads, TrainState& state,
               double lr, const TrainConfig& cfg);

struct EpochMetrics {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_err = 0.0;
  double val_err = -1.0;  // negative = no validation split
  double wall_seconds = 0.0;
};

struct TrainResult {
  ModelParams params;
  TrainState state;
  std::vector<EpochMetrics> metrics;
};

// Seeded shuffled mini-batches, gradient accumulation across each batch,
// one Adam step per batch. The last partial batch is kept; its loss is
// the mean over its actual size. Pass initial params/step to resume
// from a checkpoint (moment buffers restart).
TrainResult train(const std::vector<TextGraph>& train_set,
                  const std::vector<TextGraph>* val_set, const ModelSpec& spec,
                  const TrainConfig& cfg, const ModelParams* initial = nullptr,
                  std::uint64_t initial_step = 0);

// Fraction of argmax-logit mispredictions (eval mode, deterministic).
double evaluate(const std::vector<TextGraph>& dataset, const ModelParams& params,
                const ModelSpec& spec);

std::string metrics_to_csv(const std::vector<EpochMetrics>& metrics);
void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& metrics);

}  // namespace gownet
