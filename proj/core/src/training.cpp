#include "gownet/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "gownet/errors.hpp"

namespace gownet {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (lr0 <= 0.0) throw ConfigError("train: learning rate must be positive");
  for (int e : decay_epochs)
    if (e < 0 || e >= epochs) throw ConfigError("train: decay epochs must lie within [0, epochs)");
}

TrainState init_train_state(const ModelParams& params) {
  TrainState state;
  for (const ParamGroup& g : params.groups) {
    state.m.emplace_back(g.value.rows(), g.value.cols());
    state.v.emplace_back(g.value.rows(), g.value.cols());
  }
  return state;
}

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) throw ConfigError("lr_at: epoch out of range");
  double lr = cfg.lr0;
  for (int e : cfg.decay_epochs)
    if (epoch >= e) lr *= cfg.decay_factor;
  return lr;
}

void adam_step(ModelParams& params, const std::vector<Matrix>& grads, TrainState& state,
               double lr, const TrainConfig& cfg) {
  if (grads.size() != params.groups.size())
    throw ShapeError("adam_step: gradient group count mismatch");
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t gi = 0; gi < grads.size(); ++gi) {
    Matrix& p = params.groups[gi].value;
    const Matrix& g = grads[gi];
    if (!p.same_shape(g)) throw ShapeError("adam_step: shape mismatch in " + params.groups[gi].name);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gv = g.data()[i];
      if (std::isnan(gv))
        throw NumericError("adam_step: NaN gradient in group " + params.groups[gi].name +
                           " at step " + std::to_string(state.step));
      double& m = state.m[gi].data()[i];
      double& v = state.v[gi].data()[i];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * gv;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * gv * gv;
      p.data()[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.epsilon);
    }
  }
}

TrainResult train(const std::vector<TextGraph>& train_set,
                  const std::vector<TextGraph>* val_set, const ModelSpec& spec,
                  const TrainConfig& cfg, const ModelParams* initial,
                  std::uint64_t initial_step) {
  cfg.validate();
  spec.validate();
  if (train_set.empty()) throw ConfigError("train: empty training set");
  for (const TextGraph& g : train_set) {
    if (g.degenerate()) throw DegenerateGraphError("train: degenerate graph in training set");
    if (g.features.cols() != spec.input_dim)
      throw ConfigError("train: graph feature dim != model input_dim");
  }

  TrainResult res;
  res.params = initial ? *initial : build(spec, cfg.seed);
  res.state = init_train_state(res.params);
  res.state.step = initial_step;
  Rng rng(cfg.seed + 1);  // shuffling + dropout stream

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<Matrix> grads;
  for (const ParamGroup& g : res.params.groups) grads.emplace_back(g.value.rows(), g.value.cols());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = lr_at(epoch, cfg);
    rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      for (Matrix& g : grads) g.fill(0.0);

      for (std::size_t bi = start; bi < end; ++bi) {
        const TextGraph& graph = train_set[order[bi]];
        ForwardResult fwd = forward(res.params, spec, graph, /*train=*/true, rng);
        const ad::TensorId loss = fwd.tape.softmax_cross_entropy(fwd.logits, {graph.label});
        loss_sum += fwd.tape.value(loss)(0, 0);

        const Matrix& logits = fwd.tape.value(fwd.logits);
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
          if (logits(0, j) > logits(0, best)) best = j;
        if (static_cast<int>(best) == graph.label) ++correct;

        fwd.tape.backward(loss);
        for (std::size_t gi = 0; gi < grads.size(); ++gi) {
          const Matrix& pg = fwd.tape.grad(fwd.param_ids[gi]);
          for (std::size_t i = 0; i < pg.size(); ++i)
            grads[gi].data()[i] += inv_batch * pg.data()[i];
        }
      }
      adam_step(res.params, grads, res.state, lr, cfg);
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.lr = lr;
    em.train_loss = loss_sum / static_cast<double>(train_set.size());
    em.train_err = 1.0 - static_cast<double>(correct) / static_cast<double>(train_set.size());
    if (val_set) em.val_err = evaluate(*val_set, res.params, spec);
    if (cfg.record_wall_time) {
      em.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    res.metrics.push_back(em);
  }
  return res;
}

double evaluate(const std::vector<TextGraph>& dataset, const ModelParams& params,
                const ModelSpec& spec) {
  if (dataset.empty()) return 0.0;
  std::size_t wrong = 0;
  for (const TextGraph& g : dataset)
    if (predict(params, spec, g) != g.label) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(dataset.size());
}

std::string metrics_to_csv(const std::vector<EpochMetrics>& metrics) {
  std::string out = "epoch,lr,train_loss,train_err,val_err,wall_seconds\n";
  char buf[256];
  for (const EpochMetrics& m : metrics) {
    if (m.val_err >= 0.0) {
      std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.3f\n", m.epoch, m.lr,
                    m.train_loss, m.train_err, m.val_err, m.wall_seconds);
    } else {
      std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,,%.3f\n", m.epoch, m.lr,
                    m.train_loss, m.train_err, m.wall_seconds);
    }
    out += buf;
  }
  return out;
}

void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& metrics) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write metrics file: " + path);
  out << metrics_to_csv(metrics);
}

}  // namespace gownet
