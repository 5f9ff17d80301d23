#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gownet/autodiff.hpp"
#include "gownet/layers.hpp"
#include "gownet/rng.hpp"
#include "gownet/text2graph.hpp"

namespace gownet {

enum class Arch { gcn_net, gcn_gpool_net, hconv_net, hconv_gpool_net };

Arch arch_from_string(const std::string& s);
std::string arch_to_string(Arch a);

struct ModelSpec {
  Arch arch = Arch::gcn_net;
  std::vector<std::size_t> channels{1024, 1024, 512, 256};
  std::size_t kernel_width = 3;
  std::size_t n_classes = 2;
  std::size_t input_dim = 0;  // embed_dim + max_nodes
  double dropout_keep = 0.55;
  bool renormalize_after_pool = true;

  bool uses_gpool() const { return arch == Arch::gcn_gpool_net || arch == Arch::hconv_gpool_net; }
  bool uses_hconv() const { return arch == Arch::hconv_net || arch == Arch::hconv_gpool_net; }

  // Readout concatenates the global max-pools of layers 2..4.
  std::size_t readout_dim() const { return channels[1] + channels[2] + channels[3]; }

  void validate() const;
};

struct ParamGroup {
  std::string name;
  Matrix value;
};

// Trainable parameters in a fixed, deterministic group order.
struct ModelParams {
  std::vector<ParamGroup> groups;

  const Matrix& at(const std::string& name) const;
  Matrix& at(const std::string& name);
  std::size_t total_size() const;
};

// Initializes parameters: uniform(-s, s), s = sqrt(6 / (fan_in + fan_out)),
// for weight matrices and kernels; zeros for biases; uniform(-0.1, 0.1)
// for projection vectors. Deterministic under the seed.
ModelParams build(const ModelSpec& spec, std::uint64_t seed);

struct ForwardResult {
  ad::Tape tape;
  ad::TensorId logits = 0;                // 1 x n_classes
  std::vector<ad::TensorId> param_ids;    // aligned with params.groups
};

// Runs the 4 feature layers (pooling after layers 2 and 3 for gPool
// variants), the layer-2..4 max-pool readout, dropout, and the dense
// classifier. Rejects degenerate (0-real-node) graphs.
// use_gate=false ablates the gPool gate for trainability experiments.
ForwardResult forward(const ModelParams& params, const ModelSpec& spec, const TextGraph& graph,
                      bool train, Rng& rng, bool use_gate = true);

int predict(const ModelParams& params, const ModelSpec& spec, const TextGraph& graph);

struct ParamCountEntry {
  std::string name;
  std::size_t count;
};

struct ParamCounts {
  std::vector<ParamCountEntry> groups;
  std::size_t total = 0;
  std::size_t gpool_overhead = 0;  // sum of projection-vector lengths
};

ParamCounts param_count(const ModelParams& params);

// --- checkpoint file (JSON container, version 1) ---
// spec + named float32 row-major little-endian parameter blobs (base64),
// plus the RNG seed and training step.

struct Checkpoint {
  ModelSpec spec;
  ModelParams params;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace gownet
