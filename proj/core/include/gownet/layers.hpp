#pragma once

#include <vector>

#include "gownet/autodiff.hpp"
#include "gownet/graph.hpp"

namespace gownet::layers {

// Tape handles for one GCN layer's trainables.
struct GcnParamIds {
  ad::TensorId W;  // c_in x c_out
  ad::TensorId b;  // 1 x c_out
};

// gPool projection vector.
struct GPoolParamIds {
  ad::TensorId p;  // c x 1
};

// Conv half + GCN half, each producing c_out / 2 channels.
struct HConvParamIds {
  GcnParamIds gcn;
  ad::TensorId kernel;     // (width * c_in) x (c_out / 2)
  ad::TensorId conv_bias;  // 1 x (c_out / 2)
  std::size_t width = 3;
};

// relu(a_norm * X * W + b). Node count unchanged.
ad::TensorId gcn_forward(ad::Tape& tape, const NormalizedAdjacency& a_norm, ad::TensorId x,
                         const GcnParamIds& params);

// y = |X p| as an n x 1 tensor. Padded rows still carry their |x.p|
// value here; masking happens at ranking time (see ranking_scores).
ad::TensorId gpool_scores(ad::Tape& tape, ad::TensorId x, ad::TensorId p);

// Score vector with masked entries forced to -inf, for rank_topk.
std::vector<double> ranking_scores(const Matrix& y, const std::vector<bool>& mask);

// Indices of the k largest scores, ties toward the smaller index,
// returned in ascending order.
std::vector<int> rank_topk(const std::vector<double>& y, int k);

struct GPoolResult {
  Adjacency adj;    // extracted k x k sub-adjacency
  ad::TensorId x;   // k x c gated features
  std::vector<int> idx;
};

// Complete gPool propagation: score, rank, extract, tanh-gate.
// Selection indices are constants during backward; the projection
// vector receives gradient only through the gate. `use_gate=false`
// ablates the gate (identity scaling) for trainability experiments.
GPoolResult gpool_forward(ad::Tape& tape, const Adjacency& a, ad::TensorId x, ad::TensorId p,
                          int k, const std::vector<bool>& mask, bool use_gate = true);

// relu([conv1d(X), gcn(A, X)]) with each half c_out/2 channels.
// Requires X rows in original text order.
ad::TensorId hconv_forward(ad::Tape& tape, const NormalizedAdjacency& a_norm, ad::TensorId x,
                           const HConvParamIds& params);

}  // namespace gownet::layers
