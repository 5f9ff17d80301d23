#include "gownet/layers.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "gownet/errors.hpp"

namespace gownet::layers {

ad::TensorId gcn_forward(ad::Tape& tape, const NormalizedAdjacency& a_norm, ad::TensorId x,
                         const GcnParamIds& params) {
  if (a_norm.n() != tape.value(x).rows())
    throw ShapeError("gcn_forward: adjacency size != feature rows");
  const ad::TensorId a = tape.constant(a_norm.data);
  const ad::TensorId agg = tape.matmul(a, x);
  const ad::TensorId lin = tape.add_row_vector(tape.matmul(agg, params.W), params.b);
  return tape.relu(lin);
}

ad::TensorId gpool_scores(ad::Tape& tape, ad::TensorId x, ad::TensorId p) {
  if (tape.value(p).cols() != 1 || tape.value(p).rows() != tape.value(x).cols())
    throw ShapeError("gpool_scores: projection vector length != channels");
  return tape.abs(tape.matmul(x, p));
}

std::vector<double> ranking_scores(const Matrix& y, const std::vector<bool>& mask) {
  if (mask.size() != y.rows()) throw ShapeError("ranking_scores: mask size mismatch");
  std::vector<double> out(y.rows());
  for (std::size_t i = 0; i < y.rows(); ++i)
    out[i] = mask[i] ? y(i, 0) : -std::numeric_limits<double>::infinity();
  return out;
}

std::vector<int> rank_topk(const std::vector<double>& y, int k) {
  const int n_finite = static_cast<int>(
      std::count_if(y.begin(), y.end(), [](double v) { return v != -std::numeric_limits<double>::infinity(); }));
  if (k < 1 || k > n_finite)
    throw ConfigError("rank_topk: k = " + std::to_string(k) + " out of range [1, " +
                      std::to_string(n_finite) + "]");
  std::vector<int> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return y[a] > y[b]; });  // stable => lower index wins ties
  std::vector<int> idx(order.begin(), order.begin() + k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

GPoolResult gpool_forward(ad::Tape& tape, const Adjacency& a, ad::TensorId x, ad::TensorId p,
                          int k, const std::vector<bool>& mask, bool use_gate) {
  const ad::TensorId y = gpool_scores(tape, x, p);
  const std::vector<int> idx = rank_topk(ranking_scores(tape.value(y), mask), k);

  GPoolResult out;
  out.adj = extract_subgraph(a, idx);
  out.idx = idx;
  const ad::TensorId gathered = tape.gather_rows(x, idx);
  if (use_gate) {
    const ad::TensorId gate = tape.tanh(tape.gather_rows(y, idx));
    out.x = tape.rowwise_scale(gathered, gate);
  } else {
    out.x = gathered;
  }
  return out;
}

ad::TensorId hconv_forward(ad::Tape& tape, const NormalizedAdjacency& a_norm, ad::TensorId x,
                           const HConvParamIds& params) {
  const ad::TensorId conv_half =
      tape.conv1d_same(x, params.kernel, params.conv_bias, params.width);
  const ad::TensorId gcn_half = gcn_forward(tape, a_norm, x, params.gcn);
  return tape.relu(tape.concat_cols(conv_half, gcn_half));
}

}  // namespace gownet::layers
