#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "gownet/matrix.hpp"
#include "gownet/rng.hpp"

namespace gownet::ad {

// Handle into the tape's tensor storage.
using TensorId = std::size_t;

// Reverse-mode tape over dense matrices. Records every primitive
// application in order; backward() replays the records in reverse and
// accumulates (never overwrites) gradients. Single-threaded during
// record/backward; independent tapes may run concurrently.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Leaf tensors. Both participate in backward; "constant" merely
  // signals intent (its gradient is computed and discarded by callers).
  TensorId constant(Matrix value) { return make_leaf(std::move(value)); }
  TensorId param(Matrix value) { return make_leaf(std::move(value)); }

  const Matrix& value(TensorId id) const { return values_[id]; }
  const Matrix& grad(TensorId id) const { return grads_[id]; }

  // --- differentiable primitives ---

  TensorId matmul(TensorId a, TensorId b);
  TensorId add(TensorId a, TensorId b);              // same shape
  TensorId add_row_vector(TensorId x, TensorId b);   // n x c  +  1 x c broadcast
  TensorId scale(TensorId a, double s);
  TensorId abs(TensorId x);                          // subgradient 0 at 0
  TensorId tanh(TensorId x);
  TensorId relu(TensorId x);
  TensorId concat_cols(TensorId a, TensorId b);      // n x c1, n x c2 -> n x (c1+c2)
  TensorId gather_rows(TensorId x, std::vector<int> idx);  // idx strictly ascending
  TensorId rowwise_scale(TensorId x, TensorId g);    // x: k x c, g: k x 1

  // Columnwise max over rows where mask is true; 1 x c output.
  // Gradient goes to the first argmax row per column.
  TensorId masked_global_max_pool(TensorId x, const std::vector<bool>& mask);

  // 1-D "same" convolution along the row dimension.
  // kernel: (width * c_in) x c_out, laid out kernel(d * c_in + c, o); bias: 1 x c_out.
  TensorId conv1d_same(TensorId x, TensorId kernel, TensorId bias, std::size_t width);

  // Inverted dropout: scales kept units by 1/keep at train time,
  // identity at eval or keep == 1.
  TensorId dropout(TensorId x, double keep, Rng& rng, bool train);

  // Mean cross-entropy of row-wise softmax against integer labels; 1 x 1 output.
  TensorId softmax_cross_entropy(TensorId logits, std::vector<int> labels);

  // Seeds d(loss)/d(loss) = 1 and propagates. loss must be 1 x 1.
  // A tape can be differentiated once; a second call throws.
  void backward(TensorId loss);

 private:
  TensorId make_leaf(Matrix value);
  TensorId make_node(Matrix value, std::function<void()> back);

  std::vector<Matrix> values_;
  std::vector<Matrix> grads_;
  std::vector<std::function<void()>> backs_;  // empty function for leaves
  bool backward_done_ = false;
};

}  // namespace gownet::ad
