#include "gownet/autodiff.hpp"

#include <cmath>
#include <string>

#include "gownet/errors.hpp"
#include "gownet/graph.hpp"

namespace gownet::ad {

TensorId Tape::make_leaf(Matrix value) {
  values_.push_back(std::move(value));
  grads_.emplace_back(values_.back().rows(), values_.back().cols());
  backs_.emplace_back();
  return values_.size() - 1;
}

TensorId Tape::make_node(Matrix value, std::function<void()> back) {
  values_.push_back(std::move(value));
  grads_.emplace_back(values_.back().rows(), values_.back().cols());
  backs_.push_back(std::move(back));
  return values_.size() - 1;
}

TensorId Tape::matmul(TensorId a, TensorId b) {
  Matrix c = Matrix::matmul(values_[a], values_[b]);
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, a, b, out] {
    const Matrix& dc = grads_[out];
    // dA += dC * B^T
    const Matrix& bv = values_[b];
    Matrix& da = grads_[a];
    for (std::size_t i = 0; i < da.rows(); ++i)
      for (std::size_t k = 0; k < da.cols(); ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < bv.cols(); ++j) s += dc(i, j) * bv(k, j);
        da(i, k) += s;
      }
    // dB += A^T * dC
    const Matrix& av = values_[a];
    Matrix& db = grads_[b];
    for (std::size_t k = 0; k < db.rows(); ++k)
      for (std::size_t j = 0; j < db.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < av.rows(); ++i) s += av(i, k) * dc(i, j);
        db(k, j) += s;
      }
  };
  return out;
}

TensorId Tape::add(TensorId a, TensorId b) {
  if (!values_[a].same_shape(values_[b])) throw ShapeError("add: shape mismatch");
  Matrix c = values_[a];
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += values_[b].data()[i];
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, a, b, out] {
    for (std::size_t i = 0; i < grads_[out].size(); ++i) {
      grads_[a].data()[i] += grads_[out].data()[i];
      grads_[b].data()[i] += grads_[out].data()[i];
    }
  };
  return out;
}

TensorId Tape::add_row_vector(TensorId x, TensorId b) {
  const Matrix& xv = values_[x];
  const Matrix& bv = values_[b];
  if (bv.rows() != 1 || bv.cols() != xv.cols())
    throw ShapeError("add_row_vector: bias must be 1 x cols");
  Matrix c = xv;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) += bv(0, j);
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, x, b, out] {
    const Matrix& dc = grads_[out];
    for (std::size_t i = 0; i < dc.size(); ++i) grads_[x].data()[i] += dc.data()[i];
    for (std::size_t i = 0; i < dc.rows(); ++i)
      for (std::size_t j = 0; j < dc.cols(); ++j) grads_[b](0, j) += dc(i, j);
  };
  return out;
}

TensorId Tape::scale(TensorId a, double s) {
  Matrix c = values_[a];
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= s;
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, a, s, out] {
    for (std::size_t i = 0; i < grads_[out].size(); ++i)
      grads_[a].data()[i] += s * grads_[out].data()[i];
  };
  return out;
}

TensorId Tape::abs(TensorId x) {
  Matrix c = values_[x];
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = std::fabs(c.data()[i]);
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, x, out] {
    const Matrix& xv = values_[x];
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const double v = xv.data()[i];
      const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      grads_[x].data()[i] += sign * grads_[out].data()[i];
    }
  };
  return out;
}

TensorId Tape::tanh(TensorId x) {
  Matrix c = values_[x];
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = std::tanh(c.data()[i]);
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, x, out] {
    const Matrix& cv = values_[out];
    for (std::size_t i = 0; i < cv.size(); ++i) {
      const double t = cv.data()[i];
      grads_[x].data()[i] += (1.0 - t * t) * grads_[out].data()[i];
    }
  };
  return out;
}

TensorId Tape::relu(TensorId x) {
  Matrix c = values_[x];
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.data()[i] < 0.0) c.data()[i] = 0.0;
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, x, out] {
    const Matrix& xv = values_[x];
    for (std::size_t i = 0; i < xv.size(); ++i)
      if (xv.data()[i] > 0.0) grads_[x].data()[i] += grads_[out].data()[i];
  };
  return out;
}

TensorId Tape::concat_cols(TensorId a, TensorId b) {
  const Matrix& av = values_[a];
  const Matrix& bv = values_[b];
  if (av.rows() != bv.rows()) throw ShapeError("concat_cols: row counts differ");
  Matrix c(av.rows(), av.cols() + bv.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    for (std::size_t j = 0; j < av.cols(); ++j) c(i, j) = av(i, j);
    for (std::size_t j = 0; j < bv.cols(); ++j) c(i, av.cols() + j) = bv(i, j);
  }
  const std::size_t ca = av.cols();
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, a, b, ca, out] {
    const Matrix& dc = grads_[out];
    Matrix& da = grads_[a];
    Matrix& db = grads_[b];
    for (std::size_t i = 0; i < dc.rows(); ++i) {
      for (std::size_t j = 0; j < ca; ++j) da(i, j) += dc(i, j);
      for (std::size_t j = 0; j < db.cols(); ++j) db(i, j) += dc(i, ca + j);
    }
  };
  return out;
}

TensorId Tape::gather_rows(TensorId x, std::vector<int> idx) {
  const Matrix& xv = values_[x];
  check_ascending_indices(idx, xv.rows());
  Matrix c(idx.size(), xv.cols());
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t j = 0; j < xv.cols(); ++j)
      c(r, j) = xv(static_cast<std::size_t>(idx[r]), j);
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, x, idx = std::move(idx), out] {
    const Matrix& dc = grads_[out];
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t j = 0; j < dc.cols(); ++j)
        grads_[x](static_cast<std::size_t>(idx[r]), j) += dc(r, j);
  };
  return out;
}

TensorId Tape::rowwise_scale(TensorId x, TensorId g) {
  const Matrix& xv = values_[x];
  const Matrix& gv = values_[g];
  if (gv.cols() != 1 || gv.rows() != xv.rows())
    throw ShapeError("rowwise_scale: gate must be k x 1 matching rows");
  Matrix c = xv;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) *= gv(i, 0);
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, x, g, out] {
    const Matrix& dc = grads_[out];
    const Matrix& xv2 = values_[x];
    const Matrix& gv2 = values_[g];
    for (std::size_t i = 0; i < dc.rows(); ++i) {
      double gsum = 0.0;
      for (std::size_t j = 0; j < dc.cols(); ++j) {
        grads_[x](i, j) += dc(i, j) * gv2(i, 0);
        gsum += dc(i, j) * xv2(i, j);
      }
      grads_[g](i, 0) += gsum;
    }
  };
  return out;
}

TensorId Tape::masked_global_max_pool(TensorId x, const std::vector<bool>& mask) {
  const Matrix& xv = values_[x];
  if (mask.size() != xv.rows()) throw ShapeError("masked_global_max_pool: mask size mismatch");
  bool any = false;
  for (bool m : mask) any = any || m;
  if (!any) throw DegenerateGraphError("masked_global_max_pool: all rows masked");

  Matrix c(1, xv.cols());
  std::vector<std::size_t> argmax(xv.cols());
  for (std::size_t j = 0; j < xv.cols(); ++j) {
    bool first = true;
    for (std::size_t i = 0; i < xv.rows(); ++i) {
      if (!mask[i]) continue;
      if (first || xv(i, j) > c(0, j)) {  // first-index tie-break
        c(0, j) = xv(i, j);
        argmax[j] = i;
        first = false;
      }
    }
  }
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, x, argmax = std::move(argmax), out] {
    const Matrix& dc = grads_[out];
    for (std::size_t j = 0; j < dc.cols(); ++j) grads_[x](argmax[j], j) += dc(0, j);
  };
  return out;
}

TensorId Tape::conv1d_same(TensorId x, TensorId kernel, TensorId bias, std::size_t width) {
  if (width % 2 == 0) throw ConfigError("conv1d_same: kernel width must be odd");
  const Matrix& xv = values_[x];
  const Matrix& kv = values_[kernel];
  const Matrix& bv = values_[bias];
  const std::size_t n = xv.rows();
  const std::size_t c_in = xv.cols();
  const std::size_t c_out = kv.cols();
  if (kv.rows() != width * c_in) throw ShapeError("conv1d_same: kernel rows != width * c_in");
  if (bv.rows() != 1 || bv.cols() != c_out) throw ShapeError("conv1d_same: bias must be 1 x c_out");
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(width / 2);

  Matrix out_v(n, c_out);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < c_out; ++o) out_v(i, o) = bv(0, o);
    for (std::size_t d = 0; d < width; ++d) {
      const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(d) - half;
      if (r < 0 || r >= static_cast<std::ptrdiff_t>(n)) continue;  // zero padding
      for (std::size_t c = 0; c < c_in; ++c) {
        const double xr = xv(static_cast<std::size_t>(r), c);
        if (xr == 0.0) continue;
        for (std::size_t o = 0; o < c_out; ++o) out_v(i, o) += xr * kv(d * c_in + c, o);
      }
    }
  }
  TensorId out = make_node(std::move(out_v), nullptr);
  backs_[out] = [this, x, kernel, bias, width, half, out] {
    const Matrix& dc = grads_[out];
    const Matrix& xv2 = values_[x];
    const Matrix& kv2 = values_[kernel];
    const std::size_t n2 = xv2.rows();
    const std::size_t ci = xv2.cols();
    const std::size_t co = kv2.cols();
    for (std::size_t i = 0; i < n2; ++i) {
      for (std::size_t o = 0; o < co; ++o) grads_[bias](0, o) += dc(i, o);
      for (std::size_t d = 0; d < width; ++d) {
        const std::ptrdiff_t r =
            static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(d) - half;
        if (r < 0 || r >= static_cast<std::ptrdiff_t>(n2)) continue;
        for (std::size_t c = 0; c < ci; ++c) {
          for (std::size_t o = 0; o < co; ++o) {
            grads_[x](static_cast<std::size_t>(r), c) += dc(i, o) * kv2(d * ci + c, o);
            grads_[kernel](d * ci + c, o) += dc(i, o) * xv2(static_cast<std::size_t>(r), c);
          }
        }
      }
    }
  };
  return out;
}

TensorId Tape::dropout(TensorId x, double keep, Rng& rng, bool train) {
  if (keep <= 0.0 || keep > 1.0) throw ConfigError("dropout: keep rate must be in (0, 1]");
  if (!train || keep == 1.0) return x;  // identity, nothing recorded
  const Matrix& xv = values_[x];
  std::vector<double> scale(xv.size());
  const double inv_keep = 1.0 / keep;
  Matrix c = xv;
  for (std::size_t i = 0; i < c.size(); ++i) {
    scale[i] = rng.bernoulli(keep) ? inv_keep : 0.0;
    c.data()[i] *= scale[i];
  }
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, x, scale = std::move(scale), out] {
    for (std::size_t i = 0; i < scale.size(); ++i)
      grads_[x].data()[i] += scale[i] * grads_[out].data()[i];
  };
  return out;
}

TensorId Tape::softmax_cross_entropy(TensorId logits, std::vector<int> labels) {
  const Matrix& lv = values_[logits];
  const std::size_t batch = lv.rows();
  const std::size_t classes = lv.cols();
  if (labels.size() != batch) throw ShapeError("softmax_cross_entropy: label count != batch");
  for (int lab : labels)
    if (lab < 0 || static_cast<std::size_t>(lab) >= classes)
      throw IndexError("softmax_cross_entropy: label out of range");

  Matrix probs(batch, classes);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    double mx = lv(i, 0);
    for (std::size_t j = 1; j < classes; ++j) mx = std::max(mx, lv(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < classes; ++j) z += std::exp(lv(i, j) - mx);
    for (std::size_t j = 0; j < classes; ++j) probs(i, j) = std::exp(lv(i, j) - mx) / z;
    loss -= std::log(probs(i, static_cast<std::size_t>(labels[i])));
  }
  Matrix c(1, 1);
  c(0, 0) = loss / static_cast<double>(batch);
  TensorId out = make_node(std::move(c), nullptr);
  backs_[out] = [this, logits, probs = std::move(probs), labels = std::move(labels), out] {
    const double up = grads_[out](0, 0);
    const double inv_b = 1.0 / static_cast<double>(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i)
      for (std::size_t j = 0; j < probs.cols(); ++j) {
        const double onehot = (static_cast<std::size_t>(labels[i]) == j) ? 1.0 : 0.0;
        grads_[logits](i, j) += up * inv_b * (probs(i, j) - onehot);
      }
  };
  return out;
}

void Tape::backward(TensorId loss) {
  if (backward_done_)
    throw NumericError("backward: tape already differentiated (double-backward unsupported)");
  if (values_[loss].rows() != 1 || values_[loss].cols() != 1)
    throw ShapeError("backward: loss must be 1 x 1");
  backward_done_ = true;
  grads_[loss](0, 0) = 1.0;
  for (std::size_t i = loss + 1; i-- > 0;) {
    if (backs_[i]) backs_[i]();
  }
}

}  // namespace gownet::ad
