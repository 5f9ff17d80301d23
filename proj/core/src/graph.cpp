#include "gownet/graph.hpp"

#include <cmath>
#include <string>

#include "gownet/errors.hpp"

namespace gownet {

namespace {

void check_square(const Matrix& m, const char* op) {
  if (m.rows() != m.cols()) {
    throw ShapeError(std::string(op) + ": adjacency must be square, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

Matrix gather_square(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(idx.size(), idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t s = 0; s < idx.size(); ++s)
      out(r, s) = m(static_cast<std::size_t>(idx[r]), static_cast<std::size_t>(idx[s]));
  return out;
}

}  // namespace

void check_ascending_indices(const std::vector<int>& idx, std::size_t n) {
  int prev = -1;
  for (int i : idx) {
    if (i < 0 || static_cast<std::size_t>(i) >= n)
      throw IndexError("index " + std::to_string(i) + " out of range [0, " +
                       std::to_string(n) + ")");
    if (i <= prev)
      throw IndexError("indices must be strictly ascending");
    prev = i;
  }
}

Adjacency add_self_loops(const Adjacency& a) {
  check_square(a.data, "add_self_loops");
  Adjacency out = a;
  for (std::size_t i = 0; i < out.n(); ++i) out.data(i, i) += 1.0;
  return out;
}

NormalizedAdjacency sym_normalize(const Adjacency& a_hat) {
  check_square(a_hat.data, "sym_normalize");
  const std::size_t n = a_hat.n();
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += a_hat.data(i, j);
    if (deg <= 0.0)
      throw DegenerateGraphError("sym_normalize: zero-degree row " + std::to_string(i) +
                                 " (missing self-loop?)");
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  NormalizedAdjacency out;
  out.data = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.data(i, j) = a_hat.data(i, j) * inv_sqrt_deg[i] * inv_sqrt_deg[j];
  return out;
}

Adjacency extract_subgraph(const Adjacency& a, const std::vector<int>& idx) {
  check_square(a.data, "extract_subgraph");
  check_ascending_indices(idx, a.n());
  return Adjacency{gather_square(a.data, idx)};
}

NormalizedAdjacency extract_subgraph(const NormalizedAdjacency& a, const std::vector<int>& idx) {
  check_square(a.data, "extract_subgraph");
  check_ascending_indices(idx, a.n());
  return NormalizedAdjacency{gather_square(a.data, idx)};
}

NormalizedAdjacency normalize_graph(const Adjacency& a) {
  return sym_normalize(add_self_loops(a));
}

}  // namespace gownet
