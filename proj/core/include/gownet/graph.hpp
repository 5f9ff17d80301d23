#pragma once

#include <vector>

#include "gownet/matrix.hpp"

namespace gownet {

// Symmetric nonnegative adjacency matrix of an undirected graph.
// Zero diagonal until self-loops are added.
struct Adjacency {
  Matrix data;  // n x n
  std::size_t n() const { return data.rows(); }
};

// D^{-1/2} (A+I) D^{-1/2} of some adjacency; cached per graph and reused
// by every convolution layer until the graph changes at a pooling site.
struct NormalizedAdjacency {
  Matrix data;  // n x n
  std::size_t n() const { return data.rows(); }
};

// A + I. Input must be square and symmetric.
Adjacency add_self_loops(const Adjacency& a);

// Symmetric degree normalization of a self-loop-augmented adjacency.
// Throws DegenerateGraphError on a zero-degree row.
NormalizedAdjacency sym_normalize(const Adjacency& a_hat);

// Gather rows and columns idx x idx. idx must be strictly ascending and
// in range; the output keeps the relative node order of the input.
Adjacency extract_subgraph(const Adjacency& a, const std::vector<int>& idx);

// Same row/column gather on an already-normalized matrix (used when
// re-normalization after pooling is disabled).
NormalizedAdjacency extract_subgraph(const NormalizedAdjacency& a, const std::vector<int>& idx);

// add_self_loops + sym_normalize in one step.
NormalizedAdjacency normalize_graph(const Adjacency& a);

void check_ascending_indices(const std::vector<int>& idx, std::size_t n);

}  // namespace gownet
