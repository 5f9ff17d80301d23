#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gownet/errors.hpp"
#include "gownet/graph.hpp"
#include "test_util.hpp"

using namespace gownet;

namespace {

Adjacency from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Adjacency a{Matrix(rows.size(), rows.begin()->size())};
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (double v : row) a.data(i, j++) = v;
    ++i;
  }
  return a;
}

}  // namespace

TEST_CASE("add_self_loops basics") {
  CHECK(add_self_loops(from_rows({{0.0}})).data(0, 0) == 1.0);

  const Adjacency two = add_self_loops(from_rows({{0, 1}, {1, 0}}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(two.data(i, j) == 1.0);
}

TEST_CASE("add_self_loops on a path graph matches elementwise identity addition") {
  Adjacency path{Matrix(4, 4)};
  for (std::size_t i = 0; i + 1 < 4; ++i) path.data(i, i + 1) = path.data(i + 1, i) = 1.0;
  const Adjacency got = add_self_loops(path);
  // oracle: A + I elementwise
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(got.data(i, j) == path.data(i, j) + (i == j ? 1.0 : 0.0));
}

TEST_CASE("add_self_loops rejects non-square input") {
  Adjacency bad{Matrix(2, 3)};
  CHECK_THROWS_AS(add_self_loops(bad), ShapeError);
}

TEST_CASE("sym_normalize examples") {
  CHECK(sym_normalize(from_rows({{1.0}})).data(0, 0) == 1.0);

  const NormalizedAdjacency two = sym_normalize(from_rows({{1, 1}, {1, 1}}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(two.data(i, j) == doctest::Approx(0.5));

  // triangle with self-loops: all degrees 3, every entry 1/3
  Adjacency tri{Matrix(3, 3, 1.0)};
  const NormalizedAdjacency nt = sym_normalize(tri);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(nt.data(i, j) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("sym_normalize matches the dense formula on random graphs") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(8);
    Adjacency a{testutil::random_symmetric_01(n, rng)};
    const Adjacency a_hat = add_self_loops(a);
    const NormalizedAdjacency got = sym_normalize(a_hat);

    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) deg[i] += a_hat.data(i, j);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        CHECK(got.data(i, j) ==
              doctest::Approx(a_hat.data(i, j) / std::sqrt(deg[i] * deg[j])).epsilon(1e-12));
  }
}

TEST_CASE("sym_normalize rejects zero-degree rows") {
  CHECK_THROWS_AS(sym_normalize(from_rows({{0, 0}, {0, 0}})), DegenerateGraphError);
}

TEST_CASE("normalized matrix is symmetric for all symmetric inputs") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(12);
    const NormalizedAdjacency norm = normalize_graph(Adjacency{testutil::random_symmetric_01(n, rng)});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        CHECK(std::fabs(norm.data(i, j) - norm.data(j, i)) <= 1e-12);
  }
}

TEST_CASE("uniform degree graphs normalize to 1/d") {
  // complete graph on 4 nodes + self-loops: every degree 4
  Adjacency a{Matrix(4, 4, 1.0)};
  for (std::size_t i = 0; i < 4; ++i) a.data(i, i) = 0.0;
  const NormalizedAdjacency norm = normalize_graph(a);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(norm.data(i, j) == doctest::Approx(0.25));
}

TEST_CASE("extract_subgraph examples") {
  const Adjacency a = from_rows({{0, 1, 0}, {1, 0, 1}, {0, 1, 0}});

  SUBCASE("identity selection") {
    const Adjacency got = extract_subgraph(a, {0, 1, 2});
    CHECK(got.data == a.data);
  }
  SUBCASE("row/column gather") {
    const Adjacency got = extract_subgraph(a, {0, 2});
    CHECK(got.n() == 2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) CHECK(got.data(i, j) == 0.0);
  }
  SUBCASE("single node") {
    const Adjacency got = extract_subgraph(from_rows({{1, 1}, {1, 1}}), {1});
    CHECK(got.n() == 1);
    CHECK(got.data(0, 0) == 1.0);
  }
  SUBCASE("bad indices") {
    CHECK_THROWS_AS(extract_subgraph(a, {0, 0}), IndexError);
    CHECK_THROWS_AS(extract_subgraph(a, {2, 0}), IndexError);
    CHECK_THROWS_AS(extract_subgraph(a, {0, 3}), IndexError);
  }
}

TEST_CASE("extract_subgraph preserves symmetry and relative order") {
  Rng rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + rng.uniform_int(10);
    Adjacency a{testutil::random_symmetric_01(n, rng)};
    std::vector<int> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.bernoulli(0.6)) idx.push_back(static_cast<int>(i));
    if (idx.empty()) idx.push_back(0);

    const Adjacency sub = extract_subgraph(a, idx);
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t s = 0; s < idx.size(); ++s) {
        CHECK(sub.data(r, s) == sub.data(s, r));
        CHECK(sub.data(r, s) == a.data(static_cast<std::size_t>(idx[r]),
                                       static_cast<std::size_t>(idx[s])));
      }
  }
}
