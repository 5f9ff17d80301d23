#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gownet/autodiff.hpp"
#include "gownet/errors.hpp"
#include "test_util.hpp"

using namespace gownet;
using ad::Tape;
using ad::TensorId;

namespace {

// Sums all entries so every primitive reduces to a scalar loss.
double sum_all(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.data()[i];
  return s;
}

TensorId reduce_sum(Tape& tape, TensorId x) {
  const Matrix& v = tape.value(x);
  Matrix ones_left(1, v.rows(), 1.0);
  Matrix ones_right(v.cols(), 1, 1.0);
  return tape.matmul(tape.matmul(tape.constant(ones_left), x), tape.constant(ones_right));
}

// Checks d(sum(f(inputs)))/d(input_k) against central differences for
// every input. `record` rebuilds the graph from fresh leaf values.
void check_gradients(std::vector<Matrix> inputs,
                     const std::function<TensorId(Tape&, const std::vector<TensorId>&)>& record,
                     double tol = 1e-4) {
  Tape tape;
  std::vector<TensorId> ids;
  for (const Matrix& m : inputs) ids.push_back(tape.param(m));
  const TensorId out = record(tape, ids);
  tape.backward(reduce_sum(tape, out));

  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto loss = [&]() {
      Tape t2;
      std::vector<TensorId> ids2;
      for (const Matrix& m : inputs) ids2.push_back(t2.param(m));
      return sum_all(t2.value(record(t2, ids2)));
    };
    const double err = testutil::max_rel_error(tape.grad(ids[k]), inputs[k], loss);
    INFO("input ", k);
    CHECK(err <= tol);
  }
}

}  // namespace

TEST_CASE("matmul forward: identity times X") {
  Rng rng(1);
  const Matrix x = testutil::random_matrix(3, 4, rng);
  Tape tape;
  const TensorId out = tape.matmul(tape.constant(Matrix::identity(3)), tape.param(x));
  CHECK(tape.value(out) == x);
}

TEST_CASE("matmul 2x2 hand case and gradient") {
  Rng rng(2);
  check_gradients({testutil::random_matrix(2, 2, rng), testutil::random_matrix(2, 2, rng)},
                  [](Tape& t, const std::vector<TensorId>& in) { return t.matmul(in[0], in[1]); });
}

TEST_CASE("grad of sum(A*B) wrt A is 1*B^T broadcast") {
  Rng rng(3);
  const Matrix a = testutil::random_matrix(2, 3, rng);
  const Matrix b = testutil::random_matrix(3, 4, rng);
  Tape tape;
  const TensorId ta = tape.param(a);
  const TensorId tb = tape.param(b);
  tape.backward(reduce_sum(tape, tape.matmul(ta, tb)));
  // d sum(AB) / dA[i][k] = sum_j B[k][j]
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 3; ++k) {
      double expect = 0.0;
      for (std::size_t j = 0; j < 4; ++j) expect += b(k, j);
      CHECK(tape.grad(ta)(i, k) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("conv1d_same: delta kernel is identity") {
  Rng rng(4);
  const Matrix x = testutil::random_matrix(1, 2, rng);
  Matrix k(3 * 2, 2);  // width 3, c_in = c_out = 2, center tap identity
  k(1 * 2 + 0, 0) = 1.0;
  k(1 * 2 + 1, 1) = 1.0;
  Tape tape;
  const TensorId out =
      tape.conv1d_same(tape.param(x), tape.constant(k), tape.constant(Matrix(1, 2)), 3);
  CHECK(tape.value(out) == x);
}

TEST_CASE("conv1d_same: direct-summation oracle on [1,2,3] with kernel [1,0,-1]") {
  Matrix x(3, 1);
  x(0, 0) = 1;
  x(1, 0) = 2;
  x(2, 0) = 3;
  Matrix k(3, 1);
  k(0, 0) = 1;
  k(1, 0) = 0;
  k(2, 0) = -1;
  Tape tape;
  const TensorId out =
      tape.conv1d_same(tape.param(x), tape.param(k), tape.constant(Matrix(1, 1)), 3);
  // out[i] = 1*x[i-1] + 0*x[i] + (-1)*x[i+1], zero padded
  CHECK(tape.value(out)(0, 0) == doctest::Approx(-2.0));
  CHECK(tape.value(out)(1, 0) == doctest::Approx(-2.0));
  CHECK(tape.value(out)(2, 0) == doctest::Approx(2.0));
}

TEST_CASE("conv1d_same gradient vs finite differences") {
  Rng rng(5);
  check_gradients({testutil::random_matrix(6, 3, rng), testutil::random_matrix(9, 4, rng),
                   testutil::random_matrix(1, 4, rng)},
                  [](Tape& t, const std::vector<TensorId>& in) {
                    return t.conv1d_same(in[0], in[1], in[2], 3);
                  },
                  1e-5);
}

TEST_CASE("conv1d_same rejects even widths") {
  Tape tape;
  const TensorId x = tape.constant(Matrix(2, 1));
  CHECK_THROWS_AS(
      tape.conv1d_same(x, tape.constant(Matrix(2, 1)), tape.constant(Matrix(1, 1)), 2),
      ConfigError);
}

TEST_CASE("abs values and subgradient at zero") {
  Matrix x(1, 3);
  x(0, 0) = 0.0;
  x(0, 1) = -2.0;
  x(0, 2) = 1.5;
  Tape tape;
  const TensorId tx = tape.param(x);
  const TensorId out = tape.abs(tx);
  CHECK(tape.value(out)(0, 0) == 0.0);
  CHECK(tape.value(out)(0, 1) == 2.0);
  tape.backward(reduce_sum(tape, out));
  CHECK(tape.grad(tx)(0, 0) == 0.0);  // subgradient 0 at 0
  CHECK(tape.grad(tx)(0, 1) == -1.0);
  CHECK(tape.grad(tx)(0, 2) == 1.0);
}

TEST_CASE("abs gradient away from zero") {
  Rng rng(6);
  Matrix x = testutil::random_matrix(3, 3, rng);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::fabs(x.data()[i]) < 0.1) x.data()[i] += 0.2;  // keep clear of the kink
  check_gradients({x}, [](Tape& t, const std::vector<TensorId>& in) { return t.abs(in[0]); });
}

TEST_CASE("tanh and relu basics") {
  Matrix x(1, 2);
  x(0, 0) = 0.0;
  x(0, 1) = -1.0;
  Tape tape;
  const TensorId tx = tape.param(x);
  const TensorId th = tape.tanh(tx);
  const TensorId rl = tape.relu(tx);
  CHECK(tape.value(th)(0, 0) == 0.0);
  CHECK(tape.value(rl)(0, 1) == 0.0);
  tape.backward(reduce_sum(tape, rl));
  CHECK(tape.grad(tx)(0, 1) == 0.0);  // relu grad 0 below zero
}

TEST_CASE("tanh and relu finite-difference agreement") {
  Rng rng(7);
  Matrix x = testutil::random_matrix(4, 3, rng);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::fabs(x.data()[i]) < 0.1) x.data()[i] += 0.2;
  check_gradients({x}, [](Tape& t, const std::vector<TensorId>& in) { return t.tanh(in[0]); });
  check_gradients({x}, [](Tape& t, const std::vector<TensorId>& in) { return t.relu(in[0]); });
}

TEST_CASE("concat_cols shapes and gradient routing") {
  Rng rng(8);
  const Matrix a = testutil::random_matrix(3, 2, rng);
  const Matrix b = testutil::random_matrix(3, 4, rng);
  Tape tape;
  const TensorId out = tape.concat_cols(tape.param(a), tape.param(b));
  CHECK(tape.value(out).rows() == 3);
  CHECK(tape.value(out).cols() == 6);
  check_gradients({a, b},
                  [](Tape& t, const std::vector<TensorId>& in) { return t.concat_cols(in[0], in[1]); });
}

TEST_CASE("gather_rows identity, precondition, and scatter gradient") {
  Rng rng(9);
  const Matrix x = testutil::random_matrix(4, 3, rng);
  Tape tape;
  const TensorId tx = tape.param(x);
  CHECK(tape.value(tape.gather_rows(tx, {0, 1, 2, 3})) == x);
  CHECK_THROWS_AS(tape.gather_rows(tx, {2, 0}), IndexError);

  check_gradients({x}, [](Tape& t, const std::vector<TensorId>& in) {
    return t.gather_rows(in[0], {1, 3});
  });
}

TEST_CASE("rowwise_scale examples and gradient") {
  Rng rng(10);
  const Matrix x = testutil::random_matrix(3, 4, rng);
  Tape tape;
  const TensorId out = tape.rowwise_scale(tape.param(x), tape.constant(Matrix(3, 1, 1.0)));
  CHECK(tape.value(out) == x);  // all-ones gate

  Matrix x1(1, 2);
  x1(0, 0) = 3.0;
  x1(0, 1) = -1.0;
  Matrix g1(1, 1);
  g1(0, 0) = 2.0;
  Tape t1;
  const TensorId o1 = t1.rowwise_scale(t1.param(x1), t1.param(g1));
  CHECK(t1.value(o1)(0, 0) == 6.0);
  CHECK(t1.value(o1)(0, 1) == -2.0);

  check_gradients({x, testutil::random_matrix(3, 1, rng)},
                  [](Tape& t, const std::vector<TensorId>& in) {
                    return t.rowwise_scale(in[0], in[1]);
                  });
}

TEST_CASE("masked_global_max_pool values, tie-break, gradient") {
  Matrix x(2, 2);
  x(0, 0) = 1;
  x(0, 1) = 5;
  x(1, 0) = 3;
  x(1, 1) = 2;
  Tape tape;
  const TensorId tx = tape.param(x);
  const TensorId out = tape.masked_global_max_pool(tx, {true, true});
  CHECK(tape.value(out)(0, 0) == 3.0);
  CHECK(tape.value(out)(0, 1) == 5.0);
  tape.backward(reduce_sum(tape, out));
  CHECK(tape.grad(tx)(1, 0) == 1.0);  // one-hot per column
  CHECK(tape.grad(tx)(0, 1) == 1.0);
  CHECK(tape.grad(tx)(0, 0) == 0.0);
  CHECK(tape.grad(tx)(1, 1) == 0.0);

  SUBCASE("single real row") {
    Tape t2;
    const TensorId o2 = t2.masked_global_max_pool(t2.constant(x), {false, true});
    CHECK(t2.value(o2)(0, 0) == 3.0);
    CHECK(t2.value(o2)(0, 1) == 2.0);
  }
  SUBCASE("all masked rejected") {
    Tape t3;
    CHECK_THROWS_AS(t3.masked_global_max_pool(t3.constant(x), {false, false}),
                    DegenerateGraphError);
  }
  SUBCASE("finite differences away from ties") {
    Rng rng(12);
    Matrix xr = testutil::random_matrix(5, 3, rng);
    check_gradients({xr}, [](Tape& t, const std::vector<TensorId>& in) {
      return t.masked_global_max_pool(in[0], {true, true, true, true, true});
    });
  }
}

TEST_CASE("dropout identity modes and kept fraction") {
  Rng rng(13);
  const Matrix x = testutil::random_matrix(2, 3, rng);
  Tape tape;
  const TensorId tx = tape.param(x);
  CHECK(tape.dropout(tx, 0.55, rng, false) == tx);  // eval mode
  CHECK(tape.dropout(tx, 1.0, rng, true) == tx);    // keep = 1

  // Monte-Carlo: kept fraction near the keep rate over 10^4 units.
  Matrix big(100, 100, 1.0);
  Tape t2;
  const TensorId out = t2.dropout(t2.constant(big), 0.55, rng, true);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < t2.value(out).size(); ++i)
    if (t2.value(out).data()[i] != 0.0) ++kept;
  const double frac = static_cast<double>(kept) / 1e4;
  CHECK(frac > 0.50);
  CHECK(frac < 0.60);
  // inverted scaling: surviving units are x / keep
  for (std::size_t i = 0; i < t2.value(out).size(); ++i) {
    const double v = t2.value(out).data()[i];
    if (v != 0.0) CHECK(v == doctest::Approx(1.0 / 0.55));
  }
}

TEST_CASE("softmax_cross_entropy values and gradient") {
  SUBCASE("uniform logits, 2 classes -> ln 2") {
    Tape tape;
    const TensorId loss = tape.softmax_cross_entropy(tape.constant(Matrix(1, 2)), {0});
    CHECK(tape.value(loss)(0, 0) == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("confident logits -> loss near 0") {
    Matrix logits(1, 3);
    logits(0, 1) = 50.0;
    Tape tape;
    const TensorId loss = tape.softmax_cross_entropy(tape.constant(logits), {1});
    CHECK(tape.value(loss)(0, 0) < 1e-12);
  }
  SUBCASE("finite differences") {
    Rng rng(14);
    Matrix logits = testutil::random_matrix(4, 3, rng);
    Tape tape;
    const TensorId tl = tape.param(logits);
    const TensorId loss = tape.softmax_cross_entropy(tl, {0, 2, 1, 1});
    tape.backward(loss);
    auto f = [&]() {
      Tape t2;
      return t2.value(t2.softmax_cross_entropy(t2.param(logits), {0, 2, 1, 1}))(0, 0);
    };
    CHECK(testutil::max_rel_error(tape.grad(tl), logits, f) <= 1e-4);
  }
}

TEST_CASE("backward: chained matmuls match hand-derived gradients") {
  // loss = sum(A * B * C); dB = A^T * ones * C^T
  Rng rng(15);
  const Matrix a = testutil::random_matrix(2, 3, rng);
  const Matrix b = testutil::random_matrix(3, 2, rng);
  const Matrix c = testutil::random_matrix(2, 2, rng);
  Tape tape;
  const TensorId tb = tape.param(b);
  tape.backward(
      reduce_sum(tape, tape.matmul(tape.matmul(tape.constant(a), tb), tape.constant(c))));

  const Matrix expected =
      Matrix::matmul(Matrix::matmul(a.transpose(), Matrix(2, 2, 1.0)), c.transpose());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(tape.grad(tb).data()[i] == doctest::Approx(expected.data()[i]).epsilon(1e-12));
}

TEST_CASE("unreachable tensors keep zero gradient") {
  Tape tape;
  const TensorId used = tape.param(Matrix(1, 1, 2.0));
  const TensorId unused = tape.param(Matrix(1, 1, 5.0));
  tape.backward(tape.scale(used, 3.0));
  CHECK(tape.grad(unused)(0, 0) == 0.0);
}

TEST_CASE("double backward is rejected") {
  Tape tape;
  const TensorId x = tape.param(Matrix(1, 1, 1.0));
  const TensorId y = tape.scale(x, 2.0);
  tape.backward(y);
  CHECK_THROWS(tape.backward(y));
}

TEST_CASE("gradient accumulation: a tensor used twice sums both paths") {
  const Matrix x(1, 1, 3.0);
  Tape tape;
  const TensorId tx = tape.param(x);
  // loss = x*x via two uses of the same leaf
  tape.backward(tape.matmul(tx, tx));
  CHECK(tape.grad(tx)(0, 0) == doctest::Approx(6.0));  // 2x

  // single-path runs for comparison
  Tape t1;
  const TensorId a = t1.param(x);
  t1.backward(t1.matmul(a, t1.constant(x)));
  Tape t2;
  const TensorId b = t2.param(x);
  t2.backward(t2.matmul(t2.constant(x), b));
  CHECK(tape.grad(tx)(0, 0) ==
        doctest::Approx(t1.grad(a)(0, 0) + t2.grad(b)(0, 0)).epsilon(1e-12));
}

TEST_CASE("forward determinism under a fixed seed") {
  auto run = [] {
    Rng rng(99);
    Tape tape;
    const TensorId x = tape.constant(testutil::random_matrix(4, 4, rng));
    return tape.value(tape.dropout(x, 0.5, rng, true));
  };
  CHECK(run() == run());
}
