#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "eegraph/rng.hpp"
#include "eegraph/tensor.hpp"
#include "helpers/gradcheck.hpp"

using namespace eegraph;
using testutil::gradcheck;

namespace {

Tensor randn(Shape shape, std::uint64_t seed, double scale = 1.0,
             double offset = 0.0) {
  auto rng = make_rng(seed, "test", 0);
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  std::vector<double> v(n);
  for (double& x : v) x = scale * gaussian(rng) + offset;
  return Tensor::from_vector(std::move(shape), std::move(v), true);
}

}  // namespace

TEST_CASE("factories and shape accounting") {
  Tensor z = Tensor::zeros({2, 3});
  CHECK(z.size() == 6);
  CHECK(z.shape() == Shape{2, 3});
  CHECK(z.at(1, 2) == 0.0);

  Tensor f = Tensor::full({4}, 2.5);
  CHECK(f.at(3) == 2.5);

  Tensor i3 = Tensor::identity(3);
  CHECK(i3.at(0, 0) == 1.0);
  CHECK(i3.at(0, 1) == 0.0);

  CHECK(Tensor::scalar(7.0).is_scalar());
  CHECK_THROWS(Tensor::from_vector({2, 2}, {1.0, 2.0, 3.0}));
}

TEST_CASE("relu, softmax and conv1d reference values") {
  Tensor x = Tensor::from_vector({3}, {-1.0, 0.0, 2.0});
  Tensor r = relu(x);
  CHECK(r.at(0) == 0.0);
  CHECK(r.at(1) == 0.0);
  CHECK(r.at(2) == 2.0);

  Tensor s = softmax(Tensor::from_vector({2}, {0.0, 0.0}));
  CHECK(s.at(0) == doctest::Approx(0.5));
  CHECK(s.at(1) == doctest::Approx(0.5));

  Tensor big = softmax(Tensor::from_vector({2}, {1000.0, 999.0}));
  CHECK(std::isfinite(big.at(0)));
  CHECK(big.at(0) + big.at(1) == doctest::Approx(1.0));

  Tensor signal = Tensor::zeros({1, 250});
  Tensor kernel = Tensor::full({1, 3}, 1.0);
  CHECK(conv1d(signal, kernel, 2).shape() == Shape{1, 124});
}

TEST_CASE("matmul layouts and values") {
  Tensor a = Tensor::from_vector({2, 2}, {1, 2, 3, 4});
  Tensor b = Tensor::from_vector({2, 2}, {5, 6, 7, 8});
  Tensor c = matmul(a, b);
  CHECK(c.at(0, 0) == 19.0);
  CHECK(c.at(0, 1) == 22.0);
  CHECK(c.at(1, 0) == 43.0);
  CHECK(c.at(1, 1) == 50.0);

  Tensor v = Tensor::from_vector({2}, {1, 1});
  CHECK(matmul(v, b).shape() == Shape{2});
  CHECK(matmul(v, b).at(0) == 12.0);
  CHECK(matmul(b, v).at(0) == 11.0);
  CHECK_THROWS(matmul(a, Tensor::from_vector({3}, {1, 2, 3})));
}

TEST_CASE("add broadcasts a row bias only") {
  Tensor m = Tensor::from_vector({2, 2}, {1, 2, 3, 4});
  Tensor bias = Tensor::from_vector({2}, {10, 20});
  Tensor out = add(m, bias);
  CHECK(out.at(0, 0) == 11.0);
  CHECK(out.at(1, 1) == 24.0);
  CHECK_THROWS(add(m, Tensor::from_vector({3}, {1, 2, 3})));
}

TEST_CASE("reductions and tie-breaking") {
  Tensor m = Tensor::from_vector({2, 3}, {3, 1, 3, 0, 5, 2});
  CHECK(sum(m).at(0) == 14.0);
  CHECK(mean(m).at(0) == doctest::Approx(14.0 / 6));
  CHECK(max(m).at(0) == 5.0);

  Tensor sr = sum_rows(m);
  CHECK(sr.shape() == Shape{3});
  CHECK(sr.at(0) == 3.0);
  CHECK(sr.at(1) == 6.0);

  Tensor mr = max_rows(m);
  CHECK(mr.at(0) == 3.0);
  CHECK(mr.at(2) == 3.0);

  // ties route the gradient to the lowest index
  Tensor t = Tensor::from_vector({3}, {3.0, 1.0, 3.0}, true);
  backward(max(t));
  CHECK(t.grad()[0] == 1.0);
  CHECK(t.grad()[2] == 0.0);
}

TEST_CASE("gather, scale_rows and row normalization") {
  Tensor v = Tensor::from_vector({4}, {10, 11, 12, 13});
  Tensor g = gather(v, {3, 0});
  CHECK(g.at(0) == 13.0);
  CHECK(g.at(1) == 10.0);

  Tensor m = Tensor::from_vector({3, 2}, {1, 2, 3, 4, 5, 6});
  Tensor gr = gather_rows(m, {2, 2, 0});
  CHECK(gr.at(0, 1) == 6.0);
  CHECK(gr.at(2, 0) == 1.0);

  Tensor s = Tensor::from_vector({3}, {2, 0, -1});
  Tensor sc = scale_rows(m, s);
  CHECK(sc.at(0, 0) == 2.0);
  CHECK(sc.at(1, 0) == 0.0);
  CHECK(sc.at(2, 1) == -6.0);

  Tensor z = Tensor::from_vector({2, 2}, {3, 4, 0, 0});
  Tensor n = l2_normalize_rows(z);
  CHECK(n.at(0, 0) == doctest::Approx(0.6));
  CHECK(n.at(0, 1) == doctest::Approx(0.8));
  CHECK(n.at(1, 0) == 0.0);  // zero rows stay zero
}

TEST_CASE("concat, stack, reshape, transpose") {
  Tensor a = Tensor::from_vector({2}, {1, 2});
  Tensor b = Tensor::from_vector({3}, {3, 4, 5});
  Tensor cat = concat({a, b}, 0);
  CHECK(cat.shape() == Shape{5});
  CHECK(cat.at(4) == 5.0);

  Tensor m1 = Tensor::from_vector({1, 2}, {1, 2});
  Tensor m2 = Tensor::from_vector({1, 2}, {3, 4});
  CHECK(concat({m1, m2}, 0).shape() == Shape{2, 2});
  CHECK(concat({m1, m2}, 1).shape() == Shape{1, 4});
  CHECK(concat({m1, m2}, 1).at(0, 3) == 4.0);

  Tensor st = stack_rows({a, Tensor::from_vector({2}, {7, 8})});
  CHECK(st.shape() == Shape{2, 2});
  CHECK(st.at(1, 0) == 7.0);

  Tensor r = reshape(st, {4});
  CHECK(r.at(2) == 7.0);
  CHECK_THROWS(reshape(st, {3}));

  Tensor tr = transpose(st);
  CHECK(tr.at(0, 1) == 7.0);
}

TEST_CASE("cross entropy analytic values") {
  Tensor uniform = Tensor::zeros({4, 3});
  CHECK(cross_entropy(uniform, {0, 1, 2, 0}).at(0) ==
        doctest::Approx(std::log(3.0)));

  Tensor sharp = Tensor::from_vector({2, 2}, {50, -50, -50, 50});
  CHECK(cross_entropy(sharp, {0, 1}).at(0) == doctest::Approx(0.0).epsilon(1e-9));

  CHECK_THROWS(cross_entropy(uniform, {0, 1, 3, 0}));  // label out of range
  CHECK_THROWS(cross_entropy(uniform, {0, 1}));        // label count mismatch
}

TEST_CASE("linear map gradient is the outer-product structure") {
  Tensor W = Tensor::from_vector({2, 2}, {1, 1, 1, 1}, true);
  Tensor x = Tensor::from_vector({2}, {3, 5});
  backward(sum(matmul(W, x)));
  CHECK(W.grad()[0] == 3.0);
  CHECK(W.grad()[1] == 5.0);
  CHECK(W.grad()[2] == 3.0);
  CHECK(W.grad()[3] == 5.0);
}

TEST_CASE("dead relu has zero gradient") {
  Tensor w = Tensor::scalar(-1.0, true);
  backward(sum(relu(w)));
  CHECK(w.grad()[0] == 0.0);
}

TEST_CASE("abs subgradient at zero is zero") {
  Tensor w = Tensor::from_vector({2}, {0.0, -2.0}, true);
  backward(sum(abs(w)));
  CHECK(w.grad()[0] == 0.0);
  CHECK(w.grad()[1] == -1.0);
}

TEST_CASE("backward bookkeeping") {
  Tensor a = Tensor::from_vector({2}, {1, 2}, true);
  CHECK_THROWS(backward(mul(a, a)));  // non-scalar loss

  backward(sum(mul(a, a)));  // duplicate parent: d(a^2) = 2a
  CHECK(a.grad()[0] == 2.0);
  CHECK(a.grad()[1] == 4.0);

  backward(sum(mul(a, a)));  // accumulates additively
  CHECK(a.grad()[0] == 4.0);
  a.zero_grad();
  CHECK(a.grad()[0] == 0.0);
  CHECK(a.grad()[1] == 0.0);

  {
    NoGradGuard guard;
    Tensor out = mul(a, a);
    CHECK_FALSE(out.requires_grad());
  }
}

TEST_CASE("gradcheck: elementwise and matmul primitives") {
  auto check = [](const char* name, const std::function<Tensor()>& f,
                  std::vector<Tensor> inputs) {
    auto r = gradcheck(f, std::move(inputs));
    INFO(name << ": " << r.worst);
    CHECK(r.max_rel < 1e-4);
  };

  Tensor a = randn({3, 4}, 1);
  Tensor b = randn({3, 4}, 2);
  check("add", [&] { return sum(mul(add(a, b), add(a, b))); }, {a, b});
  check("mul", [&] { return sum(mul(a, b)); }, {a, b});
  check("scale", [&] { return sum(scale(a, -1.7)); }, {a});

  Tensor s = Tensor::scalar(0.8, true);
  check("scale_by", [&] { return sum(scale_by(a, s)); }, {a, s});
  check("add_scalar", [&] { return sum(mul(add_scalar(a, s), a)); }, {a, s});

  Tensor bias = randn({4}, 3);
  check("row bias", [&] { return sum(mul(add(a, bias), add(a, bias))); },
        {a, bias});

  Tensor m1 = randn({2, 3}, 4);
  Tensor m2 = randn({3, 2}, 5);
  check("matmul", [&] { return sum(matmul(m1, m2)); }, {m1, m2});
  Tensor v3 = randn({3}, 6);
  Tensor v2 = randn({2}, 7);
  check("vec-mat", [&] { return sum(mul(matmul(v3, m2), v2)); }, {v3, m2});
  check("mat-vec", [&] { return sum(mul(matmul(m1, v3), v2)); }, {m1, v3});

  Tensor off = randn({3, 3}, 8, 1.0, 2.0);  // keep away from kinks
  check("relu", [&] { return sum(relu(off)); }, {off});
  check("abs", [&] { return sum(abs(off)); }, {off});
  check("sigmoid", [&] { return sum(mul(sigmoid(a), b)); }, {a});
  check("tanh", [&] { return sum(mul(tanh(a), b)); }, {a});
  check("softmax", [&] { return sum(mul(softmax(a), b)); }, {a});
}

TEST_CASE("gradcheck: shape ops, reductions, gathers") {
  auto check = [](const char* name, const std::function<Tensor()>& f,
                  std::vector<Tensor> inputs) {
    auto r = gradcheck(f, std::move(inputs));
    INFO(name << ": " << r.worst);
    CHECK(r.max_rel < 1e-4);
  };

  Tensor a = randn({2, 3}, 11);
  Tensor b = randn({2, 3}, 12);
  Tensor v = randn({4}, 13);

  check("concat0", [&] { return sum(mul(concat({a, b}, 0), concat({b, a}, 0))); },
        {a, b});
  check("concat1", [&] { return sum(mul(concat({a, b}, 1), concat({b, a}, 1))); },
        {a, b});
  check("concat vec", [&] { return sum(mul(concat({v, v}, 0), concat({v, v}, 0))); },
        {v});

  Tensor r1 = randn({3}, 14);
  Tensor r2 = randn({3}, 15);
  check("stack_rows", [&] { return sum(mul(stack_rows({r1, r2}), a)); },
        {r1, r2});
  check("reshape", [&] { return sum(mul(reshape(a, {3, 2}), reshape(b, {3, 2}))); },
        {a});
  check("transpose", [&] { return sum(mul(transpose(a), reshape(b, {3, 2}))); },
        {a});

  check("sum", [&] { return sum(a); }, {a});
  check("mean", [&] { return mean(a); }, {a});
  Tensor distinct = Tensor::from_vector({2, 3}, {0.1, 2.0, -1.0, 0.7, 1.3, -0.4}, true);
  check("max", [&] { return max(distinct); }, {distinct});
  check("sum_rows", [&] { return sum(mul(sum_rows(a), r1)); }, {a});
  check("mean_rows", [&] { return sum(mul(mean_rows(a), r1)); }, {a});
  check("max_rows", [&] { return sum(mul(max_rows(distinct), r1)); }, {distinct});

  check("gather", [&] { return sum(mul(gather(v, {2, 0, 2}), r1)); }, {v});
  check("gather_rows", [&] { return sum(mul(gather_rows(a, {1, 1}), b)); }, {a});

  Tensor sc = randn({2}, 16);
  check("scale_rows", [&] { return sum(mul(scale_rows(a, sc), b)); }, {a, sc});
  Tensor nz = randn({3, 4}, 17, 1.0, 0.5);
  Tensor wts = randn({3, 4}, 18);
  check("l2_normalize_rows",
        [&] { return sum(mul(l2_normalize_rows(nz), wts)); }, {nz});
}

TEST_CASE("gradcheck: conv1d and cross entropy") {
  Tensor x = randn({2, 11}, 21);
  Tensor k = randn({2, 3}, 22);
  auto rc = gradcheck([&] { return sum(mul(conv1d(x, k, 2),
                                           conv1d(x, k, 2))); }, {x, k});
  INFO(rc.worst);
  CHECK(rc.max_rel < 1e-4);

  Tensor logits = randn({3, 4}, 23);
  std::vector<int> labels = {2, 0, 3};
  auto ce = gradcheck([&] { return cross_entropy(logits, labels); }, {logits});
  INFO(ce.worst);
  CHECK(ce.max_rel < 1e-4);
}

TEST_CASE("batch norm train mode normalizes to unit variance") {
  BatchNorm bn(3);
  Tensor x = randn({64, 3}, 31, 2.5, -1.0);
  Tensor y = bn.forward(x, true);
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0.0, v = 0.0;
    for (std::size_t i = 0; i < 64; ++i) m += y.at(i, c);
    m /= 64;
    for (std::size_t i = 0; i < 64; ++i) {
      const double d = y.at(i, c) - m;
      v += d * d;
    }
    v /= 64;
    CHECK(std::fabs(m) < 1e-9);
    CHECK(std::fabs(v - 1.0) < 1e-6);
  }
  // running statistics moved toward the batch statistics
  CHECK(bn.running_mean.at(0) != 0.0);
  CHECK(bn.running_var.at(0) != 1.0);
}

TEST_CASE("batch norm eval mode applies the running affine map") {
  BatchNorm bn(2);
  Tensor x = randn({32, 2}, 32, 1.5, 3.0);
  (void)bn.forward(x, true);

  Tensor probe = Tensor::from_vector({1, 2}, {3.0, 3.0});
  Tensor out = bn.forward(probe, false);
  for (std::size_t c = 0; c < 2; ++c) {
    const double expect = (3.0 - bn.running_mean.at(c)) /
                          std::sqrt(bn.running_var.at(c) + bn.eps());
    CHECK(out.at(0, c) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("gradcheck: batch norm train and eval") {
  BatchNorm bn(3);
  Tensor x = randn({8, 3}, 33);
  auto rt = gradcheck(
      [&] { return sum(mul(bn.forward(x, true), x)); }, {x, bn.gamma, bn.beta});
  INFO("train: " << rt.worst);
  CHECK(rt.max_rel < 1e-4);

  auto re = gradcheck(
      [&] { return sum(mul(bn.forward(x, false), x)); }, {x, bn.gamma, bn.beta});
  INFO("eval: " << re.worst);
  CHECK(re.max_rel < 1e-4);
}

TEST_CASE("gradcheck: composed network fragment") {
  Tensor X = randn({4, 3}, 41);
  Tensor W = randn({3, 5}, 42);
  Tensor b = randn({5}, 43);
  auto r = gradcheck(
      [&] {
        Tensor h = relu(add(matmul(X, W), b));
        return mean(mul(softmax(h), h));
      },
      {X, W, b});
  INFO(r.worst);
  CHECK(r.max_rel < 1e-4);
}
