#include <doctest.h>

#include <cmath>

#include "affect/layers.hpp"
#include "affect/optim.hpp"
#include "affect/rng.hpp"

namespace nk = affect::num;

namespace {

nk::Tensor random_tensor(int rows, int cols, nk::Rng& rng) {
  nk::Tensor t(rows, cols);
  for (double& v : t.values()) v = rng.normal();
  return t;
}

}  // namespace

TEST_SUITE("layers") {

TEST_CASE("attention with all-ones vector is the identity") {
  nk::Rng rng(5);
  nk::AttentionVector att(4);
  const nk::Tensor x = random_tensor(10, 4, rng);
  nk::Tensor out(10, 4);
  att.forward(x, 10, out);
  for (int t = 0; t < 10; ++t) {
    for (int j = 0; j < 4; ++j) CHECK(out(t, j) == x(t, j));
  }
}

TEST_CASE("a zero attention weight annihilates its feature") {
  nk::Rng rng(6);
  nk::AttentionVector att(3);
  att.a(0, 1) = 0.0;
  const nk::Tensor x = random_tensor(8, 3, rng);
  nk::Tensor out(8, 3);
  att.forward(x, 8, out);
  for (int t = 0; t < 8; ++t) CHECK(out(t, 1) == 0.0);

  // and no gradient reaches the input through that column
  nk::Tensor dout = random_tensor(8, 3, rng);
  nk::Tensor dx(8, 3);
  att.a.zero_grad();
  att.backward(x, dout, 8, &dx);
  for (int t = 0; t < 8; ++t) CHECK(dx(t, 1) == 0.0);
}

TEST_CASE("gradient of sum(out) in the attention weight is the column sum") {
  nk::Rng rng(7);
  nk::AttentionVector att(5);
  for (double& v : att.a.values()) v = rng.uniform(0.2, 2.0);
  const nk::Tensor x = random_tensor(12, 5, rng);
  nk::Tensor ones(12, 5, 1.0);
  att.a.zero_grad();
  att.backward(x, ones, 12, nullptr);
  for (int j = 0; j < 5; ++j) {
    double expect = 0.0;
    for (int t = 0; t < 12; ++t) expect += x(t, j);
    CHECK(att.a.grad()[static_cast<std::size_t>(j)] ==
          doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("lstm with zero parameters emits zero hidden states") {
  nk::Rng rng(8);
  nk::LstmLayer lstm(3, 4, rng);
  lstm.wx.fill(0.0);
  lstm.wh.fill(0.0);
  lstm.b.fill(0.0);
  const nk::Tensor x = random_tensor(6, 3, rng);
  nk::Tensor h(6, 4);
  lstm.forward(x, 6, h, nullptr);
  for (double v : h.values()) CHECK(v == 0.0);
}

TEST_CASE("lstm hidden states stay inside (-1, 1)") {
  nk::Rng rng(9);
  nk::LstmLayer lstm(3, 5, rng);
  nk::Tensor x = random_tensor(40, 3, rng);
  for (double& v : x.values()) v *= 10.0;  // drive the gates hard
  nk::Tensor h(40, 5);
  lstm.forward(x, 40, h, nullptr);
  for (double v : h.values()) {
    CHECK(v > -1.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("lstm gradients match central differences") {
  nk::Rng rng(10);
  const int len = 5, dim = 4, hidden = 3;
  nk::LstmLayer lstm(dim, hidden, rng);
  nk::Tensor x = random_tensor(len, dim, rng);
  auto eval = [&](bool with_grad) {
    nk::Tensor h(len, hidden);
    nk::LstmLayer::Cache cache{nk::Tensor(len, 4 * hidden),
                               nk::Tensor(len, hidden),
                               nk::Tensor(len, hidden),
                               nk::Tensor(len, hidden)};
    lstm.forward(x, len, h, &cache);
    double loss = 0.0;
    for (double v : h.values()) loss += 0.5 * v * v;
    if (with_grad) {
      nk::Tensor dx(len, dim);
      lstm.backward(x, cache, h, len, &dx);
      auto& g = x.grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += dx.values()[i];
    }
    return loss;
  };
  std::vector<nk::Param> params{{"wx", &lstm.wx},
                                {"wh", &lstm.wh},
                                {"b", &lstm.b},
                                {"x", &x}};
  const auto result = nk::grad_check(eval, params);
  CHECK(result.max_rel_err < 1e-4);
}

TEST_CASE("lstm output at frame t ignores later frames") {
  nk::Rng rng(11);
  nk::LstmLayer lstm(2, 3, rng);
  nk::Tensor x = random_tensor(10, 2, rng);
  nk::Tensor base(10, 3);
  lstm.forward(x, 10, base, nullptr);
  x(7, 0) += 50.0;
  nk::Tensor out(10, 3);
  lstm.forward(x, 10, out, nullptr);
  for (int t = 0; t < 7; ++t) {
    for (int j = 0; j < 3; ++j) CHECK(out(t, j) == base(t, j));
  }
}

TEST_CASE("dropout with p = 0 is the identity and keeps a unit mask") {
  nk::Rng rng(12);
  const nk::Tensor x = random_tensor(9, 4, rng);
  nk::Tensor out(9, 4), mask(9, 4);
  nk::Rng drop_rng(77);
  nk::dropout_forward(x, 0.0, 9, drop_rng, out, mask);
  for (int t = 0; t < 9; ++t) {
    for (int j = 0; j < 4; ++j) {
      CHECK(out(t, j) == x(t, j));
      CHECK(mask(t, j) == 1.0);
    }
  }
}

TEST_CASE("dropout survivors are scaled by 1/(1-p)") {
  nk::Rng rng(13);
  const nk::Tensor x = random_tensor(50, 8, rng);
  nk::Tensor out(50, 8), mask(50, 8);
  nk::Rng drop_rng(78);
  const double p = 0.25;
  nk::dropout_forward(x, p, 50, drop_rng, out, mask);
  int dropped = 0;
  for (double v : mask.values()) {
    const bool zero = v == 0.0;
    const bool scaled = std::abs(v - 1.0 / (1.0 - p)) < 1e-15;
    CHECK((zero || scaled));
    dropped += zero ? 1 : 0;
  }
  CHECK(dropped > 0);
  CHECK(dropped < 50 * 8);
}

TEST_CASE("softmax row normalizes to a probability vector") {
  nk::Tensor a(1, 4, 1.0);  // equal inputs -> uniform weights
  nk::Tensor s(1, 4);
  nk::softmax_row(a, s);
  for (int j = 0; j < 4; ++j) CHECK(s(0, j) == doctest::Approx(0.25));

  a(0, 2) = 9.0;
  nk::softmax_row(a, s);
  double sum = 0.0;
  for (int j = 0; j < 4; ++j) sum += s(0, j);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s(0, 2) > 0.99);
}

TEST_CASE("prelu forward and slope gradient") {
  nk::PRelu act(0.3);
  nk::Tensor z(2, 2);
  z(0, 0) = 2.0;
  z(0, 1) = -4.0;
  z(1, 0) = 0.5;
  z(1, 1) = -1.0;
  nk::Tensor out(2, 2);
  act.forward(z, 2, out);
  CHECK(out(0, 0) == 2.0);
  CHECK(out(0, 1) == doctest::Approx(-1.2));
  CHECK(out(1, 1) == doctest::Approx(-0.3));

  nk::Tensor ones(2, 2, 1.0);
  nk::Tensor dz(2, 2);
  act.slope.zero_grad();
  act.backward(z, ones, 2, dz);
  // d out / d slope sums the negative inputs
  CHECK(act.slope.grad()[0] == doctest::Approx(-5.0));
  CHECK(dz(0, 0) == 1.0);
  CHECK(dz(0, 1) == doctest::Approx(0.3));
}

}  // TEST_SUITE
