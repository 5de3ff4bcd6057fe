#include <doctest.h>

#include <vector>

#include "affect/losses.hpp"
#include "affect/metrics.hpp"
#include "affect/optim.hpp"
#include "affect/rng.hpp"

namespace nk = affect::num;

TEST_SUITE("losses") {

TEST_CASE("mse of a tensor with itself is zero") {
  nk::Rng rng(3);
  nk::Tensor x(6, 2);
  for (double& v : x.values()) v = rng.uniform();
  std::vector<std::uint8_t> mask{1, 0, 1, 1, 0, 1};
  CHECK(nk::mse(x, x, mask) == 0.0);
}

TEST_CASE("masked frames are excluded from mse") {
  nk::Tensor pred(2, 1), truth(2, 1);
  pred(0, 0) = 0.5;
  pred(1, 0) = 0.5;
  truth(0, 0) = 0.5;
  truth(1, 0) = 1.0;
  std::vector<std::uint8_t> mask{1, 0};
  CHECK(nk::mse(pred, truth, mask) == 0.0);
}

TEST_CASE("mse arithmetic on a two-frame column") {
  nk::Tensor pred(2, 1), truth(2, 1);
  truth(0, 0) = 0.3;
  truth(1, 0) = 0.4;
  std::vector<std::uint8_t> mask{1, 1};
  CHECK(nk::mse(pred, truth, mask) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("mse with an all-false mask is an error") {
  nk::Tensor x(3, 1);
  std::vector<std::uint8_t> mask{0, 0, 0};
  CHECK_THROWS(nk::mse(x, x, mask));
}

TEST_CASE("ccc loss is 1 minus the metric ccc") {
  nk::Rng rng(4);
  nk::Tensor pred(20, 2), truth(20, 2);
  for (double& v : pred.values()) v = rng.uniform();
  for (double& v : truth.values()) v = rng.uniform();
  std::vector<std::uint8_t> mask(20, 1);
  mask[4] = 0;

  std::vector<double> pv, tv, pa, ta;
  for (int t = 0; t < 20; ++t) {
    if (!mask[static_cast<std::size_t>(t)]) continue;
    pv.push_back(pred(t, 0));
    tv.push_back(truth(t, 0));
    pa.push_back(pred(t, 1));
    ta.push_back(truth(t, 1));
  }
  std::vector<std::uint8_t> all(pv.size(), 1);
  const double ccc_v = affect::metrics::ccc(pv, tv, all).value;
  const double ccc_a = affect::metrics::ccc(pa, ta, all).value;
  const double expect = 1.0 - 0.5 * (ccc_v + ccc_a);
  CHECK(nk::ccc_loss(pred, truth, mask) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("pooled ccc objective gradient matches finite differences") {
  nk::Rng rng(5);
  nk::Tensor x(15, 2);
  for (double& v : x.values()) v = rng.uniform();
  nk::Tensor y(15, 2);
  for (double& v : y.values()) v = rng.uniform();

  auto eval = [&](bool with_grad) {
    nk::CccObjective obj(2);
    for (int t = 0; t < 15; ++t) {
      for (int c = 0; c < 2; ++c) obj.add(x(t, c), y(t, c), c);
    }
    if (with_grad) {
      auto& g = x.grad();
      for (int t = 0; t < 15; ++t) {
        for (int c = 0; c < 2; ++c) {
          g[static_cast<std::size_t>(t) * 2 + static_cast<std::size_t>(c)] +=
              obj.dpred(c, x(t, c), y(t, c));
        }
      }
    }
    return obj.loss();
  };
  std::vector<nk::Param> params{{"x", &x}};
  CHECK(nk::grad_check(eval, params).max_rel_err < 1e-6);
}

}  // TEST_SUITE
