#include <doctest.h>

#include <cmath>
#include <vector>

#include "affect/metrics.hpp"
#include "affect/rng.hpp"

#include "oracles.hpp"

namespace met = affect::metrics;
namespace nk = affect::num;

TEST_SUITE("metrics") {

TEST_CASE("rmse of identical series is zero") {
  std::vector<double> x{0.1, 0.5, 0.9};
  std::vector<std::uint8_t> mask{1, 1, 1};
  CHECK(met::rmse(x, x, mask) == 0.0);
}

TEST_CASE("rmse hand case") {
  std::vector<double> pred{0.0, 0.0};
  std::vector<double> truth{0.3, 0.4};
  std::vector<std::uint8_t> mask{1, 1};
  CHECK(met::rmse(pred, truth, mask) ==
        doctest::Approx(0.3535533905932738).epsilon(1e-14));
}

TEST_CASE("rmse ignores masked frames") {
  std::vector<double> pred{0.5, 0.9};
  std::vector<double> truth{0.5, 0.0};
  std::vector<std::uint8_t> mask{1, 0};
  CHECK(met::rmse(pred, truth, mask) == 0.0);
}

TEST_CASE("rmse with no valid frame throws") {
  std::vector<double> x{0.1};
  std::vector<std::uint8_t> mask{0};
  CHECK_THROWS(met::rmse(x, x, mask));
}

TEST_CASE("ccc of a non-constant series with itself is one") {
  std::vector<double> x{0.0, 0.4, 0.2, 0.9};
  std::vector<std::uint8_t> mask{1, 1, 1, 1};
  CHECK(met::ccc(x, x, mask).value == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("perfectly anti-concordant pair gives exactly -1") {
  std::vector<double> x{0.0, 1.0};
  std::vector<double> y{1.0, 0.0};
  std::vector<std::uint8_t> mask{1, 1};
  CHECK(met::ccc(x, y, mask).value == -1.0);
}

TEST_CASE("a constant shift is penalized even at pearson one") {
  std::vector<double> x{0.0, 0.2, 0.4};
  std::vector<double> y{0.5, 0.7, 0.9};
  std::vector<std::uint8_t> mask{1, 1, 1};
  const double c = met::ccc(x, y, mask).value;
  CHECK(met::pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c < 1.0);
  CHECK(c == doctest::Approx(oracle::ccc(x, y, mask)).epsilon(1e-14));
  // 2*vx / (2*vx + 0.25) with vx = 0.02666..
  CHECK(c == doctest::Approx(0.17582417582417584).epsilon(1e-12));
}

TEST_CASE("both-constant input is degenerate and reports zero") {
  std::vector<double> x{0.5, 0.5, 0.5};
  std::vector<double> y{0.5, 0.5, 0.5};
  std::vector<std::uint8_t> mask{1, 1, 1};
  const auto r = met::ccc(x, y, mask);
  CHECK(r.value == 0.0);
  CHECK(r.degenerate);
}

TEST_CASE("production metrics match the brute-force oracle") {
  nk::Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 20 + rng.uniform_int(80);
    std::vector<double> pred, truth;
    std::vector<std::uint8_t> mask;
    int valid = 0;
    for (int i = 0; i < n; ++i) {
      pred.push_back(rng.uniform());
      truth.push_back(rng.uniform());
      const std::uint8_t m = rng.uniform() < 0.8 ? 1 : 0;
      mask.push_back(m);
      valid += m;
    }
    if (valid < 2) {
      mask[0] = mask[1] = 1;
    }
    CHECK(std::abs(met::rmse(pred, truth, mask) -
                   oracle::rmse(pred, truth, mask)) < 1e-9);
    CHECK(std::abs(met::ccc(pred, truth, mask).value -
                   oracle::ccc(pred, truth, mask)) < 1e-9);
  }
}

TEST_CASE("ccc magnitude never exceeds pearson magnitude") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    nk::Rng rng(nk::derive_seed(17, "ccc-prop", seed));
    std::vector<double> x, y;
    for (int i = 0; i < 100; ++i) {
      x.push_back(rng.normal());
      y.push_back(0.4 * x.back() + rng.normal());
    }
    std::vector<std::uint8_t> mask(100, 1);
    const double c = met::ccc(x, y, mask).value;
    const double p = met::pearson(x, y);
    CHECK(std::abs(c) <= std::abs(p) + 1e-12);
    CHECK(std::abs(p) <= 1.0 + 1e-12);
  }
}

TEST_CASE("rmse is invariant under a common translation") {
  nk::Rng rng(18);
  std::vector<double> x, y, xs, ys;
  for (int i = 0; i < 50; ++i) {
    x.push_back(rng.uniform());
    y.push_back(rng.uniform());
    xs.push_back(x.back() + 0.25);
    ys.push_back(y.back() + 0.25);
  }
  std::vector<std::uint8_t> mask(50, 1);
  CHECK(std::abs(met::rmse(x, y, mask) - met::rmse(xs, ys, mask)) < 1e-12);
}

TEST_CASE("padding frames out of the mask leaves pooled metrics unchanged") {
  nk::Rng rng(19);
  nk::Tensor pred(30, 2), truth(30, 2);
  for (double& v : pred.values()) v = rng.uniform();
  for (double& v : truth.values()) v = rng.uniform();
  std::vector<std::uint8_t> mask(30, 1);

  met::PooledEval plain;
  plain.add(pred, truth, mask);

  nk::Tensor pred_pad(45, 2), truth_pad(45, 2);
  for (int t = 0; t < 30; ++t) {
    for (int c = 0; c < 2; ++c) {
      pred_pad(t, c) = pred(t, c);
      truth_pad(t, c) = truth(t, c);
    }
  }
  std::vector<std::uint8_t> mask_pad(45, 0);
  for (int t = 0; t < 30; ++t) mask_pad[static_cast<std::size_t>(t)] = 1;
  met::PooledEval padded;
  padded.add(pred_pad, truth_pad, mask_pad);

  const auto a = plain.report();
  const auto b = padded.report();
  CHECK(a.valence.rmse == b.valence.rmse);
  CHECK(a.arousal.ccc == b.arousal.ccc);
  CHECK(a.rmse_combined == b.rmse_combined);
}

TEST_CASE("aggregate over identical folds has zero spread") {
  met::MetricReport fold;
  fold.valence.rmse = fold.arousal.rmse = 0.3;
  fold.valence.ccc = fold.arousal.ccc = 0.1;
  fold.rmse_combined = 0.3;
  fold.ccc_combined = 0.1;
  std::vector<met::MetricReport> folds{fold, fold, fold};
  const auto agg = met::aggregate(folds);
  CHECK(agg.rmse_mean == doctest::Approx(0.3));
  CHECK(agg.rmse_std == 0.0);
  CHECK(agg.fold_rmse.size() == 3);
}

TEST_CASE("aggregate mean of two folds") {
  met::MetricReport a, b;
  a.rmse_combined = 0.2;
  b.rmse_combined = 0.4;
  a.ccc_combined = 0.0;
  b.ccc_combined = 0.2;
  std::vector<met::MetricReport> folds{a, b};
  const auto agg = met::aggregate(folds);
  CHECK(agg.rmse_mean == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(agg.ccc_mean == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("aggregate of one fold is that fold") {
  met::MetricReport a;
  a.rmse_combined = 0.42;
  a.ccc_combined = -0.05;
  std::vector<met::MetricReport> folds{a};
  const auto agg = met::aggregate(folds);
  CHECK(agg.rmse_mean == 0.42);
  CHECK(agg.rmse_std == 0.0);
  CHECK(agg.ccc_mean == -0.05);
}

}  // TEST_SUITE
