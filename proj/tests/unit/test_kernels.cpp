#include <doctest.h>

#include <cstring>
#include <vector>

#include "affect/kernels.hpp"
#include "affect/rng.hpp"

#include "oracles.hpp"

namespace nk = affect::num;

namespace {

std::vector<double> random_vec(std::size_t n, nk::Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("reference and openmp kernels agree bitwise") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    nk::Rng rng(nk::derive_seed(99, "kernel-par", seed));
    const int len = 40 + static_cast<int>(seed) * 17;
    const int ch = 7 + static_cast<int>(seed);
    const int taps = 1 + static_cast<int>(seed % 4);
    const int dil = 1 + static_cast<int>(seed % 3);

    const auto x = random_vec(static_cast<std::size_t>(len) * ch, rng);
    const auto w = random_vec(static_cast<std::size_t>(ch) * taps, rng);
    const auto b = random_vec(static_cast<std::size_t>(ch), rng);
    std::vector<double> o1(x.size()), o2(x.size());
    nk::ref::conv1d_depthwise_fwd(x.data(), len, ch, w.data(), b.data(), taps, dil, o1.data());
    nk::par::conv1d_depthwise_fwd(x.data(), len, ch, w.data(), b.data(), taps, dil, o2.data());
    CHECK(same_bits(o1, o2));

    std::vector<double> dx1(x.size(), 0.0), dx2(x.size(), 0.0);
    std::vector<double> dw1(w.size(), 0.0), dw2(w.size(), 0.0);
    std::vector<double> db1(b.size(), 0.0), db2(b.size(), 0.0);
    nk::ref::conv1d_depthwise_bwd(x.data(), len, ch, w.data(), taps, dil, o1.data(), dx1.data(), dw1.data(), db1.data());
    nk::par::conv1d_depthwise_bwd(x.data(), len, ch, w.data(), taps, dil, o2.data(), dx2.data(), dw2.data(), db2.data());
    CHECK(same_bits(dx1, dx2));
    CHECK(same_bits(dw1, dw2));
    CHECK(same_bits(db1, db2));

    const int m = 9 + static_cast<int>(seed), k = 6 + static_cast<int>(seed), n = 11;
    const auto a = random_vec(static_cast<std::size_t>(m) * k, rng);
    const auto bm = random_vec(static_cast<std::size_t>(n) * k, rng);
    std::vector<double> c1(static_cast<std::size_t>(m) * n), c2(c1.size());
    nk::ref::gemm_nt(a.data(), m, k, bm.data(), n, c1.data());
    nk::par::gemm_nt(a.data(), m, k, bm.data(), n, c2.data());
    CHECK(same_bits(c1, c2));

    const auto b2 = random_vec(static_cast<std::size_t>(m) * n, rng);
    std::vector<double> t1(static_cast<std::size_t>(k) * n, 0.5), t2(t1);
    nk::ref::gemm_tn(a.data(), m, k, b2.data(), n, t1.data());
    nk::par::gemm_tn(a.data(), m, k, b2.data(), n, t2.data());
    CHECK(same_bits(t1, t2));

    const auto b3 = random_vec(static_cast<std::size_t>(k) * n, rng);
    std::vector<double> g1(static_cast<std::size_t>(m) * n), g2(g1.size());
    nk::ref::gemm_nn(a.data(), m, k, b3.data(), n, g1.data());
    nk::par::gemm_nn(a.data(), m, k, b3.data(), n, g2.data());
    CHECK(same_bits(g1, g2));

    const auto wv = random_vec(static_cast<std::size_t>(m) * k, rng);
    const auto xv = random_vec(static_cast<std::size_t>(k), rng);
    std::vector<double> y1(static_cast<std::size_t>(m)), y2(y1.size());
    nk::ref::matvec(wv.data(), m, k, xv.data(), y1.data());
    nk::par::matvec(wv.data(), m, k, xv.data(), y2.data());
    CHECK(same_bits(y1, y2));

    const auto xt = random_vec(static_cast<std::size_t>(m), rng);
    std::vector<double> z1(static_cast<std::size_t>(k)), z2(z1.size());
    nk::ref::matvec_t(wv.data(), m, k, xt.data(), z1.data());
    nk::par::matvec_t(wv.data(), m, k, xt.data(), z2.data());
    CHECK(same_bits(z1, z2));
  }
}

TEST_CASE("conv with a single unit tap is the identity") {
  const int len = 12, ch = 3;
  nk::Rng rng(7);
  const auto x = random_vec(static_cast<std::size_t>(len) * ch, rng);
  std::vector<double> w(static_cast<std::size_t>(ch), 1.0);
  std::vector<double> b(static_cast<std::size_t>(ch), 0.0);
  std::vector<double> out(x.size());
  nk::conv1d_depthwise_fwd(x.data(), len, ch, w.data(), b.data(), 1, 1, out.data());
  CHECK(same_bits(out, x));
}

TEST_CASE("two-tap dilated conv matches the explicit summation") {
  // taps (w0 toward the older frame, w1 on the current frame), dilation 2
  const double w0 = 0.6, w1 = -1.3;
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> w{w0, w1};
  std::vector<double> out(4);
  nk::conv1d_depthwise_fwd(x.data(), 4, 1, w.data(),
                           std::vector<double>{0.0}.data(), 2, 2, out.data());
  CHECK(out[0] == doctest::Approx(w1 * 1.0).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(w1 * 2.0).epsilon(1e-15));
  CHECK(out[2] == doctest::Approx(w0 * 1.0 + w1 * 3.0).epsilon(1e-15));
  CHECK(out[3] == doctest::Approx(w0 * 2.0 + w1 * 4.0).epsilon(1e-15));

  const auto expect = oracle::causal_conv_1ch(x, w, 0.0, 2);
  for (int t = 0; t < 4; ++t) {
    CHECK(out[static_cast<std::size_t>(t)] ==
          doctest::Approx(expect[static_cast<std::size_t>(t)]).epsilon(1e-15));
  }
}

TEST_CASE("conv against the summation oracle on random input") {
  nk::Rng rng(21);
  const int len = 30;
  for (int taps = 1; taps <= 4; ++taps) {
    for (int dil = 1; dil <= 5; dil += 2) {
      const auto x = random_vec(static_cast<std::size_t>(len), rng);
      const auto w = random_vec(static_cast<std::size_t>(taps), rng);
      const double bias = rng.normal();
      std::vector<double> out(static_cast<std::size_t>(len));
      nk::conv1d_depthwise_fwd(x.data(), len, 1, w.data(), &bias, taps, dil, out.data());
      const auto expect = oracle::causal_conv_1ch(x, w, bias, dil);
      for (int t = 0; t < len; ++t) {
        CHECK(out[static_cast<std::size_t>(t)] ==
              doctest::Approx(expect[static_cast<std::size_t>(t)]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("perturbing a future frame never changes earlier conv output") {
  nk::Rng rng(33);
  const int len = 25, ch = 4;
  auto x = random_vec(static_cast<std::size_t>(len) * ch, rng);
  const auto w = random_vec(static_cast<std::size_t>(ch) * 3, rng);
  const auto b = random_vec(static_cast<std::size_t>(ch), rng);
  std::vector<double> base(x.size());
  nk::conv1d_depthwise_fwd(x.data(), len, ch, w.data(), b.data(), 3, 2, base.data());

  const int t_perturb = 13;
  x[static_cast<std::size_t>(t_perturb) * ch + 1] += 100.0;
  std::vector<double> out(x.size());
  nk::conv1d_depthwise_fwd(x.data(), len, ch, w.data(), b.data(), 3, 2, out.data());
  for (int t = 0; t < t_perturb; ++t) {
    for (int d = 0; d < ch; ++d) {
      CHECK(out[static_cast<std::size_t>(t) * ch + static_cast<std::size_t>(d)] ==
            base[static_cast<std::size_t>(t) * ch + static_cast<std::size_t>(d)]);
    }
  }
}

}  // TEST_SUITE
