// Times the serial reference kernels against their OpenMP counterparts
// and verifies the two produce bitwise-identical outputs.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "affect/kernels.hpp"
#include "affect/rng.hpp"

using affect::num::Rng;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

double time_loop(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count() /
         static_cast<double>(reps);
}

void report(const std::string& name, double t_ref, double t_par,
            bool bitwise_equal) {
  std::printf("%-24s ref %10.3f ms   omp %10.3f ms   speedup %5.2fx   %s\n",
              name.c_str(), t_ref * 1e3, t_par * 1e3, t_ref / t_par,
              bitwise_equal ? "bitwise-equal" : "MISMATCH");
}

bool equal_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main() {
  namespace nk = affect::num;
  std::printf("threads available: %d\n\n", nk::max_threads());
  Rng rng(42);
  const int reps = 20;

  {  // depthwise causal conv, grid-sized problem
    const int len = 1000, ch = 792, taps = 25, dil = 25;
    const auto x = random_vec(static_cast<std::size_t>(len) * ch, rng);
    const auto w = random_vec(static_cast<std::size_t>(ch) * taps, rng);
    const auto b = random_vec(static_cast<std::size_t>(ch), rng);
    std::vector<double> out_ref(x.size()), out_par(x.size());
    const double t_ref = time_loop(
        [&] {
          nk::ref::conv1d_depthwise_fwd(x.data(), len, ch, w.data(), b.data(),
                                        taps, dil, out_ref.data());
        },
        reps);
    const double t_par = time_loop(
        [&] {
          nk::par::conv1d_depthwise_fwd(x.data(), len, ch, w.data(), b.data(),
                                        taps, dil, out_par.data());
        },
        reps);
    report("conv_fwd 1000x792 k25", t_ref, t_par, equal_bits(out_ref, out_par));

    std::vector<double> dx_ref(x.size(), 0.0), dx_par(x.size(), 0.0);
    std::vector<double> dw_ref(w.size(), 0.0), dw_par(w.size(), 0.0);
    std::vector<double> db_ref(b.size(), 0.0), db_par(b.size(), 0.0);
    const double tb_ref = time_loop(
        [&] {
          nk::ref::conv1d_depthwise_bwd(x.data(), len, ch, w.data(), taps, dil,
                                        out_ref.data(), dx_ref.data(),
                                        dw_ref.data(), db_ref.data());
        },
        reps);
    const double tb_par = time_loop(
        [&] {
          nk::par::conv1d_depthwise_bwd(x.data(), len, ch, w.data(), taps, dil,
                                        out_par.data(), dx_par.data(),
                                        dw_par.data(), db_par.data());
        },
        reps);
    report("conv_bwd 1000x792 k25", tb_ref, tb_par,
           equal_bits(dw_ref, dw_par) && equal_bits(db_ref, db_par));
  }

  {  // lstm-shaped input projection
    const int len = 1000, in = 64, four_h = 1024;
    const auto x = random_vec(static_cast<std::size_t>(len) * in, rng);
    const auto w = random_vec(static_cast<std::size_t>(four_h) * in, rng);
    std::vector<double> c_ref(static_cast<std::size_t>(len) * four_h);
    std::vector<double> c_par(c_ref.size());
    const double t_ref = time_loop(
        [&] { nk::ref::gemm_nt(x.data(), len, in, w.data(), four_h, c_ref.data()); },
        reps);
    const double t_par = time_loop(
        [&] { nk::par::gemm_nt(x.data(), len, in, w.data(), four_h, c_par.data()); },
        reps);
    report("gemm_nt 1000x64x1024", t_ref, t_par, equal_bits(c_ref, c_par));
  }

  {  // gradient accumulation shape
    const int len = 1000, four_h = 1024, in = 64;
    const auto dz = random_vec(static_cast<std::size_t>(len) * four_h, rng);
    const auto x = random_vec(static_cast<std::size_t>(len) * in, rng);
    std::vector<double> c_ref(static_cast<std::size_t>(four_h) * in, 0.0);
    std::vector<double> c_par(c_ref.size(), 0.0);
    const double t_ref = time_loop(
        [&] { nk::ref::gemm_tn(dz.data(), len, four_h, x.data(), in, c_ref.data()); },
        reps);
    const double t_par = time_loop(
        [&] { nk::par::gemm_tn(dz.data(), len, four_h, x.data(), in, c_par.data()); },
        reps);
    report("gemm_tn 1000x1024x64", t_ref, t_par, equal_bits(c_ref, c_par));
  }

  {  // per-step recurrent matvec
    const int rows = 1024, cols = 256;
    const auto w = random_vec(static_cast<std::size_t>(rows) * cols, rng);
    const auto x = random_vec(static_cast<std::size_t>(cols), rng);
    std::vector<double> y_ref(static_cast<std::size_t>(rows));
    std::vector<double> y_par(y_ref.size());
    const double t_ref = time_loop(
        [&] { nk::ref::matvec(w.data(), rows, cols, x.data(), y_ref.data()); },
        200);
    const double t_par = time_loop(
        [&] { nk::par::matvec(w.data(), rows, cols, x.data(), y_par.data()); },
        200);
    report("matvec 1024x256", t_ref, t_par, equal_bits(y_ref, y_par));
  }

  return 0;
}
