#include "affect/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace affect::num {

namespace {
bool g_parallel =
#ifdef _OPENMP
    true;
#else
    false;
#endif
}  // namespace

bool parallel_enabled() { return g_parallel; }
void set_parallel(bool on) { g_parallel = on; }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void conv1d_depthwise_fwd(const double* x, int len, int ch, const double* w,
                          const double* bias, int taps, int dilation,
                          double* out) {
  if (g_parallel) {
    par::conv1d_depthwise_fwd(x, len, ch, w, bias, taps, dilation, out);
  } else {
    ref::conv1d_depthwise_fwd(x, len, ch, w, bias, taps, dilation, out);
  }
}

void conv1d_depthwise_bwd(const double* x, int len, int ch, const double* w,
                          int taps, int dilation, const double* dout,
                          double* dx, double* dw, double* dbias) {
  if (g_parallel) {
    par::conv1d_depthwise_bwd(x, len, ch, w, taps, dilation, dout, dx, dw,
                              dbias);
  } else {
    ref::conv1d_depthwise_bwd(x, len, ch, w, taps, dilation, dout, dx, dw,
                              dbias);
  }
}

void gemm_nt(const double* a, int m, int k, const double* b, int n,
             double* c) {
  if (g_parallel) {
    par::gemm_nt(a, m, k, b, n, c);
  } else {
    ref::gemm_nt(a, m, k, b, n, c);
  }
}

void gemm_tn(const double* a, int m, int k, const double* b, int n,
             double* c) {
  if (g_parallel) {
    par::gemm_tn(a, m, k, b, n, c);
  } else {
    ref::gemm_tn(a, m, k, b, n, c);
  }
}

void gemm_nn(const double* a, int m, int k, const double* b, int n,
             double* c) {
  if (g_parallel) {
    par::gemm_nn(a, m, k, b, n, c);
  } else {
    ref::gemm_nn(a, m, k, b, n, c);
  }
}

void matvec(const double* w, int rows, int cols, const double* x, double* y) {
  if (g_parallel) {
    par::matvec(w, rows, cols, x, y);
  } else {
    ref::matvec(w, rows, cols, x, y);
  }
}

void matvec_t(const double* w, int rows, int cols, const double* x,
              double* y) {
  if (g_parallel) {
    par::matvec_t(w, rows, cols, x, y);
  } else {
    ref::matvec_t(w, rows, cols, x, y);
  }
}

}  // namespace affect::num
