#pragma once

namespace affect::num {

// Hot numeric loops, each implemented twice: a plain serial reference
// (ref::) and an OpenMP version (par::). The parallel loops split only
// over independent output elements and keep the per-element evaluation
// order identical to the reference, so both produce bitwise-equal
// results at any thread count. The unqualified functions dispatch on
// parallel_enabled().
//
// Layouts are row-major throughout. Conv weights are tap-major
// (w[k*ch + d]) so the channel loop runs over contiguous memory.
//   conv1d_depthwise_fwd : out[t,d] = bias[d]
//                          + sum_k w[k,d] * x[t - (taps-1-k)*dilation, d]
//                          (tap 0 reaches furthest into the past, the last
//                          tap reads the current frame; out-of-range frames
//                          read as zero, so the output is causal)
//   conv1d_depthwise_bwd : accumulates into dx (if non-null), dw, dbias
//   gemm_nt  : c[m,n]  = a[m,k] * b[n,k]^T          (overwrites c)
//   gemm_tn  : c[k,n] += a[m,k]^T * b[m,n]          (accumulates)
//   gemm_nn  : c[m,n]  = a[m,k] * b[k,n]            (overwrites c)
//   matvec   : y = W x      with W rows x cols      (overwrites y)
//   matvec_t : y = W^T x    with W rows x cols      (overwrites y)

bool parallel_enabled();
void set_parallel(bool on);
int max_threads();

namespace ref {
void conv1d_depthwise_fwd(const double* x, int len, int ch, const double* w,
                          const double* bias, int taps, int dilation,
                          double* out);
void conv1d_depthwise_bwd(const double* x, int len, int ch, const double* w,
                          int taps, int dilation, const double* dout,
                          double* dx, double* dw, double* dbias);
void gemm_nt(const double* a, int m, int k, const double* b, int n, double* c);
void gemm_tn(const double* a, int m, int k, const double* b, int n, double* c);
void gemm_nn(const double* a, int m, int k, const double* b, int n, double* c);
void matvec(const double* w, int rows, int cols, const double* x, double* y);
void matvec_t(const double* w, int rows, int cols, const double* x, double* y);
}  // namespace ref

namespace par {
void conv1d_depthwise_fwd(const double* x, int len, int ch, const double* w,
                          const double* bias, int taps, int dilation,
                          double* out);
void conv1d_depthwise_bwd(const double* x, int len, int ch, const double* w,
                          int taps, int dilation, const double* dout,
                          double* dx, double* dw, double* dbias);
void gemm_nt(const double* a, int m, int k, const double* b, int n, double* c);
void gemm_tn(const double* a, int m, int k, const double* b, int n, double* c);
void gemm_nn(const double* a, int m, int k, const double* b, int n, double* c);
void matvec(const double* w, int rows, int cols, const double* x, double* y);
void matvec_t(const double* w, int rows, int cols, const double* x, double* y);
}  // namespace par

void conv1d_depthwise_fwd(const double* x, int len, int ch, const double* w,
                          const double* bias, int taps, int dilation,
                          double* out);
void conv1d_depthwise_bwd(const double* x, int len, int ch, const double* w,
                          int taps, int dilation, const double* dout,
                          double* dx, double* dw, double* dbias);
void gemm_nt(const double* a, int m, int k, const double* b, int n, double* c);
void gemm_tn(const double* a, int m, int k, const double* b, int n, double* c);
void gemm_nn(const double* a, int m, int k, const double* b, int n, double* c);
void matvec(const double* w, int rows, int cols, const double* x, double* y);
void matvec_t(const double* w, int rows, int cols, const double* x, double* y);

}  // namespace affect::num
