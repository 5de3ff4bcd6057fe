// OpenMP mirrors of the reference kernels. Parallel loops run over
// independent output elements only; reductions stay inside one thread in
// reference order, which keeps results bitwise-equal to ref:: at any
// thread count.

#include <cstddef>

#include "affect/kernels.hpp"

namespace affect::num::par {

void conv1d_depthwise_fwd(const double* x, int len, int ch, const double* w,
                          const double* bias, int taps, int dilation,
                          double* out) {
#pragma omp parallel for schedule(static)
  for (int t = 0; t < len; ++t) {
    double* orow = out + static_cast<std::size_t>(t) * ch;
    for (int d = 0; d < ch; ++d) orow[d] = bias[d];
    for (int k = 0; k < taps; ++k) {
      const int src = t - (taps - 1 - k) * dilation;
      if (src < 0) continue;
      const double* wrow = w + static_cast<std::size_t>(k) * ch;
      const double* xrow = x + static_cast<std::size_t>(src) * ch;
      for (int d = 0; d < ch; ++d) orow[d] += wrow[d] * xrow[d];
    }
  }
}

void conv1d_depthwise_bwd(const double* x, int len, int ch, const double* w,
                          int taps, int dilation, const double* dout,
                          double* dx, double* dw, double* dbias) {
  if (dx != nullptr) {
#pragma omp parallel for schedule(static)
    for (int t = 0; t < len; ++t) {
      double* dxrow = dx + static_cast<std::size_t>(t) * ch;
      for (int k = 0; k < taps; ++k) {
        const int dst = t + (taps - 1 - k) * dilation;
        if (dst >= len) continue;
        const double* wrow = w + static_cast<std::size_t>(k) * ch;
        const double* drow = dout + static_cast<std::size_t>(dst) * ch;
        for (int d = 0; d < ch; ++d) dxrow[d] += wrow[d] * drow[d];
      }
    }
  }
#pragma omp parallel for schedule(static)
  for (int k = 0; k < taps; ++k) {
    double* dwrow = dw + static_cast<std::size_t>(k) * ch;
    for (int t = 0; t < len; ++t) {
      const int src = t - (taps - 1 - k) * dilation;
      if (src < 0) continue;
      const double* drow = dout + static_cast<std::size_t>(t) * ch;
      const double* xrow = x + static_cast<std::size_t>(src) * ch;
      for (int d = 0; d < ch; ++d) dwrow[d] += drow[d] * xrow[d];
    }
  }
  // per-channel accumulation keeps the t-ascending order of the serial
  // version while staying race-free
#pragma omp parallel for schedule(static)
  for (int d = 0; d < ch; ++d) {
    double acc = 0.0;
    for (int t = 0; t < len; ++t) {
      acc += dout[static_cast<std::size_t>(t) * ch + d];
    }
    dbias[d] += acc;
  }
}

void gemm_nt(const double* a, int m, int k, const double* b, int n,
             double* c) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = b + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int l = 0; l < k; ++l) acc += arow[l] * brow[l];
      crow[j] = acc;
    }
  }
}

void gemm_tn(const double* a, int m, int k, const double* b, int n,
             double* c) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < k; ++i) {
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int t = 0; t < m; ++t) {
        acc += a[static_cast<std::size_t>(t) * k + i] *
               b[static_cast<std::size_t>(t) * n + j];
      }
      crow[j] += acc;
    }
  }
}

void gemm_nn(const double* a, int m, int k, const double* b, int n,
             double* c) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) crow[j] = 0.0;
    for (int l = 0; l < k; ++l) {
      const double ail = arow[l];
      const double* brow = b + static_cast<std::size_t>(l) * n;
      for (int j = 0; j < n; ++j) crow[j] += ail * brow[j];
    }
  }
}

void matvec(const double* w, int rows, int cols, const double* x, double* y) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) {
    const double* wrow = w + static_cast<std::size_t>(i) * cols;
    double acc = 0.0;
    for (int j = 0; j < cols; ++j) acc += wrow[j] * x[j];
    y[i] = acc;
  }
}

void matvec_t(const double* w, int rows, int cols, const double* x,
              double* y) {
#pragma omp parallel for schedule(static)
  for (int j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (int i = 0; i < rows; ++i) {
      acc += w[static_cast<std::size_t>(i) * cols + j] * x[i];
    }
    y[j] = acc;
  }
}

}  // namespace affect::num::par
