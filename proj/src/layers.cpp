#include "affect/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "affect/kernels.hpp"

namespace affect::num {

void init_uniform_fan_in(Tensor& t, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
}

ConvDepthwise::ConvDepthwise(int ch, int taps, int dilation, Rng& rng)
    : w(taps, ch), b(1, ch), dilation(dilation) {
  if (taps < 1 || dilation < 1) {
    throw std::invalid_argument("conv: taps and dilation must be >= 1");
  }
  init_uniform_fan_in(w, taps, rng);
  init_uniform_fan_in(b, taps, rng);
}

void ConvDepthwise::forward(const Tensor& x, int valid, Tensor& out) const {
  if (x.cols() != w.cols()) throw std::invalid_argument("conv: channel mismatch");
  conv1d_depthwise_fwd(x.data(), valid, x.cols(), w.data(), b.data(),
                       w.rows(), dilation, out.data());
}

void ConvDepthwise::backward(const Tensor& x, const Tensor& dout, int valid,
                             Tensor* dx) {
  conv1d_depthwise_bwd(x.data(), valid, x.cols(), w.data(), w.rows(),
                       dilation, dout.data(), dx ? dx->data() : nullptr,
                       w.grad().data(), b.grad().data());
}

AttentionVector::AttentionVector(int ch) : a(1, ch, 1.0) {}

void AttentionVector::forward(const Tensor& x, int valid, Tensor& out) const {
  if (x.cols() != a.cols()) {
    throw std::invalid_argument("attention: width mismatch");
  }
  const int ch = x.cols();
  for (int t = 0; t < valid; ++t) {
    for (int j = 0; j < ch; ++j) out(t, j) = x(t, j) * a(0, j);
  }
}

void AttentionVector::backward(const Tensor& x, const Tensor& dout, int valid,
                               Tensor* dx) {
  const int ch = x.cols();
  auto& da = a.grad();
  for (int j = 0; j < ch; ++j) {
    double acc = 0.0;
    for (int t = 0; t < valid; ++t) acc += dout(t, j) * x(t, j);
    da[static_cast<std::size_t>(j)] += acc;
  }
  if (dx != nullptr) {
    for (int t = 0; t < valid; ++t) {
      for (int j = 0; j < ch; ++j) (*dx)(t, j) += dout(t, j) * a(0, j);
    }
  }
}

PRelu::PRelu(double init) : slope(1, 1, init) {}

void PRelu::forward(const Tensor& z, int valid, Tensor& out) const {
  const double s = slope(0, 0);
  const int ch = z.cols();
  for (int t = 0; t < valid; ++t) {
    for (int j = 0; j < ch; ++j) {
      const double v = z(t, j);
      out(t, j) = v > 0.0 ? v : s * v;
    }
  }
}

void PRelu::backward(const Tensor& z, const Tensor& dout, int valid,
                     Tensor& dz) {
  const double s = slope(0, 0);
  const int ch = z.cols();
  double ds = 0.0;
  for (int t = 0; t < valid; ++t) {
    for (int j = 0; j < ch; ++j) {
      const double v = z(t, j);
      if (v > 0.0) {
        dz(t, j) = dout(t, j);
      } else {
        dz(t, j) = dout(t, j) * s;
        ds += dout(t, j) * v;
      }
    }
  }
  slope.grad()[0] += ds;
}

Linear::Linear(int in, int out, Rng& rng) : w(out, in), b(1, out) {
  init_uniform_fan_in(w, in, rng);
  init_uniform_fan_in(b, in, rng);
}

void Linear::forward(const Tensor& x, int valid, Tensor& out) const {
  gemm_nt(x.data(), valid, x.cols(), w.data(), w.rows(), out.data());
  for (int t = 0; t < valid; ++t) {
    for (int o = 0; o < w.rows(); ++o) out(t, o) += b(0, o);
  }
}

void Linear::backward(const Tensor& x, const Tensor& dout, int valid,
                      Tensor* dx) {
  // dw[o,i] += sum_t dout[t,o] * x[t,i]
  gemm_tn(dout.data(), valid, w.rows(), x.data(), x.cols(), w.grad().data());
  auto& db = b.grad();
  for (int o = 0; o < w.rows(); ++o) {
    double acc = 0.0;
    for (int t = 0; t < valid; ++t) acc += dout(t, o);
    db[static_cast<std::size_t>(o)] += acc;
  }
  if (dx != nullptr) {
    Tensor tmp(valid, x.cols());
    gemm_nn(dout.data(), valid, w.rows(), w.data(), x.cols(), tmp.data());
    for (int t = 0; t < valid; ++t) {
      for (int i = 0; i < x.cols(); ++i) (*dx)(t, i) += tmp(t, i);
    }
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax_row(const Tensor& a, Tensor& s) {
  const int n = a.cols();
  double hi = a(0, 0);
  for (int j = 1; j < n; ++j) hi = std::max(hi, a(0, j));
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double e = std::exp(a(0, j) - hi);
    s(0, j) = e;
    sum += e;
  }
  for (int j = 0; j < n; ++j) s(0, j) /= sum;
}

void softmax_row_backward(const Tensor& s, const Tensor& ds, Tensor& da) {
  const int n = s.cols();
  double dot = 0.0;
  for (int j = 0; j < n; ++j) dot += ds(0, j) * s(0, j);
  auto& g = da.grad();
  for (int j = 0; j < n; ++j) {
    g[static_cast<std::size_t>(j)] += s(0, j) * (ds(0, j) - dot);
  }
}

LstmLayer::LstmLayer(int input_dim, int hidden, Rng& rng)
    : input_dim(input_dim),
      hidden(hidden),
      wx(4 * hidden, input_dim),
      wh(4 * hidden, hidden),
      b(1, 4 * hidden) {
  init_uniform_fan_in(wx, input_dim, rng);
  init_uniform_fan_in(wh, hidden, rng);
  init_uniform_fan_in(b, hidden, rng);
  // forget-gate bias offset keeps early memory open
  for (int j = hidden; j < 2 * hidden; ++j) b(0, j) += 1.0;
}

void LstmLayer::forward(const Tensor& x, int valid, Tensor& h_out,
                        Cache* cache) const {
  const int H = hidden;
  if (x.cols() != input_dim) {
    throw std::invalid_argument("lstm: input width mismatch");
  }
  // input projection for every frame at once, recurrence frame by frame
  Tensor z(valid, 4 * H);
  gemm_nt(x.data(), valid, input_dim, wx.data(), 4 * H, z.data());

  std::vector<double> hprev(static_cast<std::size_t>(H), 0.0);
  std::vector<double> cprev(static_cast<std::size_t>(H), 0.0);
  std::vector<double> rec(static_cast<std::size_t>(4 * H), 0.0);

  for (int t = 0; t < valid; ++t) {
    matvec(wh.data(), 4 * H, H, hprev.data(), rec.data());
    for (int j = 0; j < H; ++j) {
      const double zi = z(t, j) + rec[static_cast<std::size_t>(j)] + b(0, j);
      const double zf = z(t, H + j) + rec[static_cast<std::size_t>(H + j)] + b(0, H + j);
      const double zg = z(t, 2 * H + j) + rec[static_cast<std::size_t>(2 * H + j)] + b(0, 2 * H + j);
      const double zo = z(t, 3 * H + j) + rec[static_cast<std::size_t>(3 * H + j)] + b(0, 3 * H + j);
      const double gi = sigmoid(zi);
      const double gf = sigmoid(zf);
      const double gg = std::tanh(zg);
      const double go = sigmoid(zo);
      const double c = gf * cprev[static_cast<std::size_t>(j)] + gi * gg;
      const double tc = std::tanh(c);
      const double h = go * tc;
      if (cache != nullptr) {
        cache->gates(t, j) = gi;
        cache->gates(t, H + j) = gf;
        cache->gates(t, 2 * H + j) = gg;
        cache->gates(t, 3 * H + j) = go;
        cache->cells(t, j) = c;
        cache->tanh_c(t, j) = tc;
        cache->hs(t, j) = h;
      }
      h_out(t, j) = h;
      cprev[static_cast<std::size_t>(j)] = c;
      hprev[static_cast<std::size_t>(j)] = h;
    }
  }
}

void LstmLayer::backward(const Tensor& x, const Cache& cache,
                         const Tensor& dh_ext, int valid, Tensor* dx) {
  const int H = hidden;
  Tensor dz(valid, 4 * H);  // pre-activation gate gradients
  std::vector<double> dh_next(static_cast<std::size_t>(H), 0.0);
  std::vector<double> dc_next(static_cast<std::size_t>(H), 0.0);
  std::vector<double> dzrow(static_cast<std::size_t>(4 * H), 0.0);
  std::vector<double> dh_rec(static_cast<std::size_t>(H), 0.0);

  for (int t = valid - 1; t >= 0; --t) {
    for (int j = 0; j < H; ++j) {
      const double gi = cache.gates(t, j);
      const double gf = cache.gates(t, H + j);
      const double gg = cache.gates(t, 2 * H + j);
      const double go = cache.gates(t, 3 * H + j);
      const double tc = cache.tanh_c(t, j);
      const double cp = t > 0 ? cache.cells(t - 1, j) : 0.0;

      const double dh = dh_ext(t, j) + dh_next[static_cast<std::size_t>(j)];
      const double dgo = dh * tc;
      double dc = dc_next[static_cast<std::size_t>(j)] + dh * go * (1.0 - tc * tc);
      const double dgf = dc * cp;
      const double dgi = dc * gg;
      const double dgg = dc * gi;
      dc_next[static_cast<std::size_t>(j)] = dc * gf;

      dzrow[static_cast<std::size_t>(j)] = dgi * gi * (1.0 - gi);
      dzrow[static_cast<std::size_t>(H + j)] = dgf * gf * (1.0 - gf);
      dzrow[static_cast<std::size_t>(2 * H + j)] = dgg * (1.0 - gg * gg);
      dzrow[static_cast<std::size_t>(3 * H + j)] = dgo * go * (1.0 - go);
    }
    for (int j = 0; j < 4 * H; ++j) dz(t, j) = dzrow[static_cast<std::size_t>(j)];
    matvec_t(wh.data(), 4 * H, H, dzrow.data(), dh_rec.data());
    for (int j = 0; j < H; ++j) dh_next[static_cast<std::size_t>(j)] = dh_rec[static_cast<std::size_t>(j)];
  }

  // batched parameter gradients from the stored gate gradients
  gemm_tn(dz.data(), valid, 4 * H, x.data(), input_dim, wx.grad().data());
  Tensor hprev(valid, H);
  for (int t = 1; t < valid; ++t) {
    for (int j = 0; j < H; ++j) hprev(t, j) = cache.hs(t - 1, j);
  }
  gemm_tn(dz.data(), valid, 4 * H, hprev.data(), H, wh.grad().data());
  auto& db = b.grad();
  for (int j = 0; j < 4 * H; ++j) {
    double acc = 0.0;
    for (int t = 0; t < valid; ++t) acc += dz(t, j);
    db[static_cast<std::size_t>(j)] += acc;
  }
  if (dx != nullptr) {
    Tensor tmp(valid, input_dim);
    gemm_nn(dz.data(), valid, 4 * H, wx.data(), input_dim, tmp.data());
    for (int t = 0; t < valid; ++t) {
      for (int i = 0; i < input_dim; ++i) (*dx)(t, i) += tmp(t, i);
    }
  }
}

void dropout_forward(const Tensor& x, double p, int valid, Rng& rng,
                     Tensor& out, Tensor& mask_out) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p in [0,1)");
  const int ch = x.cols();
  if (p == 0.0) {
    for (int t = 0; t < valid; ++t) {
      for (int j = 0; j < ch; ++j) {
        out(t, j) = x(t, j);
        mask_out(t, j) = 1.0;
      }
    }
    return;
  }
  const double scale = 1.0 / (1.0 - p);
  for (int t = 0; t < valid; ++t) {
    for (int j = 0; j < ch; ++j) {
      const double keep = rng.uniform() >= p ? scale : 0.0;
      mask_out(t, j) = keep;
      out(t, j) = x(t, j) * keep;
    }
  }
}

void dropout_backward(const Tensor& dout, const Tensor& mask, int valid,
                      Tensor& dx) {
  const int ch = dout.cols();
  for (int t = 0; t < valid; ++t) {
    for (int j = 0; j < ch; ++j) dx(t, j) = dout(t, j) * mask(t, j);
  }
}

}  // namespace affect::num
