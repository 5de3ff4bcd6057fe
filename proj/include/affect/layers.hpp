#pragma once

#include <vector>

#include "affect/rng.hpp"
#include "affect/tensor.hpp"

namespace affect::num {

// All layers compute only the first `valid` rows of their input and leave
// the rest at zero; padded frames never enter the math. Backward methods
// accumulate parameter gradients (callers zero them per step) and return
// or accumulate input gradients explicitly.

// Depthwise causal 1-D convolution: channels never mix, left context only.
struct ConvDepthwise {
  Tensor w;  // taps x ch, tap 0 reads the oldest frame
  Tensor b;  // 1 x ch
  int dilation = 1;

  ConvDepthwise(int ch, int taps, int dilation, Rng& rng);
  void forward(const Tensor& x, int valid, Tensor& out) const;
  // dx may be null when input gradients are not needed
  void backward(const Tensor& x, const Tensor& dout, int valid, Tensor* dx);
};

// Trainable per-feature attention vector, multiplied elementwise into
// every frame.
struct AttentionVector {
  Tensor a;  // 1 x ch, initialized to ones

  explicit AttentionVector(int ch);
  void forward(const Tensor& x, int valid, Tensor& out) const;
  void backward(const Tensor& x, const Tensor& dout, int valid, Tensor* dx);
};

// PReLU with a single trainable slope for the negative part.
struct PRelu {
  Tensor slope;  // 1 x 1

  explicit PRelu(double init = 0.25);
  void forward(const Tensor& z, int valid, Tensor& out) const;
  void backward(const Tensor& z, const Tensor& dout, int valid, Tensor& dz);
};

// Per-frame linear map, used as the output head of both networks.
struct Linear {
  Tensor w;  // out x in
  Tensor b;  // 1 x out

  Linear(int in, int out, Rng& rng);
  void forward(const Tensor& x, int valid, Tensor& out) const;
  void backward(const Tensor& x, const Tensor& dout, int valid, Tensor* dx);
};

// Single-layer LSTM over the valid prefix; standard gate recurrence with
// zero initial state.
struct LstmLayer {
  int input_dim = 0;
  int hidden = 0;
  Tensor wx;  // 4H x in, gate order [i, f, g, o]
  Tensor wh;  // 4H x H
  Tensor b;   // 1 x 4H, forget-gate section initialized to +1

  LstmLayer(int input_dim, int hidden, Rng& rng);

  struct Cache {
    Tensor gates;   // L x 4H, post-activation
    Tensor cells;   // L x H
    Tensor tanh_c;  // L x H
    Tensor hs;      // L x H
  };

  void forward(const Tensor& x, int valid, Tensor& h_out, Cache* cache) const;
  // dh_ext holds dLoss/dh_t from the layers above; dx may be null
  void backward(const Tensor& x, const Cache& cache, const Tensor& dh_ext,
                int valid, Tensor* dx);
};

double sigmoid(double x);

// Row softmax over a 1 x D tensor, and its reverse pass; used to turn the
// attention parameter into competing per-channel weights.
void softmax_row(const Tensor& a, Tensor& s);
// ds is dLoss/ds; accumulates dLoss/da into da
void softmax_row_backward(const Tensor& s, const Tensor& ds, Tensor& da);

// Inverted dropout over the valid prefix. Draws exactly valid*cols
// uniforms from rng, so identical valid regions give identical masks
// regardless of padding. mask_out receives the survivor scale factors.
void dropout_forward(const Tensor& x, double p, int valid, Rng& rng,
                     Tensor& out, Tensor& mask_out);
void dropout_backward(const Tensor& dout, const Tensor& mask, int valid,
                      Tensor& dx);

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init used by all weight
// matrices.
void init_uniform_fan_in(Tensor& t, int fan_in, Rng& rng);

}  // namespace affect::num
