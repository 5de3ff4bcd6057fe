#include "affect/gradcheck_suite.hpp"

#include <cmath>
#include <functional>

#include "affect/abfs.hpp"
#include "affect/layers.hpp"
#include "affect/losses.hpp"
#include "affect/optim.hpp"
#include "affect/regressor.hpp"
#include "affect/rng.hpp"

namespace affect::num {

namespace {

constexpr int kLen = 20;
constexpr int kDim = 4;
constexpr int kHidden = 8;

Tensor random_tensor(int rows, int cols, Rng& rng, double scale = 1.0) {
  Tensor t(rows, cols);
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

data::PaddedBatch random_batch(Rng& rng, int len = kLen, int dim = kDim) {
  data::PaddedBatch b;
  b.features = random_tensor(len, dim, rng);
  b.labels = Tensor(len, 2);
  for (int t = 0; t < len; ++t) {
    b.labels(t, 0) = rng.uniform();
    b.labels(t, 1) = rng.uniform();
  }
  b.mask.assign(static_cast<std::size_t>(len), 1);
  b.valid = len;
  b.has_labels = true;
  b.sample_id = "gc";
  b.domain = "gc";
  return b;
}

// 0.5 * sum(out^2) turns any op output into a scalar whose gradient with
// respect to the output is the output itself
double half_sq(const Tensor& t, int valid) {
  double s = 0.0;
  for (int r = 0; r < valid; ++r) {
    for (int c = 0; c < t.cols(); ++c) s += t(r, c) * t(r, c);
  }
  return 0.5 * s;
}

void add_into_grad(Tensor& target, const Tensor& src) {
  auto& g = target.grad();
  const auto& v = src.values();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += v[i];
}

GradCheckCase run_case(const std::string& name,
                       const std::function<double(bool)>& eval,
                       std::span<const Param> params, double tol) {
  GradCheckCase c;
  c.name = name;
  const GradCheckResult r = grad_check(eval, params);
  c.max_rel_err = r.max_rel_err;
  c.worst_param = r.worst_param;
  c.pass = r.max_rel_err < tol;
  return c;
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(int seeds, double tol) {
  std::vector<GradCheckCase> cases;

  for (int seed = 0; seed < seeds; ++seed) {
    const std::string tag = "[seed" + std::to_string(seed) + "]";
    const std::uint64_t base =
        derive_seed(1000, "gradcheck", static_cast<std::uint64_t>(seed));

    {  // depthwise causal conv: w, b, and the input
      Rng rng(derive_seed(base, "conv"));
      ConvDepthwise conv(kDim, 3, 2, rng);
      Tensor x = random_tensor(kLen, kDim, rng);
      auto eval = [&](bool with_grad) {
        Tensor out(kLen, kDim);
        conv.forward(x, kLen, out);
        if (with_grad) {
          Tensor dx(kLen, kDim);
          conv.backward(x, out, kLen, &dx);
          add_into_grad(x, dx);
        }
        return half_sq(out, kLen);
      };
      std::vector<Param> params{{"conv.w", &conv.w}, {"conv.b", &conv.b},
                                {"x", &x}};
      cases.push_back(run_case("conv" + tag, eval, params, tol));
    }

    {  // attention elementwise multiply: a and the input
      Rng rng(derive_seed(base, "attention"));
      AttentionVector att(kDim);
      for (double& v : att.a.values()) v = rng.uniform(0.5, 1.5);
      Tensor x = random_tensor(kLen, kDim, rng);
      auto eval = [&](bool with_grad) {
        Tensor out(kLen, kDim);
        att.forward(x, kLen, out);
        if (with_grad) {
          Tensor dx(kLen, kDim);
          att.backward(x, out, kLen, &dx);
          add_into_grad(x, dx);
        }
        return half_sq(out, kLen);
      };
      std::vector<Param> params{{"attention.a", &att.a}, {"x", &x}};
      cases.push_back(run_case("attention" + tag, eval, params, tol));
    }

    {  // channel softmax feeding a weighted sum
      Rng rng(derive_seed(base, "softmax"));
      Tensor a = random_tensor(1, 6, rng);
      Tensor coef = random_tensor(1, 6, rng);
      auto eval = [&](bool with_grad) {
        Tensor s(1, 6);
        softmax_row(a, s);
        double loss = 0.0;
        for (int j = 0; j < 6; ++j) loss += coef(0, j) * s(0, j) * s(0, j);
        if (with_grad) {
          Tensor ds(1, 6);
          for (int j = 0; j < 6; ++j) ds(0, j) = 2.0 * coef(0, j) * s(0, j);
          softmax_row_backward(s, ds, a);
        }
        return loss;
      };
      std::vector<Param> params{{"a", &a}};
      cases.push_back(run_case("softmax" + tag, eval, params, tol));
    }

    {  // prelu: slope and input
      Rng rng(derive_seed(base, "prelu"));
      PRelu act(0.25);
      Tensor z = random_tensor(kLen, kDim, rng);
      auto eval = [&](bool with_grad) {
        Tensor out(kLen, kDim);
        act.forward(z, kLen, out);
        if (with_grad) {
          Tensor dz(kLen, kDim);
          act.backward(z, out, kLen, dz);
          add_into_grad(z, dz);
        }
        return half_sq(out, kLen);
      };
      std::vector<Param> params{{"prelu.slope", &act.slope}, {"z", &z}};
      cases.push_back(run_case("prelu" + tag, eval, params, tol));
    }

    {  // linear head
      Rng rng(derive_seed(base, "linear"));
      Linear lin(kDim, 2, rng);
      Tensor x = random_tensor(kLen, kDim, rng);
      auto eval = [&](bool with_grad) {
        Tensor out(kLen, 2);
        lin.forward(x, kLen, out);
        if (with_grad) {
          Tensor dx(kLen, kDim);
          lin.backward(x, out, kLen, &dx);
          add_into_grad(x, dx);
        }
        return half_sq(out, kLen);
      };
      std::vector<Param> params{{"linear.w", &lin.w}, {"linear.b", &lin.b},
                                {"x", &x}};
      cases.push_back(run_case("linear" + tag, eval, params, tol));
    }

    {  // lstm layer through time: wx, wh, b, and the input
      Rng rng(derive_seed(base, "lstm"));
      const int len = 5, dim = 4, hidden = 3;
      LstmLayer lstm(dim, hidden, rng);
      Tensor x = random_tensor(len, dim, rng);
      auto eval = [&](bool with_grad) {
        Tensor h(len, hidden);
        LstmLayer::Cache cache{Tensor(len, 4 * hidden), Tensor(len, hidden),
                               Tensor(len, hidden), Tensor(len, hidden)};
        lstm.forward(x, len, h, &cache);
        if (with_grad) {
          Tensor dx(len, dim);
          lstm.backward(x, cache, h, len, &dx);
          add_into_grad(x, dx);
        }
        return half_sq(h, len);
      };
      std::vector<Param> params{{"lstm.wx", &lstm.wx}, {"lstm.wh", &lstm.wh},
                                {"lstm.b", &lstm.b}, {"x", &x}};
      cases.push_back(run_case("lstm" + tag, eval, params, tol));
    }

    {  // dropout with a fixed mask stream
      Rng rng(derive_seed(base, "dropout"));
      Tensor x = random_tensor(kLen, kDim, rng);
      const std::uint64_t mask_seed = derive_seed(base, "dropout-mask");
      auto eval = [&](bool with_grad) {
        Rng mask_rng(mask_seed);
        Tensor out(kLen, kDim), mask(kLen, kDim);
        dropout_forward(x, 0.1, kLen, mask_rng, out, mask);
        if (with_grad) {
          Tensor dx(kLen, kDim);
          dropout_backward(out, mask, kLen, dx);
          add_into_grad(x, dx);
        }
        return half_sq(out, kLen);
      };
      std::vector<Param> params{{"x", &x}};
      cases.push_back(run_case("dropout" + tag, eval, params, tol));
    }

    {  // masked mse on sigmoid outputs
      Rng rng(derive_seed(base, "mse"));
      Tensor x = random_tensor(kLen, 2, rng);
      Tensor y(kLen, 2);
      for (double& v : y.values()) v = rng.uniform();
      std::vector<std::uint8_t> mask(static_cast<std::size_t>(kLen), 1);
      for (int t = kLen / 2; t < kLen; ++t) mask[static_cast<std::size_t>(t)] = 0;
      const long long n_valid = kLen / 2;
      auto eval = [&](bool with_grad) {
        Tensor pred(kLen, 2);
        for (int t = 0; t < kLen; ++t) {
          for (int c = 0; c < 2; ++c) pred(t, c) = sigmoid(x(t, c));
        }
        if (with_grad) {
          auto& g = x.grad();
          for (int t = 0; t < kLen; ++t) {
            if (!mask[static_cast<std::size_t>(t)]) continue;
            for (int c = 0; c < 2; ++c) {
              const double p = pred(t, c);
              const double d =
                  (p - y(t, c)) / static_cast<double>(n_valid) * p * (1.0 - p);
              g[static_cast<std::size_t>(t) * 2 + static_cast<std::size_t>(c)] += d;
            }
          }
        }
        return mse(pred, y, mask);
      };
      std::vector<Param> params{{"x", &x}};
      cases.push_back(run_case("sigmoid-mse" + tag, eval, params, tol));
    }

    {  // pooled concordance loss
      Rng rng(derive_seed(base, "ccc"));
      Tensor x = random_tensor(kLen, 2, rng);
      Tensor y(kLen, 2);
      for (double& v : y.values()) v = rng.uniform();
      std::vector<std::uint8_t> mask(static_cast<std::size_t>(kLen), 1);
      mask[3] = 0;
      auto eval = [&](bool with_grad) {
        CccObjective obj(2);
        for (int t = 0; t < kLen; ++t) {
          if (!mask[static_cast<std::size_t>(t)]) continue;
          for (int c = 0; c < 2; ++c) obj.add(x(t, c), y(t, c), c);
        }
        if (with_grad) {
          auto& g = x.grad();
          for (int t = 0; t < kLen; ++t) {
            if (!mask[static_cast<std::size_t>(t)]) continue;
            for (int c = 0; c < 2; ++c) {
              g[static_cast<std::size_t>(t) * 2 + static_cast<std::size_t>(c)] +=
                  obj.dpred(c, x(t, c), y(t, c));
            }
          }
        }
        return obj.loss();
      };
      std::vector<Param> params{{"x", &x}};
      cases.push_back(run_case("ccc-loss" + tag, eval, params, tol));
    }

    {  // full attention network, pooled mse over two batches
      Rng rng(derive_seed(base, "tcn-net"));
      abfs::AttentionTcnConfig cfg;
      cfg.epochs = 1;
      cfg.kernel_size = 3;
      cfg.dilation_base = 2;
      cfg.hidden_levels = 1;
      cfg.seed = derive_seed(base, "tcn-net-init");
      abfs::AttentionTcn net(kDim, cfg);
      std::vector<data::PaddedBatch> batches{random_batch(rng),
                                             random_batch(rng)};
      auto eval = [&](bool with_grad) {
        return net.loss(batches, 0, with_grad);
      };
      auto params = net.params();
      cases.push_back(run_case("attention-tcn" + tag, eval, params, tol));
    }

    {  // full regressor with dropout active, both loss families
      Rng rng(derive_seed(base, "reg-net"));
      std::vector<data::PaddedBatch> batches{random_batch(rng),
                                             random_batch(rng)};
      for (auto kind : {reg::LossKind::rmse, reg::LossKind::rmse_ccc}) {
        reg::LstmRegressor net(kDim, kHidden, derive_seed(base, "reg-init"));
        auto eval = [&](bool with_grad) {
          return net.loss(batches, kind, 0.1, derive_seed(base, "reg-drop"), 1,
                          with_grad);
        };
        auto params = net.params();
        cases.push_back(run_case(
            "lstm-regressor-" + reg::to_string(kind) + tag, eval, params, tol));
      }
    }
  }
  return cases;
}

}  // namespace affect::num
