#include "affect/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "affect/checkpoint.hpp"
#include "affect/csv.hpp"
#include "affect/losses.hpp"
#include "affect/rng.hpp"

namespace affect::reg {

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::rmse: return "rmse";
    case LossKind::ccc: return "ccc";
    case LossKind::rmse_ccc: return "rmse+ccc";
  }
  return "rmse";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "rmse") return LossKind::rmse;
  if (s == "ccc") return LossKind::ccc;
  if (s == "rmse+ccc") return LossKind::rmse_ccc;
  throw std::runtime_error("unknown loss kind: " + s +
                           " (expected rmse, ccc, or rmse+ccc)");
}

EarlyStopper::EarlyStopper(int patience, double min_delta)
    : patience_(patience), min_delta_(min_delta) {
  if (patience < 1) throw std::invalid_argument("early stop: patience >= 1");
}

bool EarlyStopper::update(int epoch, double val_loss) {
  if (val_loss < best_ - min_delta_) {
    best_ = val_loss;
    best_epoch_ = epoch;
    since_improvement_ = 0;
    improved_last_ = true;
    return false;
  }
  improved_last_ = false;
  ++since_improvement_;
  return since_improvement_ >= patience_;
}

LstmRegressor::LstmRegressor(int input_dim, int hidden,
                             std::uint64_t init_seed)
    : input_dim_(input_dim),
      hidden_(hidden),
      lstm_([&] {
        num::Rng rng(num::derive_seed(init_seed, "lstm-init"));
        return num::LstmLayer(input_dim, hidden, rng);
      }()),
      head_([&] {
        num::Rng rng(num::derive_seed(init_seed, "head-init"));
        return num::Linear(hidden, 2, rng);
      }()) {
  if (input_dim < 1 || hidden < 1) {
    throw std::invalid_argument("lstm regressor: dims must be >= 1");
  }
}

std::vector<num::Param> LstmRegressor::params() {
  return {{"lstm.wx", &lstm_.wx},
          {"lstm.wh", &lstm_.wh},
          {"lstm.b", &lstm_.b},
          {"head.w", &head_.w},
          {"head.b", &head_.b}};
}

namespace {

void check_width(int expected, const data::PaddedBatch& batch) {
  if (batch.features.cols() != expected) {
    throw std::runtime_error(
        "regressor: input width mismatch, expected " +
        std::to_string(expected) + " features, got " +
        std::to_string(batch.features.cols()) + " (sample " + batch.sample_id +
        ")");
  }
}

}  // namespace

double LstmRegressor::loss(std::span<const data::PaddedBatch> batches,
                           LossKind kind, double dropout_p,
                           std::uint64_t run_seed, int epoch, bool with_grad) {
  long long total = 0;
  for (const auto& b : batches) {
    check_width(input_dim_, b);
    if (!b.has_labels) {
      throw std::runtime_error("regressor: batch " + b.sample_id +
                               " has no labels");
    }
    total += b.valid;
  }
  if (total == 0) throw std::runtime_error("regressor: no valid frames");

  const bool needs_ccc = kind != LossKind::rmse;
  num::CccObjective ccc_obj(2);

  // forward for one batch; dropout masks derive from (run_seed, epoch,
  // batch index) so repeated passes are identical
  auto forward = [&](const data::PaddedBatch& batch, std::size_t index,
                     num::LstmLayer::Cache* cache, num::Tensor* h_out,
                     num::Tensor* dropped, num::Tensor* drop_mask,
                     num::Tensor* pred) {
    const int valid = batch.valid;
    lstm_.forward(batch.features, valid, *h_out, cache);
    num::Rng drop_rng(num::derive_seed(
        num::derive_seed(run_seed, "dropout", static_cast<std::uint64_t>(epoch)),
        "batch", static_cast<std::uint64_t>(index)));
    num::dropout_forward(*h_out, dropout_p, valid, drop_rng, *dropped,
                         *drop_mask);
    num::Tensor logits(valid, 2);
    head_.forward(*dropped, valid, logits);
    for (int t = 0; t < valid; ++t) {
      for (int c = 0; c < 2; ++c) {
        (*pred)(t, c) = num::sigmoid(logits(t, c));
      }
    }
  };

  // concordance needs pooled moments before any gradient, so make a
  // moment-collection pass first
  if (needs_ccc) {
    for (std::size_t i = 0; i < batches.size(); ++i) {
      const auto& batch = batches[i];
      const int valid = batch.valid;
      num::Tensor h(valid, hidden_), dropped(valid, hidden_),
          mask(valid, hidden_), pred(valid, 2);
      forward(batch, i, nullptr, &h, &dropped, &mask, &pred);
      for (int t = 0; t < valid; ++t) {
        for (int c = 0; c < 2; ++c) ccc_obj.add(pred(t, c), batch.labels(t, c), c);
      }
    }
  }

  double sq_sum = 0.0;
  for (std::size_t i = 0; i < batches.size(); ++i) {
    const auto& batch = batches[i];
    const int valid = batch.valid;
    num::LstmLayer::Cache cache{num::Tensor(valid, 4 * hidden_),
                                num::Tensor(valid, hidden_),
                                num::Tensor(valid, hidden_),
                                num::Tensor(valid, hidden_)};
    num::Tensor h(valid, hidden_), dropped(valid, hidden_),
        mask(valid, hidden_), pred(valid, 2);
    forward(batch, i, with_grad ? &cache : nullptr, &h, &dropped, &mask,
            &pred);

    num::Tensor dpred(valid, 2);
    for (int t = 0; t < valid; ++t) {
      for (int c = 0; c < 2; ++c) {
        const double p = pred(t, c);
        const double y = batch.labels(t, c);
        const double e = p - y;
        sq_sum += e * e;
        if (!with_grad) continue;
        double g = 0.0;
        if (kind != LossKind::ccc) {
          g += e / static_cast<double>(total);  // d mean(e^2)/2cols
        }
        if (needs_ccc) {
          g += ccc_obj.dpred(c, p, y);
        }
        // through the sigmoid
        dpred(t, c) = g * p * (1.0 - p);
      }
    }
    if (!with_grad) continue;

    num::Tensor ddropped(valid, hidden_);
    head_.backward(dropped, dpred, valid, &ddropped);
    num::Tensor dh(valid, hidden_);
    num::dropout_backward(ddropped, mask, valid, dh);
    lstm_.backward(batch.features, cache, dh, valid, nullptr);
  }

  const double mse_part = sq_sum / (2.0 * static_cast<double>(total));
  switch (kind) {
    case LossKind::rmse: return mse_part;
    case LossKind::ccc: return ccc_obj.loss();
    case LossKind::rmse_ccc: return mse_part + ccc_obj.loss();
  }
  return mse_part;
}

double LstmRegressor::eval_loss(std::span<const data::PaddedBatch> batches,
                                LossKind kind) const {
  long long total = 0;
  for (const auto& b : batches) total += b.valid;
  if (total == 0) throw std::runtime_error("regressor: no valid frames");
  double sq_sum = 0.0;
  num::CccObjective ccc_obj(2);
  for (const auto& batch : batches) {
    check_width(input_dim_, batch);
    const num::Tensor pred = forward_eval(batch.features, batch.valid);
    for (int t = 0; t < batch.valid; ++t) {
      for (int c = 0; c < 2; ++c) {
        const double e = pred(t, c) - batch.labels(t, c);
        sq_sum += e * e;
        ccc_obj.add(pred(t, c), batch.labels(t, c), c);
      }
    }
  }
  const double mse_part = sq_sum / (2.0 * static_cast<double>(total));
  switch (kind) {
    case LossKind::rmse: return mse_part;
    case LossKind::ccc: return ccc_obj.loss();
    case LossKind::rmse_ccc: return mse_part + ccc_obj.loss();
  }
  return mse_part;
}

num::Tensor LstmRegressor::forward_eval(const num::Tensor& x,
                                        int valid) const {
  num::Tensor h(valid, hidden_);
  lstm_.forward(x, valid, h, nullptr);
  num::Tensor logits(valid, 2);
  head_.forward(h, valid, logits);
  num::Tensor pred(valid, 2);
  for (int t = 0; t < valid; ++t) {
    for (int c = 0; c < 2; ++c) pred(t, c) = num::sigmoid(logits(t, c));
  }
  return pred;
}

num::Tensor LstmRegressor::predict(const data::PaddedBatch& batch) const {
  check_width(input_dim_, batch);
  const num::Tensor valid_pred = forward_eval(batch.features, batch.valid);
  num::Tensor out(batch.features.rows(), 2);
  for (int t = 0; t < batch.valid; ++t) {
    out(t, 0) = valid_pred(t, 0);
    out(t, 1) = valid_pred(t, 1);
  }
  return out;
}

TrainedRegressor train(std::span<const data::PaddedBatch> train_batches,
                       const LstmRegressorConfig& cfg,
                       std::vector<int> selection,
                       data::StandardizationStats stats) {
  if (train_batches.empty()) {
    throw std::runtime_error("regressor: no training batches");
  }
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
    throw std::invalid_argument("regressor: dropout must be in [0,1)");
  }
  const int dim = train_batches[0].features.cols();

  // sample-level validation split
  std::vector<const data::PaddedBatch*> train_set, val_set;
  if (cfg.val_fraction > 0.0) {
    const int n = static_cast<int>(train_batches.size());
    int n_val = static_cast<int>(std::lround(cfg.val_fraction * n));
    n_val = std::max(1, n_val);
    if (n - n_val < 1) {
      throw std::runtime_error(
          "regressor: validation split leaves no training sample (" +
          std::to_string(n) + " samples, fraction " +
          data::format_double(cfg.val_fraction) + ")");
    }
    std::vector<int> order(train_batches.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    num::Rng rng(num::derive_seed(cfg.seed, "val-split"));
    rng.shuffle(order);
    for (int i = 0; i < n; ++i) {
      (i < n_val ? val_set : train_set)
          .push_back(&train_batches[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    }
  } else {
    for (const auto& b : train_batches) train_set.push_back(&b);
  }
  std::vector<data::PaddedBatch> train_copy, val_copy;
  for (const auto* p : train_set) train_copy.push_back(*p);
  for (const auto* p : val_set) val_copy.push_back(*p);

  TrainedRegressor out{LstmRegressor(dim, cfg.hidden, cfg.seed),
                       cfg,
                       {},
                       -1,
                       0.0,
                       std::move(selection),
                       std::move(stats)};
  auto params = out.model.params();
  num::Adam adam(params, {.lr = cfg.lr});
  EarlyStopper stopper(cfg.patience, cfg.min_delta);
  const bool use_val = !val_copy.empty();

  std::vector<std::vector<double>> best_snapshot;
  auto snapshot = [&] {
    best_snapshot.clear();
    for (const auto& p : params) best_snapshot.push_back(p.tensor->values());
  };

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    adam.zero_grad();
    const double train_loss =
        out.model.loss(train_copy, cfg.loss, cfg.dropout, cfg.seed, epoch, true);
    if (!std::isfinite(train_loss)) {
      throw std::runtime_error("regressor diverged at epoch " +
                               std::to_string(epoch) + " (lr=" +
                               data::format_double(cfg.lr) + ")");
    }
    num::clip_global_norm(params, cfg.clip_norm);
    adam.step();

    double val_loss = std::numeric_limits<double>::quiet_NaN();
    bool stop = false;
    if (use_val) {
      val_loss = out.model.eval_loss(val_copy, cfg.loss);
      stop = stopper.update(epoch, val_loss);
      if (stopper.improved_last()) snapshot();
    }
    out.history.push_back({epoch, train_loss, val_loss});
    if (stop) break;
  }

  if (use_val && !best_snapshot.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i].tensor->values() = best_snapshot[i];
    }
    out.best_epoch = stopper.best_epoch();
    out.best_val_loss = stopper.best_value();
  } else {
    out.best_epoch = static_cast<int>(out.history.size());
    out.best_val_loss = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

std::vector<Prediction> predict(const LstmRegressor& model,
                                std::span<const data::PaddedBatch> batches) {
  std::vector<Prediction> out;
  out.reserve(batches.size());
  for (const auto& batch : batches) {
    Prediction p;
    p.sample_id = batch.sample_id;
    p.values = model.predict(batch);
    p.mask = batch.mask;
    p.valid = batch.valid;
    out.push_back(std::move(p));
  }
  return out;
}

void write_history_csv(const std::string& path,
                       std::span<const TrainHistoryRow> history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "epoch,train_loss,val_loss\n";
  for (const auto& row : history) {
    out << row.epoch << ',' << data::format_double(row.train_loss) << ','
        << data::format_double(row.val_loss) << '\n';
  }
}

void save_checkpoint(const TrainedRegressor& trained,
                     const std::vector<std::string>& catalog_ids,
                     const std::string& path) {
  nlohmann::json meta;
  meta["input_dim"] = trained.model.input_dim();
  meta["hidden"] = trained.model.hidden();
  meta["loss"] = to_string(trained.config.loss);
  meta["dropout"] = trained.config.dropout;
  meta["selection"] = trained.selection;
  meta["catalog_ids"] = catalog_ids;
  meta["standardizer"] = {{"mean", trained.stats.mean},
                          {"stddev", trained.stats.stddev}};
  meta["best_epoch"] = trained.best_epoch;
  auto params = const_cast<TrainedRegressor&>(trained).model.params();
  num::save_checkpoint(path, params, std::move(meta));
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  const nlohmann::json meta = num::load_checkpoint_meta(path);
  LoadedCheckpoint out{
      LstmRegressor(meta.at("input_dim").get<int>(),
                    meta.at("hidden").get<int>(), 0),
      {},
      meta.at("selection").get<std::vector<int>>(),
      meta.at("catalog_ids").get<std::vector<std::string>>(),
      {}};
  out.config.hidden = meta.at("hidden").get<int>();
  out.config.loss = loss_kind_from_string(meta.at("loss").get<std::string>());
  out.config.dropout = meta.at("dropout").get<double>();
  out.stats.mean = meta.at("standardizer").at("mean").get<std::vector<double>>();
  out.stats.stddev =
      meta.at("standardizer").at("stddev").get<std::vector<double>>();
  auto params = out.model.params();
  num::load_checkpoint(path, params);
  return out;
}

}  // namespace affect::reg
