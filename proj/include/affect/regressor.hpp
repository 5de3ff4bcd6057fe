#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "affect/dataset.hpp"
#include "affect/layers.hpp"
#include "affect/optim.hpp"

namespace affect::reg {

enum class LossKind { rmse, ccc, rmse_ccc };
std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

struct LstmRegressorConfig {
  int hidden = 256;
  double dropout = 0.1;
  double lr = 0.1;
  int max_epochs = 1000;
  int patience = 10;
  double min_delta = 1e-4;
  double val_fraction = 0.2;  // 0 trains to max_epochs without a holdout
  double clip_norm = 5.0;
  LossKind loss = LossKind::rmse;
  std::uint64_t seed = 0;
};

// Tracks the best validation loss; update() returns true once no
// improvement better than min_delta has been seen for `patience` epochs.
class EarlyStopper {
 public:
  EarlyStopper(int patience, double min_delta);
  bool update(int epoch, double val_loss);
  bool improved_last() const { return improved_last_; }
  int best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }

 private:
  int patience_;
  double min_delta_;
  double best_ = std::numeric_limits<double>::infinity();
  int best_epoch_ = -1;
  int since_improvement_ = 0;
  bool improved_last_ = false;
};

// Single LSTM layer -> dropout -> 2-unit linear head -> sigmoid; both
// affect targets share the trunk and the loss weights them equally.
class LstmRegressor {
 public:
  LstmRegressor(int input_dim, int hidden, std::uint64_t init_seed);

  int input_dim() const { return input_dim_; }
  int hidden() const { return hidden_; }
  std::vector<num::Param> params();

  // Training-mode objective pooled over the batch set. Dropout masks are
  // re-derived from (run_seed, epoch, batch index), so the two-pass
  // concordance path sees identical masks in both passes.
  double loss(std::span<const data::PaddedBatch> batches, LossKind kind,
              double dropout_p, std::uint64_t run_seed, int epoch,
              bool with_grad);

  // Evaluation-mode loss (dropout off).
  double eval_loss(std::span<const data::PaddedBatch> batches,
                   LossKind kind) const;

  // Per-frame [0,1] predictions; rows beyond the valid prefix are zero.
  num::Tensor predict(const data::PaddedBatch& batch) const;

 private:
  num::Tensor forward_eval(const num::Tensor& x, int valid) const;

  int input_dim_;
  int hidden_;
  num::LstmLayer lstm_;
  num::Linear head_;
};

struct TrainHistoryRow {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN when no validation split
};

struct TrainedRegressor {
  LstmRegressor model;
  LstmRegressorConfig config;
  std::vector<TrainHistoryRow> history;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  std::vector<int> selection;  // source-catalog columns the model consumes
  data::StandardizationStats stats;  // over the original feature axis
};

// Full-batch Adam with gradient clipping and early stopping on a held-out
// validation split; the best-epoch parameters are restored at the end.
TrainedRegressor train(std::span<const data::PaddedBatch> train_batches,
                       const LstmRegressorConfig& cfg,
                       std::vector<int> selection = {},
                       data::StandardizationStats stats = {});

struct Prediction {
  std::string sample_id;
  num::Tensor values;  // L x 2
  std::vector<std::uint8_t> mask;
  int valid = 0;
};

std::vector<Prediction> predict(const LstmRegressor& model,
                                std::span<const data::PaddedBatch> batches);

void write_history_csv(const std::string& path,
                       std::span<const TrainHistoryRow> history);

void save_checkpoint(const TrainedRegressor& trained,
                     const std::vector<std::string>& catalog_ids,
                     const std::string& path);

struct LoadedCheckpoint {
  LstmRegressor model;
  LstmRegressorConfig config;
  std::vector<int> selection;
  std::vector<std::string> catalog_ids;
  data::StandardizationStats stats;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace affect::reg
