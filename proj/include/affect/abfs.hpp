#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "affect/dataset.hpp"
#include "affect/layers.hpp"
#include "affect/optim.hpp"

namespace affect::abfs {

enum class Target { valence, arousal };
std::string to_string(Target t);

struct AttentionTcnConfig {
  int epochs = 1000;
  int kernel_size = 250;
  int dilation_base = 250;
  int hidden_levels = 1;  // levels+1 conv blocks, level i dilated base^i
  double lr = 0.01;
  std::uint64_t seed = 0;
};

struct AttentionScores {
  Target target = Target::valence;
  std::vector<double> raw;
  std::vector<double> normalized;  // min-max rescaled raw; all ones when raw
                                   // is constant (degenerate flag set)
  std::vector<double> loss_curve;
  bool degenerate = false;
};

// Per-target attention network: a trainable attention parameter whose
// channel softmax is element-wise multiplied into every feature, a stack
// of residual depthwise causal convolution blocks with PReLU activations,
// and a per-frame linear head. The softmax makes channels compete for
// attention mass, which is what turns the trained vector into a usable
// relevance ranking; channels never mix before the head.
class AttentionTcn {
 public:
  AttentionTcn(int dim, const AttentionTcnConfig& cfg);

  int dim() const { return dim_; }
  std::vector<num::Param> params();

  // Per-frame predictions for the valid prefix (rows beyond valid are zero).
  num::Tensor predict(const num::Tensor& x, int valid) const;

  // Pooled mask-weighted MSE against one label column across the batch
  // set; accumulates parameter gradients when with_grad is set.
  double loss(std::span<const data::PaddedBatch> batches, int label_col,
              bool with_grad);

  // softmax of the attention parameter: the weight each feature receives
  std::vector<double> attention_raw() const;

 private:
  AttentionTcn(int dim, const AttentionTcnConfig& cfg, num::Rng rng);
  num::Tensor attention_weights() const;

  int dim_;
  AttentionTcnConfig cfg_;
  num::Tensor attention_param_;  // 1 x dim, ones at init
  num::Linear head_;
  std::vector<num::ConvDepthwise> convs_;
  std::vector<num::PRelu> prelus_;
};

std::pair<AttentionTcn, AttentionScores> train_attention_tcn(
    std::span<const data::PaddedBatch> source_batches, Target target,
    const AttentionTcnConfig& cfg);

// Min-max normalizes raw scores into [0,1]; constant raw scores become
// all ones with the degenerate flag set.
AttentionScores make_attention_scores(Target target, std::vector<double> raw,
                                      std::vector<double> loss_curve = {});

// { j : normalized[j] > threshold }, strict. Constant scores select every
// feature with a warning; an empty result is an error.
std::vector<int> select_features(const AttentionScores& scores,
                                 double threshold = 0.25,
                                 std::vector<std::string>* warnings = nullptr);

struct AbfsSelection {
  double threshold = 0.25;
  std::vector<int> valence_selected;
  std::vector<int> arousal_selected;
  std::vector<int> unioned;  // sorted ascending
};

AbfsSelection combine(std::vector<int> valence_selected,
                      std::vector<int> arousal_selected,
                      double threshold = 0.25);

// Column-sliced copies, order preserved.
data::FeatureCatalog reshape_catalog(const data::FeatureCatalog& catalog,
                                     std::span<const int> columns);
data::PaddedBatch reshape_batch(const data::PaddedBatch& batch,
                                std::span<const int> columns);
std::vector<data::PaddedBatch> reshape_batches(
    std::span<const data::PaddedBatch> batches, std::span<const int> columns);
data::FrameSeriesSample reshape_sample(const data::FrameSeriesSample& sample,
                                       std::span<const int> columns);
std::vector<data::FrameSeriesSample> reshape_domain(
    std::span<const data::FrameSeriesSample> samples,
    std::span<const int> columns);

// csv: source_domain,target,feature_id,group,modality,raw_score,
// normalized_score,selected ; txt: per-source table of the selected set
void write_selection_report(const std::string& source_domain,
                            const data::FeatureCatalog& catalog,
                            const AttentionScores& valence,
                            const AttentionScores& arousal,
                            const AbfsSelection& selection,
                            const std::string& csv_path,
                            const std::string& txt_path);

void save_selection_json(const AbfsSelection& selection,
                         const data::FeatureCatalog& catalog,
                         const std::string& path);
AbfsSelection load_selection_json(const std::string& path);

}  // namespace affect::abfs
