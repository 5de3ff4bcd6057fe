#include "affect/abfs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "affect/csv.hpp"
#include "affect/rng.hpp"

namespace affect::abfs {

std::string to_string(Target t) {
  return t == Target::valence ? "valence" : "arousal";
}

AttentionTcn::AttentionTcn(int dim, const AttentionTcnConfig& cfg)
    : AttentionTcn(dim, cfg, num::Rng(num::derive_seed(cfg.seed, "tcn-init"))) {}

AttentionTcn::AttentionTcn(int dim, const AttentionTcnConfig& cfg, num::Rng rng)
    : dim_(dim), cfg_(cfg), attention_param_(1, dim, 1.0), head_(dim, 1, rng) {
  if (dim < 1) throw std::invalid_argument("attention tcn: dim must be >= 1");
  if (cfg.kernel_size < 1 || cfg.dilation_base < 1 || cfg.hidden_levels < 0 ||
      cfg.epochs < 1) {
    throw std::invalid_argument("attention tcn: config out of range");
  }
  int dilation = 1;
  for (int level = 0; level <= cfg.hidden_levels; ++level) {
    convs_.emplace_back(dim, cfg.kernel_size, dilation, rng);
    prelus_.emplace_back(0.25);
    dilation *= cfg.dilation_base;
  }
}

std::vector<num::Param> AttentionTcn::params() {
  std::vector<num::Param> out;
  out.push_back({"attention", &attention_param_});
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    const std::string tag = "conv" + std::to_string(i);
    out.push_back({tag + ".w", &convs_[i].w});
    out.push_back({tag + ".b", &convs_[i].b});
    out.push_back({"prelu" + std::to_string(i) + ".slope", &prelus_[i].slope});
  }
  out.push_back({"head.w", &head_.w});
  out.push_back({"head.b", &head_.b});
  return out;
}

num::Tensor AttentionTcn::attention_weights() const {
  num::Tensor s(1, dim_);
  num::softmax_row(attention_param_, s);
  return s;
}

num::Tensor AttentionTcn::predict(const num::Tensor& x, int valid) const {
  const num::Tensor s = attention_weights();
  num::Tensor cur(valid, dim_);
  for (int t = 0; t < valid; ++t) {
    for (int j = 0; j < dim_; ++j) cur(t, j) = x(t, j) * s(0, j);
  }
  num::Tensor z(valid, dim_);
  num::Tensor act(valid, dim_);
  for (std::size_t level = 0; level < convs_.size(); ++level) {
    convs_[level].forward(cur, valid, z);
    prelus_[level].forward(z, valid, act);
    for (int t = 0; t < valid; ++t) {
      for (int j = 0; j < dim_; ++j) cur(t, j) += act(t, j);
    }
  }
  num::Tensor pred(valid, 1);
  head_.forward(cur, valid, pred);
  return pred;
}

double AttentionTcn::loss(std::span<const data::PaddedBatch> batches,
                          int label_col, bool with_grad) {
  long long total = 0;
  for (const auto& b : batches) total += b.valid;
  if (total == 0) throw std::runtime_error("attention tcn: no valid frames");

  double loss_sum = 0.0;
  const int levels = static_cast<int>(convs_.size());
  const num::Tensor s = attention_weights();
  num::Tensor ds(1, dim_);  // dLoss/ds pooled over all batches

  for (const auto& batch : batches) {
    const int valid = batch.valid;
    if (valid == 0) continue;

    // forward, keeping per-level activations for the backward sweep
    num::Tensor att_out(valid, dim_);
    for (int t = 0; t < valid; ++t) {
      for (int j = 0; j < dim_; ++j) {
        att_out(t, j) = batch.features(t, j) * s(0, j);
      }
    }
    std::vector<num::Tensor> ins;      // block inputs
    std::vector<num::Tensor> preacts;  // conv outputs
    ins.reserve(static_cast<std::size_t>(levels));
    preacts.reserve(static_cast<std::size_t>(levels));
    num::Tensor cur = att_out;
    for (int level = 0; level < levels; ++level) {
      ins.push_back(cur);
      num::Tensor z(valid, dim_);
      convs_[static_cast<std::size_t>(level)].forward(cur, valid, z);
      num::Tensor act(valid, dim_);
      prelus_[static_cast<std::size_t>(level)].forward(z, valid, act);
      for (int t = 0; t < valid; ++t) {
        for (int j = 0; j < dim_; ++j) cur(t, j) += act(t, j);
      }
      preacts.push_back(std::move(z));
    }
    num::Tensor pred(valid, 1);
    head_.forward(cur, valid, pred);

    num::Tensor dpred(valid, 1);
    for (int t = 0; t < valid; ++t) {
      const double e = pred(t, 0) - batch.labels(t, label_col);
      loss_sum += e * e;
      dpred(t, 0) = 2.0 * e / static_cast<double>(total);
    }
    if (!with_grad) continue;

    num::Tensor dcur(valid, dim_);
    head_.backward(cur, dpred, valid, &dcur);
    num::Tensor dz(valid, dim_);
    for (int level = levels - 1; level >= 0; --level) {
      // residual: dcur feeds both the block input and the activation path
      prelus_[static_cast<std::size_t>(level)].backward(
          preacts[static_cast<std::size_t>(level)], dcur, valid, dz);
      convs_[static_cast<std::size_t>(level)].backward(
          ins[static_cast<std::size_t>(level)], dz, valid, &dcur);
    }
    for (int j = 0; j < dim_; ++j) {
      double acc = 0.0;
      for (int t = 0; t < valid; ++t) acc += dcur(t, j) * batch.features(t, j);
      ds(0, j) += acc;
    }
  }
  if (with_grad) {
    num::softmax_row_backward(s, ds, attention_param_);
  }
  return loss_sum / static_cast<double>(total);
}

std::vector<double> AttentionTcn::attention_raw() const {
  return attention_weights().values();
}

AttentionScores make_attention_scores(Target target, std::vector<double> raw,
                                      std::vector<double> loss_curve) {
  AttentionScores s;
  s.target = target;
  s.raw = std::move(raw);
  s.loss_curve = std::move(loss_curve);
  const auto [lo_it, hi_it] = std::minmax_element(s.raw.begin(), s.raw.end());
  const double lo = *lo_it, hi = *hi_it;
  s.normalized.resize(s.raw.size());
  if (hi - lo <= 0.0) {
    std::fill(s.normalized.begin(), s.normalized.end(), 1.0);
    s.degenerate = true;
  } else {
    for (std::size_t j = 0; j < s.raw.size(); ++j) {
      s.normalized[j] = (s.raw[j] - lo) / (hi - lo);
    }
  }
  return s;
}

std::pair<AttentionTcn, AttentionScores> train_attention_tcn(
    std::span<const data::PaddedBatch> source_batches, Target target,
    const AttentionTcnConfig& cfg) {
  if (source_batches.empty()) {
    throw std::runtime_error("attention tcn: no training batches");
  }
  for (const auto& b : source_batches) {
    if (!b.has_labels) {
      throw std::runtime_error("attention tcn: batch " + b.sample_id +
                               " has no labels");
    }
  }
  const int dim = source_batches[0].features.cols();
  AttentionTcn model(dim, cfg);
  num::Adam adam(model.params(), {.lr = cfg.lr});
  const int label_col = target == Target::valence ? 0 : 1;

  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    adam.zero_grad();
    const double loss = model.loss(source_batches, label_col, true);
    if (!std::isfinite(loss)) {
      throw std::runtime_error(
          "attention tcn diverged at epoch " + std::to_string(epoch) +
          " (kernel=" + std::to_string(cfg.kernel_size) +
          ", dilation=" + std::to_string(cfg.dilation_base) +
          ", lr=" + std::to_string(cfg.lr) + ")");
    }
    adam.step();
    curve.push_back(loss);
  }
  AttentionScores scores =
      make_attention_scores(target, model.attention_raw(), std::move(curve));
  return {std::move(model), std::move(scores)};
}

std::vector<int> select_features(const AttentionScores& scores,
                                 double threshold,
                                 std::vector<std::string>* warnings) {
  std::vector<int> selected;
  for (std::size_t j = 0; j < scores.normalized.size(); ++j) {
    if (scores.normalized[j] > threshold) {
      selected.push_back(static_cast<int>(j));
    }
  }
  if (scores.degenerate && warnings != nullptr) {
    warnings->push_back("attention scores for " + to_string(scores.target) +
                        " are constant; selecting every feature");
  }
  if (selected.empty()) {
    throw std::runtime_error("selection threshold " +
                             data::format_double(threshold) +
                             " excludes all features");
  }
  return selected;
}

AbfsSelection combine(std::vector<int> valence_selected,
                      std::vector<int> arousal_selected, double threshold) {
  AbfsSelection sel;
  sel.threshold = threshold;
  sel.valence_selected = std::move(valence_selected);
  sel.arousal_selected = std::move(arousal_selected);
  std::set<int> u(sel.valence_selected.begin(), sel.valence_selected.end());
  u.insert(sel.arousal_selected.begin(), sel.arousal_selected.end());
  sel.unioned.assign(u.begin(), u.end());
  return sel;
}

data::FeatureCatalog reshape_catalog(const data::FeatureCatalog& catalog,
                                     std::span<const int> columns) {
  data::FeatureCatalog out;
  for (int c : columns) {
    if (c < 0 || c >= catalog.dim()) {
      throw std::out_of_range("reshape: column " + std::to_string(c) +
                              " out of range for catalog of size " +
                              std::to_string(catalog.dim()));
    }
    out.entries.push_back(catalog.entries[static_cast<std::size_t>(c)]);
  }
  return out;
}

data::PaddedBatch reshape_batch(const data::PaddedBatch& batch,
                                std::span<const int> columns) {
  data::PaddedBatch out;
  out.labels = batch.labels;
  out.mask = batch.mask;
  out.valid = batch.valid;
  out.has_labels = batch.has_labels;
  out.sample_id = batch.sample_id;
  out.domain = batch.domain;
  out.features = num::Tensor(batch.features.rows(),
                             static_cast<int>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const int c = columns[k];
    if (c < 0 || c >= batch.features.cols()) {
      throw std::out_of_range("reshape: column index out of range");
    }
    for (int t = 0; t < batch.features.rows(); ++t) {
      out.features(t, static_cast<int>(k)) = batch.features(t, c);
    }
  }
  return out;
}

std::vector<data::PaddedBatch> reshape_batches(
    std::span<const data::PaddedBatch> batches, std::span<const int> columns) {
  std::vector<data::PaddedBatch> out;
  out.reserve(batches.size());
  for (const auto& b : batches) out.push_back(reshape_batch(b, columns));
  return out;
}

data::FrameSeriesSample reshape_sample(const data::FrameSeriesSample& sample,
                                       std::span<const int> columns) {
  data::FrameSeriesSample out;
  out.domain = sample.domain;
  out.subject = sample.subject;
  out.sample_id = sample.sample_id;
  out.labels = sample.labels;
  out.annotator_tracks = sample.annotator_tracks;
  out.features =
      num::Tensor(sample.features.rows(), static_cast<int>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const int c = columns[k];
    if (c < 0 || c >= sample.features.cols()) {
      throw std::out_of_range("reshape: column index out of range");
    }
    for (int t = 0; t < sample.features.rows(); ++t) {
      out.features(t, static_cast<int>(k)) = sample.features(t, c);
    }
  }
  return out;
}

std::vector<data::FrameSeriesSample> reshape_domain(
    std::span<const data::FrameSeriesSample> samples,
    std::span<const int> columns) {
  std::vector<data::FrameSeriesSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(reshape_sample(s, columns));
  return out;
}

void write_selection_report(const std::string& source_domain,
                            const data::FeatureCatalog& catalog,
                            const AttentionScores& valence,
                            const AttentionScores& arousal,
                            const AbfsSelection& selection,
                            const std::string& csv_path,
                            const std::string& txt_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  csv << "source_domain,target,feature_id,group,modality,raw_score,"
         "normalized_score,selected\n";
  auto emit = [&](const AttentionScores& s, const std::vector<int>& sel) {
    std::set<int> chosen(sel.begin(), sel.end());
    for (int j = 0; j < catalog.dim(); ++j) {
      const auto& e = catalog.entries[static_cast<std::size_t>(j)];
      csv << source_domain << ',' << to_string(s.target) << ','
          << e.feature_id << ',' << e.group << ',' << to_string(e.modality)
          << ',' << data::format_double(s.raw[static_cast<std::size_t>(j)])
          << ','
          << data::format_double(s.normalized[static_cast<std::size_t>(j)])
          << ',' << (chosen.count(j) ? 1 : 0) << '\n';
    }
  };
  emit(valence, selection.valence_selected);
  emit(arousal, selection.arousal_selected);

  std::ofstream txt(txt_path);
  if (!txt) throw std::runtime_error("cannot open " + txt_path);
  txt << "Selected features, source " << source_domain << " (threshold "
      << selection.threshold << ")\n";
  int n_audio = 0, n_visual = 0;
  for (int j : selection.unioned) {
    const auto& e = catalog.entries[static_cast<std::size_t>(j)];
    (e.modality == data::Modality::audio ? n_audio : n_visual) += 1;
    txt << "  " << e.feature_id << "  [" << e.group << ", "
        << to_string(e.modality) << "]\n";
  }
  txt << "modality counts: audio=" << n_audio << " visual=" << n_visual
      << "\n";
}

void save_selection_json(const AbfsSelection& selection,
                         const data::FeatureCatalog& catalog,
                         const std::string& path) {
  nlohmann::json j;
  j["threshold"] = selection.threshold;
  j["valence"] = selection.valence_selected;
  j["arousal"] = selection.arousal_selected;
  j["union"] = selection.unioned;
  std::vector<std::string> ids;
  for (int c : selection.unioned) {
    ids.push_back(catalog.entries[static_cast<std::size_t>(c)].feature_id);
  }
  j["feature_ids"] = ids;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(1) << "\n";
}

AbfsSelection load_selection_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  AbfsSelection sel;
  sel.threshold = j.at("threshold").get<double>();
  sel.valence_selected = j.at("valence").get<std::vector<int>>();
  sel.arousal_selected = j.at("arousal").get<std::vector<int>>();
  sel.unioned = j.at("union").get<std::vector<int>>();
  return sel;
}

}  // namespace affect::abfs
