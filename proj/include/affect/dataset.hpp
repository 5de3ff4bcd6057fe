#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affect/tensor.hpp"

namespace affect::data {

enum class Modality { audio, visual };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

struct CatalogEntry {
  std::string feature_id;
  Modality modality = Modality::visual;
  std::string group;
};

// Fixed, ordered feature axis shared by every sample in a store.
struct FeatureCatalog {
  std::vector<CatalogEntry> entries;

  int dim() const { return static_cast<int>(entries.size()); }
  std::vector<std::string> feature_ids() const;
  void validate() const;  // unique, non-empty ids
};

// One recording: per-frame features, optional per-frame labels, optional
// raw per-annotator label tracks.
struct FrameSeriesSample {
  std::string domain;
  std::string subject;
  std::string sample_id;
  num::Tensor features;                 // L x D
  std::optional<num::Tensor> labels;    // L x 2, columns (valence, arousal)
  // one L x 2 track per annotator
  std::optional<std::vector<num::Tensor>> annotator_tracks;

  int frames() const { return features.rows(); }
};

struct DomainStore {
  FeatureCatalog catalog;
  std::vector<FrameSeriesSample> samples;
  std::string manifest_path;

  std::vector<std::string> domains() const;  // sorted unique
  std::vector<int> sample_indices(const std::string& domain) const;
};

struct IngestOptions {
  // false: a NaN/Inf feature value is an error; true: drop the sample and
  // record a warning
  bool drop_nan_samples = false;
};

struct IngestReport {
  std::vector<std::string> warnings;
  std::vector<std::string> dropped_samples;
};

// Manifest format: JSON object with "catalog" (csv path with columns
// feature_id,modality,group) and "samples", a list of {domain, subject,
// sample_id, features_file, labels_file?, annotators_file?}. Paths are
// relative to the manifest's directory.
DomainStore ingest(const std::string& manifest_path,
                   const IngestOptions& options = {},
                   IngestReport* report = nullptr);

// Writes manifest + catalog + per-sample csv files; ingest(export(store))
// reproduces every matrix bit-for-bit.
void export_store(const DomainStore& store, const std::string& dir);

FeatureCatalog load_catalog_csv(const std::string& path);
void save_catalog_csv(const FeatureCatalog& catalog, const std::string& path);

struct FilterEntry {
  std::string sample_id;
  double statistic = 0.0;
  bool kept = true;
  bool had_tracks = false;
};

struct FilterOutcome {
  std::vector<FrameSeriesSample> kept;
  std::vector<FilterEntry> entries;
  std::vector<std::string> warnings;
};

// Annotator agreement filter: keeps a sample iff the mean over the two
// label dimensions of the mean pairwise Pearson correlation across its
// annotator tracks is strictly above `threshold`. Samples without tracks
// pass unchanged. A constant track makes its pairs contribute 0 and is
// reported as a warning.
FilterOutcome filter_by_annotator_correlation(
    std::vector<FrameSeriesSample> samples, double threshold = 0.0);

struct PaddedBatch {
  num::Tensor features;             // L x D
  num::Tensor labels;               // L x 2 (zeros when absent)
  std::vector<std::uint8_t> mask;   // prefix of 1s, then 0s
  int valid = 0;
  bool has_labels = false;
  std::string sample_id;
  std::string domain;
};

// Zero-pads at the tail (mask false) or truncates with a warning when the
// sample is longer than target_len.
PaddedBatch pad_and_mask(const FrameSeriesSample& sample, int target_len = 1000,
                         std::vector<std::string>* warnings = nullptr);

struct StandardizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // floored at the configured epsilon
};

inline constexpr double kStdFloor = 1e-8;

// Per-feature moments over the valid frames of the given (training)
// batches only.
StandardizationStats fit_standardizer(std::span<const PaddedBatch> train,
                                      double std_floor = kStdFloor);

// Z-scores valid frames in place; padded frames stay zero.
void apply_standardizer(PaddedBatch& batch, const StandardizationStats& stats);

struct Fold {
  std::vector<int> train;
  std::vector<int> test;
};

// Deterministic sample-level k-fold partition, stratified by domain:
// each domain's samples are spread across folds as evenly as possible.
std::vector<Fold> split_folds(std::span<const FrameSeriesSample> samples,
                              int k, std::uint64_t seed);

}  // namespace affect::data
