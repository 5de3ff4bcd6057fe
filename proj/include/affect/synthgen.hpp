#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "affect/dataset.hpp"

namespace affect::synth {

// Multi-domain generator with planted lagged causal drivers, AR(1)
// distractors, and per-domain sign-flipped spurious features. The planted
// indices are the ground truth the selection tests validate against.
struct SyntheticSpec {
  int n_domains = 3;
  int samples_per_domain = 10;
  int dim = 12;
  int len = 120;
  std::vector<int> causal_indices = {0, 1, 2};
  std::vector<int> lags = {1, 2, 3};            // per causal feature, >= 1
  std::vector<double> weights = {1.6, -2.0, 1.2};
  std::vector<double> arousal_weights;          // empty: reversed weights
  double noise_sigma = 0.05;
  std::vector<int> spurious_indices = {3, 4};
  double spurious_strength = 1.0;
  // the spurious copy of the label carries noise_sigma scaled by this
  // factor, keeping it predictive in-domain but noisier than the causal
  // route
  double spurious_noise_factor = 8.0;
  int n_annotators = 0;
  double annotator_noise = 0.05;
  std::uint64_t seed = 1;

  void validate() const;
  std::vector<double> effective_arousal_weights() const;
};

struct GroundTruth {
  std::vector<int> causal_indices;
  std::vector<int> spurious_indices;
  std::vector<int> lags;
  std::vector<double> valence_weights;
  std::vector<double> arousal_weights;
  std::vector<int> domain_signs;  // +1 / -1 per domain
};

struct SynthResult {
  data::DomainStore store;
  GroundTruth truth;
};

SynthResult generate(const SyntheticSpec& spec);

// generate + write the dataset in the ingestion format (manifest.json,
// catalog.csv, per-sample csv files) plus truth.json; the written files
// round-trip through ingest() bit-for-bit.
SynthResult describe(const SyntheticSpec& spec, const std::string& out_dir);

nlohmann::json spec_to_json(const SyntheticSpec& spec);
SyntheticSpec spec_from_json(const nlohmann::json& j);
SyntheticSpec load_spec(const std::string& path);

// named presets: default3, default6, recovery20
SyntheticSpec preset(const std::string& name);

}  // namespace affect::synth
