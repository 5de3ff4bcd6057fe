#include "affect/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "affect/rng.hpp"

namespace affect::synth {

namespace {

constexpr double kArCoeff = 0.9;

std::string feature_name(int j) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "f%03d", j);
  return buf;
}

std::vector<double> ar1_standardized(int len, num::Rng& rng) {
  std::vector<double> x(static_cast<std::size_t>(len));
  double prev = rng.normal();
  x[0] = prev;
  for (int t = 1; t < len; ++t) {
    prev = kArCoeff * prev + rng.normal();
    x[static_cast<std::size_t>(t)] = prev;
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(len);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(len);
  const double sd = std::sqrt(std::max(var, 1e-12));
  for (double& v : x) v = (v - mean) / sd;
  return x;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clip01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

void SyntheticSpec::validate() const {
  if (n_domains < 1 || samples_per_domain < 1 || dim < 1 || len < 2) {
    throw std::invalid_argument("synth spec: sizes out of range");
  }
  if (causal_indices.size() != lags.size() ||
      causal_indices.size() != weights.size() || causal_indices.empty()) {
    throw std::invalid_argument(
        "synth spec: causal_indices, lags, weights must have equal nonzero size");
  }
  std::set<int> causal(causal_indices.begin(), causal_indices.end());
  if (causal.size() != causal_indices.size()) {
    throw std::invalid_argument("synth spec: duplicate causal index");
  }
  for (int i : causal_indices) {
    if (i < 0 || i >= dim) throw std::invalid_argument("synth spec: causal index out of range");
  }
  for (int i : spurious_indices) {
    if (i < 0 || i >= dim) throw std::invalid_argument("synth spec: spurious index out of range");
    if (causal.count(i) != 0) {
      throw std::invalid_argument("synth spec: causal and spurious indices overlap");
    }
  }
  for (int lag : lags) {
    if (lag < 1) throw std::invalid_argument("synth spec: lags must be >= 1");
  }
  if (!arousal_weights.empty() && arousal_weights.size() != weights.size()) {
    throw std::invalid_argument("synth spec: arousal_weights size mismatch");
  }
  if (noise_sigma < 0.0 || annotator_noise < 0.0 || spurious_noise_factor < 0.0) {
    throw std::invalid_argument("synth spec: negative noise");
  }
}

std::vector<double> SyntheticSpec::effective_arousal_weights() const {
  if (!arousal_weights.empty()) return arousal_weights;
  std::vector<double> rev(weights.rbegin(), weights.rend());
  return rev;
}

SynthResult generate(const SyntheticSpec& spec) {
  spec.validate();
  SynthResult result;
  auto& store = result.store;
  auto& truth = result.truth;

  const std::set<int> causal(spec.causal_indices.begin(),
                             spec.causal_indices.end());
  const std::set<int> spurious(spec.spurious_indices.begin(),
                               spec.spurious_indices.end());
  for (int j = 0; j < spec.dim; ++j) {
    data::CatalogEntry e;
    e.feature_id = feature_name(j);
    e.modality = j % 2 == 0 ? data::Modality::audio : data::Modality::visual;
    e.group = causal.count(j) ? "causal"
              : spurious.count(j) ? "spurious"
                                  : "distractor";
    store.catalog.entries.push_back(std::move(e));
  }

  truth.causal_indices = spec.causal_indices;
  truth.spurious_indices = spec.spurious_indices;
  truth.lags = spec.lags;
  truth.valence_weights = spec.weights;
  truth.arousal_weights = spec.effective_arousal_weights();

  const auto aro_w = spec.effective_arousal_weights();
  const double sp_sigma = spec.spurious_noise_factor * spec.noise_sigma;

  for (int m = 0; m < spec.n_domains; ++m) {
    const int sign = m % 2 == 0 ? 1 : -1;
    truth.domain_signs.push_back(sign);
    const std::uint64_t domain_seed = num::derive_seed(spec.seed, "domain",
                                                       static_cast<std::uint64_t>(m));
    for (int i = 0; i < spec.samples_per_domain; ++i) {
      const std::uint64_t sample_seed =
          num::derive_seed(domain_seed, "sample", static_cast<std::uint64_t>(i));
      num::Rng rng_feat(num::derive_seed(sample_seed, "features"));
      num::Rng rng_label(num::derive_seed(sample_seed, "labels"));
      num::Rng rng_sp(num::derive_seed(sample_seed, "spurious"));

      data::FrameSeriesSample sample;
      char dom[16], sid[32], subj[32];
      std::snprintf(dom, sizeof(dom), "dom%d", m);
      std::snprintf(sid, sizeof(sid), "dom%d_s%02d", m, i);
      std::snprintf(subj, sizeof(subj), "subj%d_%02d", m, i);
      sample.domain = dom;
      sample.sample_id = sid;
      sample.subject = subj;
      sample.features = num::Tensor(spec.len, spec.dim);

      // base processes for every non-spurious column
      for (int j = 0; j < spec.dim; ++j) {
        if (spurious.count(j)) continue;
        const auto series = ar1_standardized(spec.len, rng_feat);
        for (int t = 0; t < spec.len; ++t) {
          sample.features(t, j) = series[static_cast<std::size_t>(t)];
        }
      }

      num::Tensor labels(spec.len, 2);
      for (int t = 0; t < spec.len; ++t) {
        double zv = 0.0, za = 0.0;
        for (std::size_t c = 0; c < spec.causal_indices.size(); ++c) {
          const int lag = spec.lags[c];
          if (t - lag < 0) continue;
          const double f = sample.features(t - lag, spec.causal_indices[c]);
          zv += spec.weights[c] * f;
          za += aro_w[c] * f;
        }
        labels(t, 0) = clip01(logistic(zv) + spec.noise_sigma * rng_label.normal());
        labels(t, 1) = clip01(logistic(za) + spec.noise_sigma * rng_label.normal());
      }
      sample.labels = labels;

      // noisy signed copy of the label, delayed two frames so it is a
      // pure effect of affect rather than a driver; the sign alternates
      // by domain, so the cue predicts in-domain and anti-predicts across
      for (int j : spec.spurious_indices) {
        for (int t = 0; t < spec.len; ++t) {
          const double lab =
              t > 1 ? 0.5 * (labels(t - 2, 0) + labels(t - 2, 1)) : 0.5;
          sample.features(t, j) = sign * spec.spurious_strength *
                                  (lab + sp_sigma * rng_sp.normal());
        }
      }

      if (spec.n_annotators > 0) {
        num::Rng rng_annot(num::derive_seed(sample_seed, "annotators"));
        std::vector<num::Tensor> tracks;
        for (int a = 0; a < spec.n_annotators; ++a) {
          num::Tensor track(spec.len, 2);
          for (int t = 0; t < spec.len; ++t) {
            track(t, 0) = clip01(labels(t, 0) + spec.annotator_noise * rng_annot.normal());
            track(t, 1) = clip01(labels(t, 1) + spec.annotator_noise * rng_annot.normal());
          }
          tracks.push_back(std::move(track));
        }
        sample.annotator_tracks = std::move(tracks);
      }

      store.samples.push_back(std::move(sample));
    }
  }
  return result;
}

SynthResult describe(const SyntheticSpec& spec, const std::string& out_dir) {
  SynthResult result = generate(spec);
  data::export_store(result.store, out_dir);
  result.store.manifest_path =
      (std::filesystem::path(out_dir) / "manifest.json").string();

  nlohmann::json truth;
  truth["causal_indices"] = result.truth.causal_indices;
  truth["spurious_indices"] = result.truth.spurious_indices;
  truth["lags"] = result.truth.lags;
  truth["valence_weights"] = result.truth.valence_weights;
  truth["arousal_weights"] = result.truth.arousal_weights;
  truth["domain_signs"] = result.truth.domain_signs;
  truth["spec"] = spec_to_json(spec);
  std::ofstream out(std::filesystem::path(out_dir) / "truth.json");
  out << truth.dump(1) << "\n";
  return result;
}

nlohmann::json spec_to_json(const SyntheticSpec& spec) {
  return {
      {"n_domains", spec.n_domains},
      {"samples_per_domain", spec.samples_per_domain},
      {"dim", spec.dim},
      {"len", spec.len},
      {"causal_indices", spec.causal_indices},
      {"lags", spec.lags},
      {"weights", spec.weights},
      {"arousal_weights", spec.arousal_weights},
      {"noise_sigma", spec.noise_sigma},
      {"spurious_indices", spec.spurious_indices},
      {"spurious_strength", spec.spurious_strength},
      {"spurious_noise_factor", spec.spurious_noise_factor},
      {"n_annotators", spec.n_annotators},
      {"annotator_noise", spec.annotator_noise},
      {"seed", spec.seed},
  };
}

SyntheticSpec spec_from_json(const nlohmann::json& j) {
  SyntheticSpec spec;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("n_domains", spec.n_domains);
  get("samples_per_domain", spec.samples_per_domain);
  get("dim", spec.dim);
  get("len", spec.len);
  get("causal_indices", spec.causal_indices);
  get("lags", spec.lags);
  get("weights", spec.weights);
  get("arousal_weights", spec.arousal_weights);
  get("noise_sigma", spec.noise_sigma);
  get("spurious_indices", spec.spurious_indices);
  get("spurious_strength", spec.spurious_strength);
  get("spurious_noise_factor", spec.spurious_noise_factor);
  get("n_annotators", spec.n_annotators);
  get("annotator_noise", spec.annotator_noise);
  get("seed", spec.seed);
  spec.validate();
  return spec;
}

SyntheticSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file: " + path);
  nlohmann::json j;
  in >> j;
  return spec_from_json(j);
}

SyntheticSpec preset(const std::string& name) {
  SyntheticSpec spec;
  if (name == "default3") {
    spec.n_domains = 3;
  } else if (name == "default6") {
    spec.n_domains = 6;
  } else if (name == "recovery20") {
    spec.n_domains = 1;
    spec.samples_per_domain = 40;
    spec.dim = 20;
    spec.len = 200;
    spec.spurious_indices = {5, 6};
  } else {
    throw std::runtime_error("unknown preset: " + name +
                             " (expected default3, default6, or recovery20)");
  }
  return spec;
}

}  // namespace affect::synth
