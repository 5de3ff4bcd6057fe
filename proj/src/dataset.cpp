#include "affect/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "affect/csv.hpp"
#include "affect/metrics.hpp"
#include "affect/rng.hpp"

namespace fs = std::filesystem;

namespace affect::data {

std::string to_string(Modality m) {
  return m == Modality::audio ? "audio" : "visual";
}

Modality modality_from_string(const std::string& s) {
  if (s == "audio") return Modality::audio;
  if (s == "visual") return Modality::visual;
  throw std::runtime_error("unknown modality: " + s);
}

std::vector<std::string> FeatureCatalog::feature_ids() const {
  std::vector<std::string> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries) ids.push_back(e.feature_id);
  return ids;
}

void FeatureCatalog::validate() const {
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.feature_id.empty()) {
      throw std::runtime_error("catalog: empty feature id");
    }
    if (!seen.insert(e.feature_id).second) {
      throw std::runtime_error("catalog: duplicate feature id " + e.feature_id);
    }
  }
}

std::vector<std::string> DomainStore::domains() const {
  std::set<std::string> set;
  for (const auto& s : samples) set.insert(s.domain);
  return {set.begin(), set.end()};
}

std::vector<int> DomainStore::sample_indices(const std::string& domain) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].domain == domain) out.push_back(static_cast<int>(i));
  }
  return out;
}

FeatureCatalog load_catalog_csv(const std::string& path) {
  const StringCsv csv = read_string_csv(path);
  if (csv.header != std::vector<std::string>{"feature_id", "modality", "group"}) {
    throw std::runtime_error(path +
                             ": catalog header must be feature_id,modality,group");
  }
  FeatureCatalog catalog;
  for (const auto& row : csv.rows) {
    catalog.entries.push_back(
        {row[0], modality_from_string(row[1]), row[2]});
  }
  catalog.validate();
  return catalog;
}

void save_catalog_csv(const FeatureCatalog& catalog, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for write: " + path);
  out << "feature_id,modality,group\n";
  for (const auto& e : catalog.entries) {
    out << e.feature_id << ',' << to_string(e.modality) << ',' << e.group
        << '\n';
  }
}

namespace {

num::Tensor read_labels(const std::string& path, int frames) {
  const NumericCsv csv = read_numeric_csv(path);
  if (csv.header != std::vector<std::string>{"valence", "arousal"}) {
    throw std::runtime_error(path + ": label header must be valence,arousal");
  }
  if (csv.values.rows() != frames) {
    throw std::runtime_error(path + ": label row count " +
                             std::to_string(csv.values.rows()) +
                             " does not match feature frames " +
                             std::to_string(frames));
  }
  for (int r = 0; r < csv.values.rows(); ++r) {
    for (int c = 0; c < 2; ++c) {
      const double v = csv.values(r, c);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::runtime_error(path + ": row " + std::to_string(r + 1) +
                                 ": label " + format_double(v) +
                                 " outside [0,1]");
      }
    }
  }
  return csv.values;
}

std::vector<num::Tensor> read_annotators(const std::string& path, int frames) {
  const StringCsv csv = read_string_csv(path);
  if (csv.header != std::vector<std::string>{"annotator_id", "frame",
                                             "valence", "arousal"}) {
    throw std::runtime_error(
        path + ": annotator header must be annotator_id,frame,valence,arousal");
  }
  // ids keep first-appearance order
  std::vector<std::string> ids;
  std::map<std::string, num::Tensor> tracks;
  std::map<std::string, std::vector<bool>> seen;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    const std::string& id = row[0];
    if (tracks.find(id) == tracks.end()) {
      ids.push_back(id);
      tracks.emplace(id, num::Tensor(frames, 2));
      seen.emplace(id, std::vector<bool>(static_cast<std::size_t>(frames)));
    }
    const int frame = std::stoi(row[1]);
    if (frame < 0 || frame >= frames) {
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                               ": frame index out of range");
    }
    tracks.at(id)(frame, 0) = std::stod(row[2]);
    tracks.at(id)(frame, 1) = std::stod(row[3]);
    seen.at(id)[static_cast<std::size_t>(frame)] = true;
  }
  std::vector<num::Tensor> out;
  for (const auto& id : ids) {
    const auto& s = seen.at(id);
    if (!std::all_of(s.begin(), s.end(), [](bool b) { return b; })) {
      throw std::runtime_error(path + ": annotator " + id +
                               " does not cover every frame");
    }
    num::check_finite(tracks.at(id), "annotator track " + id + " in " + path);
    out.push_back(std::move(tracks.at(id)));
  }
  return out;
}

}  // namespace

DomainStore ingest(const std::string& manifest_path,
                   const IngestOptions& options, IngestReport* report) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  nlohmann::json manifest;
  in >> manifest;

  const fs::path base = fs::path(manifest_path).parent_path();
  auto resolve = [&](const std::string& rel) {
    return (base / rel).string();
  };

  DomainStore store;
  store.manifest_path = manifest_path;
  if (!manifest.contains("catalog")) {
    throw std::runtime_error(manifest_path + ": manifest missing catalog");
  }
  store.catalog = load_catalog_csv(resolve(manifest.at("catalog")));
  const auto expected_header = store.catalog.feature_ids();

  for (const auto& entry : manifest.at("samples")) {
    FrameSeriesSample sample;
    sample.domain = entry.at("domain").get<std::string>();
    sample.subject = entry.at("subject").get<std::string>();
    sample.sample_id = entry.at("sample_id").get<std::string>();
    if (sample.domain.empty()) {
      throw std::runtime_error(manifest_path + ": sample " + sample.sample_id +
                               " has an empty domain id");
    }

    const std::string fpath = resolve(entry.at("features_file"));
    NumericCsv feats = read_numeric_csv(fpath);
    if (feats.header != expected_header) {
      throw std::runtime_error(fpath + ": feature header does not match catalog");
    }
    if (feats.values.rows() < 1) {
      throw std::runtime_error(fpath + ": sample has no frames");
    }
    if (!num::all_finite(feats.values.values())) {
      if (options.drop_nan_samples) {
        if (report != nullptr) {
          report->dropped_samples.push_back(sample.sample_id);
          report->warnings.push_back("dropped sample " + sample.sample_id +
                                     ": non-finite feature value in " + fpath);
        }
        continue;
      }
      throw std::runtime_error(fpath + ": non-finite feature value");
    }
    sample.features = std::move(feats.values);

    if (entry.contains("labels_file") && !entry.at("labels_file").is_null()) {
      sample.labels =
          read_labels(resolve(entry.at("labels_file")), sample.frames());
    }
    if (entry.contains("annotators_file") &&
        !entry.at("annotators_file").is_null()) {
      sample.annotator_tracks =
          read_annotators(resolve(entry.at("annotators_file")), sample.frames());
    }
    store.samples.push_back(std::move(sample));
  }
  return store;
}

void export_store(const DomainStore& store, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);
  save_catalog_csv(store.catalog, (base / "catalog.csv").string());

  nlohmann::json manifest;
  manifest["catalog"] = "catalog.csv";
  manifest["samples"] = nlohmann::json::array();
  const auto header = store.catalog.feature_ids();

  for (const auto& s : store.samples) {
    fs::create_directories(base / s.domain);
    const std::string stem = s.domain + "/" + s.sample_id;
    nlohmann::json entry;
    entry["domain"] = s.domain;
    entry["subject"] = s.subject;
    entry["sample_id"] = s.sample_id;
    entry["features_file"] = stem + "_features.csv";
    write_numeric_csv((base / (stem + "_features.csv")).string(), header,
                      s.features);
    if (s.labels) {
      entry["labels_file"] = stem + "_labels.csv";
      write_numeric_csv((base / (stem + "_labels.csv")).string(),
                        {"valence", "arousal"}, *s.labels);
    }
    if (s.annotator_tracks) {
      entry["annotators_file"] = stem + "_annotators.csv";
      std::ofstream out(base / (stem + "_annotators.csv"), std::ios::binary);
      out << "annotator_id,frame,valence,arousal\n";
      for (std::size_t a = 0; a < s.annotator_tracks->size(); ++a) {
        const auto& track = (*s.annotator_tracks)[a];
        for (int t = 0; t < track.rows(); ++t) {
          out << 'a' << a << ',' << t << ',' << format_double(track(t, 0))
              << ',' << format_double(track(t, 1)) << '\n';
        }
      }
    }
    manifest["samples"].push_back(std::move(entry));
  }

  std::ofstream out(base / "manifest.json");
  out << manifest.dump(1) << "\n";
}

FilterOutcome filter_by_annotator_correlation(
    std::vector<FrameSeriesSample> samples, double threshold) {
  FilterOutcome outcome;
  for (auto& sample : samples) {
    FilterEntry entry;
    entry.sample_id = sample.sample_id;
    if (!sample.annotator_tracks) {
      entry.kept = true;
      outcome.entries.push_back(entry);
      outcome.kept.push_back(std::move(sample));
      continue;
    }
    const auto& tracks = *sample.annotator_tracks;
    if (tracks.size() < 2) {
      throw std::runtime_error("agreement filter: sample " + sample.sample_id +
                               " has fewer than 2 annotator tracks");
    }
    entry.had_tracks = true;

    double dim_sum = 0.0;
    for (int dim = 0; dim < 2; ++dim) {
      double pair_sum = 0.0;
      int pairs = 0;
      for (std::size_t a = 0; a < tracks.size(); ++a) {
        for (std::size_t b = a + 1; b < tracks.size(); ++b) {
          metrics::PooledMoments m;
          for (int t = 0; t < tracks[a].rows(); ++t) {
            m.add(tracks[a](t, dim), tracks[b](t, dim));
          }
          const double denom = std::sqrt(m.var_x()) * std::sqrt(m.var_y());
          double r = 0.0;
          if (denom > 0.0) {
            r = m.cov() / denom;
          } else {
            outcome.warnings.push_back(
                "sample " + sample.sample_id + ": constant annotator track in pair (" +
                std::to_string(a) + "," + std::to_string(b) +
                "), correlation treated as 0");
          }
          pair_sum += r;
          ++pairs;
        }
      }
      dim_sum += pair_sum / pairs;
    }
    entry.statistic = dim_sum / 2.0;
    entry.kept = entry.statistic > threshold;
    outcome.entries.push_back(entry);
    if (entry.kept) outcome.kept.push_back(std::move(sample));
  }
  return outcome;
}

PaddedBatch pad_and_mask(const FrameSeriesSample& sample, int target_len,
                         std::vector<std::string>* warnings) {
  if (target_len < 1) throw std::invalid_argument("pad: target length >= 1");
  PaddedBatch batch;
  batch.sample_id = sample.sample_id;
  batch.domain = sample.domain;
  batch.has_labels = sample.labels.has_value();
  const int d = sample.features.cols();
  const int keep = std::min(sample.frames(), target_len);
  if (sample.frames() > target_len && warnings != nullptr) {
    warnings->push_back("sample " + sample.sample_id + ": truncated from " +
                        std::to_string(sample.frames()) + " to " +
                        std::to_string(target_len) + " frames");
  }
  batch.features = num::Tensor(target_len, d);
  batch.labels = num::Tensor(target_len, 2);
  batch.mask.assign(static_cast<std::size_t>(target_len), 0);
  batch.valid = keep;
  for (int t = 0; t < keep; ++t) {
    batch.mask[static_cast<std::size_t>(t)] = 1;
    for (int j = 0; j < d; ++j) batch.features(t, j) = sample.features(t, j);
    if (sample.labels) {
      batch.labels(t, 0) = (*sample.labels)(t, 0);
      batch.labels(t, 1) = (*sample.labels)(t, 1);
    }
  }
  return batch;
}

StandardizationStats fit_standardizer(std::span<const PaddedBatch> train,
                                      double std_floor) {
  if (train.empty()) {
    throw std::runtime_error("standardizer: empty training set");
  }
  const int d = train[0].features.cols();
  std::vector<double> sum(static_cast<std::size_t>(d), 0.0);
  std::vector<double> sumsq(static_cast<std::size_t>(d), 0.0);
  long long n = 0;
  for (const auto& batch : train) {
    for (int t = 0; t < batch.valid; ++t) {
      for (int j = 0; j < d; ++j) {
        const double v = batch.features(t, j);
        sum[static_cast<std::size_t>(j)] += v;
        sumsq[static_cast<std::size_t>(j)] += v * v;
      }
    }
    n += batch.valid;
  }
  if (n == 0) throw std::runtime_error("standardizer: no valid frames");
  StandardizationStats stats;
  stats.mean.resize(static_cast<std::size_t>(d));
  stats.stddev.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const double mean = sum[static_cast<std::size_t>(j)] / static_cast<double>(n);
    const double var =
        sumsq[static_cast<std::size_t>(j)] / static_cast<double>(n) - mean * mean;
    stats.mean[static_cast<std::size_t>(j)] = mean;
    stats.stddev[static_cast<std::size_t>(j)] =
        std::max(std::sqrt(std::max(var, 0.0)), std_floor);
  }
  return stats;
}

void apply_standardizer(PaddedBatch& batch, const StandardizationStats& stats) {
  const int d = batch.features.cols();
  if (static_cast<std::size_t>(d) != stats.mean.size()) {
    throw std::invalid_argument("standardizer: width mismatch");
  }
  for (int t = 0; t < batch.valid; ++t) {
    for (int j = 0; j < d; ++j) {
      batch.features(t, j) = (batch.features(t, j) - stats.mean[static_cast<std::size_t>(j)]) /
                             stats.stddev[static_cast<std::size_t>(j)];
    }
  }
}

std::vector<Fold> split_folds(std::span<const FrameSeriesSample> samples,
                              int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("folds: k must be >= 2");
  if (static_cast<int>(samples.size()) < k) {
    throw std::runtime_error("folds: fewer samples (" +
                             std::to_string(samples.size()) + ") than folds (" +
                             std::to_string(k) + ")");
  }
  // group by domain, shuffle within each, deal round-robin with a counter
  // that carries across domains so global fold sizes stay within 1
  std::map<std::string, std::vector<int>> by_domain;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    by_domain[samples[i].domain].push_back(static_cast<int>(i));
  }
  num::Rng rng(num::derive_seed(seed, "fold-split"));
  std::vector<std::vector<int>> fold_members(static_cast<std::size_t>(k));
  int counter = 0;
  for (auto& [domain, ids] : by_domain) {
    rng.shuffle(ids);
    for (int id : ids) {
      fold_members[static_cast<std::size_t>(counter % k)].push_back(id);
      ++counter;
    }
  }
  std::vector<Fold> folds;
  for (int f = 0; f < k; ++f) {
    Fold fold;
    fold.test = fold_members[static_cast<std::size_t>(f)];
    for (int g = 0; g < k; ++g) {
      if (g == f) continue;
      fold.train.insert(fold.train.end(),
                        fold_members[static_cast<std::size_t>(g)].begin(),
                        fold_members[static_cast<std::size_t>(g)].end());
    }
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.test.begin(), fold.test.end());
    folds.push_back(std::move(fold));
  }
  return folds;
}

}  // namespace affect::data
