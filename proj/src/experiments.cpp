#include "affect/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

#include "affect/csv.hpp"
#include "affect/regressor.hpp"
#include "affect/rng.hpp"

namespace fs = std::filesystem;

namespace affect::experiments {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::intra: return "intra";
    case Mode::inter: return "inter";
    case Mode::multi: return "multi";
  }
  return "intra";
}

Mode mode_from_string(const std::string& s) {
  if (s == "intra") return Mode::intra;
  if (s == "inter") return Mode::inter;
  if (s == "multi") return Mode::multi;
  throw std::runtime_error("unknown mode: " + s);
}

ExperimentPlan make_plan(Mode mode, std::string source, std::string target,
                         int k, std::uint64_t seed, std::string profile_id) {
  if (mode == Mode::inter && source == target) {
    throw std::invalid_argument(
        "inter plan requires distinct source and target (got " + source + ")");
  }
  if (mode == Mode::multi && (source != kAllDomains || target != kAllDomains)) {
    throw std::invalid_argument("multi plan must use source=target=ALL");
  }
  if (mode == Mode::intra && source != target) {
    throw std::invalid_argument("intra plan requires source == target");
  }
  return ExperimentPlan{mode, std::move(source), std::move(target), k, seed,
                        std::move(profile_id)};
}

std::vector<ExperimentPlan> build_grid(const std::vector<std::string>& domains,
                                       std::uint64_t seed, int k,
                                       const std::string& profile_id,
                                       std::vector<std::string>* warnings) {
  if (domains.empty()) throw std::invalid_argument("grid: no domains");
  std::vector<std::string> sorted = domains;
  std::sort(sorted.begin(), sorted.end());

  auto cell_seed = [&](Mode mode, const std::string& s, const std::string& t) {
    return num::derive_seed(seed, to_string(mode) + ":" + s + "->" + t);
  };

  std::vector<ExperimentPlan> plans;
  for (const auto& d : sorted) {
    plans.push_back(make_plan(Mode::intra, d, d, k,
                              cell_seed(Mode::intra, d, d), profile_id));
  }
  for (const auto& s : sorted) {
    for (const auto& t : sorted) {
      if (s == t) continue;
      plans.push_back(make_plan(Mode::inter, s, t, k,
                                cell_seed(Mode::inter, s, t), profile_id));
    }
  }
  plans.push_back(make_plan(Mode::multi, kAllDomains, kAllDomains, k,
                            cell_seed(Mode::multi, kAllDomains, kAllDomains),
                            profile_id));
  if (sorted.size() < 2 && warnings != nullptr) {
    warnings->push_back(
        "multi plan over a single domain duplicates the intra cell");
  }
  return plans;
}

namespace {

std::vector<data::PaddedBatch> pad_samples(
    const data::DomainStore& store, const std::vector<int>& ids,
    const RunProfile& profile) {
  std::vector<data::PaddedBatch> out;
  out.reserve(ids.size());
  for (int id : ids) {
    out.push_back(data::pad_and_mask(store.samples[static_cast<std::size_t>(id)],
                                     profile.pad_length, nullptr));
  }
  return out;
}

void randomize_labels(std::vector<data::PaddedBatch>& batches,
                      std::uint64_t seed) {
  num::Rng rng(num::derive_seed(seed, "label-noise"));
  for (auto& b : batches) {
    for (int t = 0; t < b.valid; ++t) {
      b.labels(t, 0) = rng.uniform();
      b.labels(t, 1) = rng.uniform();
    }
  }
}

}  // namespace

ExperimentResult run_plan(const ExperimentPlan& plan,
                          const data::DomainStore& store,
                          const RunProfile& profile,
                          const PipelineHooks& hooks) {
  ExperimentResult result;
  result.plan = plan;

  try {
    // assemble the training pool
    std::vector<int> pool_ids;
    if (plan.mode == Mode::multi) {
      pool_ids.resize(store.samples.size());
      for (std::size_t i = 0; i < pool_ids.size(); ++i) {
        pool_ids[i] = static_cast<int>(i);
      }
    } else {
      pool_ids = store.sample_indices(plan.source);
    }
    if (pool_ids.empty()) {
      throw std::runtime_error("empty domain: " + plan.source);
    }
    std::vector<data::FrameSeriesSample> pool_copy;
    pool_copy.reserve(pool_ids.size());
    for (int id : pool_ids) {
      pool_copy.push_back(store.samples[static_cast<std::size_t>(id)]);
    }

    std::vector<int> target_ids;
    if (plan.mode == Mode::inter) {
      target_ids = store.sample_indices(plan.target);
      if (target_ids.empty()) {
        throw std::runtime_error("empty domain: " + plan.target);
      }
    }

    const auto folds = data::split_folds(pool_copy, plan.k, plan.seed);

    if (!hooks.checkpoint_dir.empty()) {
      fs::create_directories(hooks.checkpoint_dir);
    }

    std::vector<metrics::MetricReport> ok_reports;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      FoldOutcome outcome;
      outcome.fold = static_cast<int>(f);
      const std::uint64_t fold_seed =
          num::derive_seed(plan.seed, "fold", static_cast<std::uint64_t>(f));
      try {
        std::vector<int> train_pool_ids;
        for (int i : folds[f].train) train_pool_ids.push_back(pool_ids[static_cast<std::size_t>(i)]);
        std::vector<int> test_store_ids;
        if (plan.mode == Mode::inter) {
          test_store_ids = target_ids;
        } else {
          for (int i : folds[f].test) test_store_ids.push_back(pool_ids[static_cast<std::size_t>(i)]);
        }

        auto train_batches = pad_samples(store, train_pool_ids, profile);
        auto test_batches = pad_samples(store, test_store_ids, profile);
        if (hooks.randomize_test_labels) {
          randomize_labels(test_batches, num::derive_seed(hooks.randomize_seed,
                                                          "fold", f));
        }

        // standardization and selection are functions of training data only
        const auto stats =
            data::fit_standardizer(train_batches, profile.std_floor);
        for (auto& b : train_batches) data::apply_standardizer(b, stats);
        for (auto& b : test_batches) data::apply_standardizer(b, stats);

        abfs::AbfsSelection selection;
        if (profile.force_selection) {
          selection = abfs::combine(*profile.force_selection,
                                    *profile.force_selection,
                                    profile.abfs_threshold);
        } else {
          auto tcn_cfg_v = profile.tcn;
          tcn_cfg_v.seed = num::derive_seed(fold_seed, "tcn-valence");
          auto [tcn_v, scores_v] = abfs::train_attention_tcn(
              train_batches, abfs::Target::valence, tcn_cfg_v);
          auto tcn_cfg_a = profile.tcn;
          tcn_cfg_a.seed = num::derive_seed(fold_seed, "tcn-arousal");
          auto [tcn_a, scores_a] = abfs::train_attention_tcn(
              train_batches, abfs::Target::arousal, tcn_cfg_a);
          selection = abfs::combine(
              abfs::select_features(scores_v, profile.abfs_threshold, nullptr),
              abfs::select_features(scores_a, profile.abfs_threshold, nullptr),
              profile.abfs_threshold);
        }

        auto train_reshaped = abfs::reshape_batches(train_batches, selection.unioned);
        auto test_reshaped = abfs::reshape_batches(test_batches, selection.unioned);

        auto lstm_cfg = profile.lstm;
        lstm_cfg.seed = num::derive_seed(fold_seed, "lstm");
        auto trained =
            reg::train(train_reshaped, lstm_cfg, selection.unioned, stats);

        if (!hooks.checkpoint_dir.empty()) {
          const std::string stem = plan.source + "__" + plan.target +
                                   "__fold" + std::to_string(f);
          reg::save_checkpoint(trained, store.catalog.feature_ids(),
                               (fs::path(hooks.checkpoint_dir) / (stem + ".json")).string());
          abfs::save_selection_json(
              selection, store.catalog,
              (fs::path(hooks.checkpoint_dir) / (stem + "_selection.json")).string());
        }

        metrics::PooledEval eval;
        for (const auto& batch : test_reshaped) {
          const num::Tensor pred = trained.model.predict(batch);
          eval.add(pred, batch.labels, batch.mask);
        }
        outcome.report = eval.report();
        outcome.selection = selection;
        outcome.ok = true;
        ok_reports.push_back(outcome.report);
      } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.error = e.what();
      }
      result.folds.push_back(std::move(outcome));
    }

    result.has_metrics = !ok_reports.empty();
    result.complete =
        result.has_metrics &&
        static_cast<int>(ok_reports.size()) == static_cast<int>(folds.size());
    if (result.has_metrics) {
      result.aggregate = metrics::aggregate(ok_reports);
    }
  } catch (const std::exception& e) {
    result.cell_error = e.what();
    result.complete = false;
    result.has_metrics = false;
  }
  return result;
}

nlohmann::json result_to_json(const ExperimentResult& result) {
  nlohmann::json j;
  j["plan"] = {{"mode", to_string(result.plan.mode)},
               {"source", result.plan.source},
               {"target", result.plan.target},
               {"k", result.plan.k},
               {"seed", result.plan.seed},
               {"profile_id", result.plan.profile_id}};
  j["complete"] = result.complete;
  j["has_metrics"] = result.has_metrics;
  j["cell_error"] = result.cell_error;
  j["folds"] = nlohmann::json::array();
  for (const auto& f : result.folds) {
    nlohmann::json fj;
    fj["fold"] = f.fold;
    fj["ok"] = f.ok;
    fj["error"] = f.error;
    if (f.ok) {
      fj["rmse"] = {{"valence", f.report.valence.rmse},
                    {"arousal", f.report.arousal.rmse},
                    {"combined", f.report.rmse_combined}};
      fj["ccc"] = {{"valence", f.report.valence.ccc},
                   {"arousal", f.report.arousal.ccc},
                   {"combined", f.report.ccc_combined}};
      fj["valid_frames"] = f.report.valence.valid_frames;
      fj["selection"] = {{"threshold", f.selection.threshold},
                         {"valence", f.selection.valence_selected},
                         {"arousal", f.selection.arousal_selected},
                         {"union", f.selection.unioned}};
    }
    j["folds"].push_back(std::move(fj));
  }
  if (result.has_metrics) {
    j["aggregate"] = {{"rmse_mean", result.aggregate.rmse_mean},
                      {"rmse_std", result.aggregate.rmse_std},
                      {"ccc_mean", result.aggregate.ccc_mean},
                      {"ccc_std", result.aggregate.ccc_std},
                      {"fold_rmse", result.aggregate.fold_rmse},
                      {"fold_ccc", result.aggregate.fold_ccc}};
  }
  return j;
}

ExperimentResult result_from_json(const nlohmann::json& j) {
  ExperimentResult r;
  const auto& pj = j.at("plan");
  r.plan.mode = mode_from_string(pj.at("mode").get<std::string>());
  r.plan.source = pj.at("source").get<std::string>();
  r.plan.target = pj.at("target").get<std::string>();
  r.plan.k = pj.at("k").get<int>();
  r.plan.seed = pj.at("seed").get<std::uint64_t>();
  r.plan.profile_id = pj.at("profile_id").get<std::string>();
  r.complete = j.at("complete").get<bool>();
  r.has_metrics = j.at("has_metrics").get<bool>();
  r.cell_error = j.at("cell_error").get<std::string>();

  std::vector<metrics::MetricReport> ok_reports;
  for (const auto& fj : j.at("folds")) {
    FoldOutcome f;
    f.fold = fj.at("fold").get<int>();
    f.ok = fj.at("ok").get<bool>();
    f.error = fj.at("error").get<std::string>();
    if (f.ok) {
      f.report.valence.rmse = fj.at("rmse").at("valence").get<double>();
      f.report.arousal.rmse = fj.at("rmse").at("arousal").get<double>();
      f.report.rmse_combined = fj.at("rmse").at("combined").get<double>();
      f.report.valence.ccc = fj.at("ccc").at("valence").get<double>();
      f.report.arousal.ccc = fj.at("ccc").at("arousal").get<double>();
      f.report.ccc_combined = fj.at("ccc").at("combined").get<double>();
      f.report.valence.valid_frames = fj.at("valid_frames").get<long long>();
      f.report.arousal.valid_frames = f.report.valence.valid_frames;
      const auto& sj = fj.at("selection");
      f.selection.threshold = sj.at("threshold").get<double>();
      f.selection.valence_selected = sj.at("valence").get<std::vector<int>>();
      f.selection.arousal_selected = sj.at("arousal").get<std::vector<int>>();
      f.selection.unioned = sj.at("union").get<std::vector<int>>();
      ok_reports.push_back(f.report);
    }
    r.folds.push_back(std::move(f));
  }
  if (r.has_metrics && !ok_reports.empty()) {
    r.aggregate = metrics::aggregate(ok_reports);
  }
  return r;
}

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

const ExperimentResult* find_cell(const ResultsMatrix& m, Mode mode,
                                  const std::string& s, const std::string& t) {
  for (const auto& c : m.cells) {
    if (c.plan.mode == mode && c.plan.source == s && c.plan.target == t) {
      return &c;
    }
  }
  return nullptr;
}

}  // namespace

std::string cell_file_name(const ExperimentPlan& plan) {
  return plan.source + "__" + plan.target + ".json";
}

void emit_matrix(const ResultsMatrix& matrix, const std::string& dir) {
  fs::create_directories(dir);

  {
    std::ofstream csv(fs::path(dir) / "matrix.csv");
    csv << "source,target,mode,rmse_mean,rmse_std,ccc_mean,ccc_std\n";
    for (const auto& cell : matrix.cells) {
      csv << cell.plan.source << ',' << cell.plan.target << ','
          << to_string(cell.plan.mode) << ',';
      if (cell.has_metrics) {
        csv << data::format_double(cell.aggregate.rmse_mean) << ','
            << data::format_double(cell.aggregate.rmse_std) << ','
            << data::format_double(cell.aggregate.ccc_mean) << ','
            << data::format_double(cell.aggregate.ccc_std);
      } else {
        csv << ",,,";
      }
      csv << '\n';
    }
  }

  {
    std::ofstream txt(fs::path(dir) / "matrix.txt");
    txt << "Results (RMSE / CCC), fold means. Rows: source. Columns: target.\n\n";
    const int w = 16;
    auto pad_cell = [&](const std::string& s) {
      std::string out = s;
      out.resize(static_cast<std::size_t>(w), ' ');
      return out;
    };
    txt << pad_cell("");
    for (const auto& t : matrix.domains) txt << pad_cell(t);
    txt << pad_cell("All") << '\n';
    bool any_failed = false;
    auto cell_text = [&](const ExperimentResult* cell) {
      if (cell == nullptr) return std::string("");
      if (!cell->has_metrics) {
        any_failed = true;
        return std::string("— / —");
      }
      return fmt2(cell->aggregate.rmse_mean) + " / " +
             fmt2(cell->aggregate.ccc_mean);
    };
    for (const auto& s : matrix.domains) {
      txt << pad_cell(s);
      for (const auto& t : matrix.domains) {
        const auto mode = s == t ? Mode::intra : Mode::inter;
        txt << pad_cell(cell_text(find_cell(matrix, mode, s, t)));
      }
      txt << pad_cell("") << '\n';
    }
    txt << pad_cell("All");
    for (std::size_t i = 0; i < matrix.domains.size(); ++i) txt << pad_cell("");
    txt << pad_cell(cell_text(find_cell(matrix, Mode::multi, kAllDomains, kAllDomains)))
        << '\n';
    if (any_failed) {
      txt << "\n— / —: cell had no successful folds\n";
    }
  }

  {
    std::ofstream fig(fs::path(dir) / "figdata.csv");
    fig << "target,source,mode,rmse_mean,rmse_std,ccc_mean,ccc_std\n";
    for (const auto& cell : matrix.cells) {
      if (!cell.has_metrics) continue;
      fig << cell.plan.target << ',' << cell.plan.source << ','
          << to_string(cell.plan.mode) << ','
          << data::format_double(cell.aggregate.rmse_mean) << ','
          << data::format_double(cell.aggregate.rmse_std) << ','
          << data::format_double(cell.aggregate.ccc_mean) << ','
          << data::format_double(cell.aggregate.ccc_std) << '\n';
    }
  }
}

void emit_feature_report(const ResultsMatrix& matrix,
                         const data::FeatureCatalog& catalog,
                         const std::string& dir) {
  fs::create_directories(dir);
  const int majority = 3;  // selected in >= 3 of 5 folds counts as stable

  std::ofstream csv(fs::path(dir) / "features.csv");
  csv << "source,target,mode,fold,feature_id,group,modality,stable\n";
  std::ofstream txt(fs::path(dir) / "features.txt");
  txt << "Selected features by source domain (stable = selected in >= "
      << majority << " folds)\n";

  for (const auto& cell : matrix.cells) {
    std::map<int, int> counts;
    for (const auto& f : cell.folds) {
      if (!f.ok) continue;
      for (int j : f.selection.unioned) counts[j] += 1;
    }
    for (const auto& f : cell.folds) {
      if (!f.ok) continue;
      for (int j : f.selection.unioned) {
        const auto& e = catalog.entries[static_cast<std::size_t>(j)];
        csv << cell.plan.source << ',' << cell.plan.target << ','
            << to_string(cell.plan.mode) << ',' << f.fold << ','
            << e.feature_id << ',' << e.group << ',' << to_string(e.modality)
            << ',' << (counts[j] >= majority ? 1 : 0) << '\n';
      }
    }
    if (cell.plan.mode == Mode::intra || cell.plan.mode == Mode::multi) {
      txt << "\nsource " << cell.plan.source << ":\n";
      int n_audio = 0, n_visual = 0;
      for (const auto& [j, count] : counts) {
        const auto& e = catalog.entries[static_cast<std::size_t>(j)];
        const bool stable = count >= majority;
        if (stable) {
          (e.modality == data::Modality::audio ? n_audio : n_visual) += 1;
        }
        txt << "  " << e.feature_id << "  [" << e.group << ", "
            << to_string(e.modality) << "]  folds=" << count
            << (stable ? "  stable" : "") << '\n';
      }
      txt << "  stable modality counts: audio=" << n_audio
          << " visual=" << n_visual << '\n';
    }
  }
}

ResultsMatrix run_grid(const data::DomainStore& store,
                       const RunProfile& profile, std::uint64_t seed,
                       const std::string& run_dir, const GridOptions& options) {
  const auto domains = store.domains();
  std::vector<std::string> warnings;
  auto plans = build_grid(domains, seed, profile.k_folds, profile.name,
                          &warnings);

  fs::create_directories(fs::path(run_dir) / "cells");
  {
    nlohmann::json config;
    config["seed"] = seed;
    config["jobs"] = options.jobs;
    config["profile"] = profile_to_json(profile);
    config["domains"] = domains;
    std::ofstream out(fs::path(run_dir) / "config.json");
    out << config.dump(1) << "\n";
  }
  data::save_catalog_csv(store.catalog,
                         (fs::path(run_dir) / "catalog.csv").string());

  ResultsMatrix matrix;
  matrix.domains = domains;
  matrix.cells.resize(plans.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= plans.size()) break;
      const auto& plan = plans[i];
      const fs::path cell_path = fs::path(run_dir) / "cells" / cell_file_name(plan);
      if (options.resume && fs::exists(cell_path)) {
        try {
          std::ifstream in(cell_path);
          nlohmann::json j;
          in >> j;
          ExperimentResult cached = result_from_json(j);
          if (cached.complete) {
            matrix.cells[i] = std::move(cached);
            continue;
          }
        } catch (const std::exception&) {
          // unreadable cache; recompute
        }
      }
      ExperimentResult result = run_plan(plan, store, profile);
      {
        std::ofstream out(cell_path);
        out << result_to_json(result).dump(1) << "\n";
      }
      matrix.cells[i] = std::move(result);
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  emit_matrix(matrix, run_dir);
  emit_feature_report(matrix, store.catalog, run_dir);
  return matrix;
}

data::FeatureCatalog load_run_catalog(const std::string& run_dir) {
  return data::load_catalog_csv((fs::path(run_dir) / "catalog.csv").string());
}

ResultsMatrix load_run(const std::string& run_dir) {
  ResultsMatrix matrix;
  const fs::path cells = fs::path(run_dir) / "cells";
  if (!fs::exists(cells)) {
    throw std::runtime_error("no cells directory under " + run_dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(cells)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::set<std::string> domains;
  for (const auto& file : files) {
    std::ifstream in(file);
    nlohmann::json j;
    in >> j;
    ExperimentResult r = result_from_json(j);
    if (r.plan.source != kAllDomains) domains.insert(r.plan.source);
    if (r.plan.target != kAllDomains) domains.insert(r.plan.target);
    matrix.cells.push_back(std::move(r));
  }
  matrix.domains.assign(domains.begin(), domains.end());
  // restore grid order: intra block, inter block, multi
  std::sort(matrix.cells.begin(), matrix.cells.end(),
            [](const ExperimentResult& a, const ExperimentResult& b) {
              const int ma = static_cast<int>(a.plan.mode);
              const int mb = static_cast<int>(b.plan.mode);
              if (ma != mb) return ma < mb;
              if (a.plan.source != b.plan.source) return a.plan.source < b.plan.source;
              return a.plan.target < b.plan.target;
            });
  return matrix;
}

}  // namespace affect::experiments
