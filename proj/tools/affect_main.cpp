// Command-line front end for the whole pipeline: synthetic data
// generation, ingestion checks, attention-based feature selection,
// regressor training/prediction, and the full experiment grid.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "affect/abfs.hpp"
#include "affect/csv.hpp"
#include "affect/dataset.hpp"
#include "affect/experiments.hpp"
#include "affect/gradcheck_suite.hpp"
#include "affect/profiles.hpp"
#include "affect/regressor.hpp"
#include "affect/rng.hpp"
#include "affect/synthgen.hpp"

namespace fs = std::filesystem;
using affect::RunProfile;

namespace {

struct CommonOpts {
  std::string profile_name = "desk";
  std::uint64_t seed = 1;
  std::vector<std::string> overrides;
};

RunProfile resolve_profile(const CommonOpts& opts) {
  RunProfile profile = affect::profile_by_name(opts.profile_name);
  affect::apply_overrides(profile, opts.overrides);
  return profile;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--profile", opts.profile_name,
                  "config profile: paper or desk")
      ->default_val("desk");
  cmd->add_option("--seed", opts.seed, "run seed")->default_val(1);
  cmd->add_option("--set", opts.overrides,
                  "profile override key=value (repeatable)");
}

void echo_config(const std::string& dir, const RunProfile& profile,
                 std::uint64_t seed, const nlohmann::json& extra) {
  fs::create_directories(dir);
  nlohmann::json j;
  j["seed"] = seed;
  j["profile"] = affect::profile_to_json(profile);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = *it;
  std::ofstream out(fs::path(dir) / "config.json");
  out << j.dump(1) << "\n";
}

std::vector<affect::data::PaddedBatch> standardized_domain_batches(
    const affect::data::DomainStore& store, const std::string& domain,
    const RunProfile& profile, affect::data::StandardizationStats* stats_out) {
  const auto ids = store.sample_indices(domain);
  if (ids.empty()) {
    throw std::runtime_error("domain not present in manifest: " + domain);
  }
  std::vector<affect::data::PaddedBatch> batches;
  for (int id : ids) {
    batches.push_back(affect::data::pad_and_mask(
        store.samples[static_cast<std::size_t>(id)], profile.pad_length));
  }
  const auto stats =
      affect::data::fit_standardizer(batches, profile.std_floor);
  for (auto& b : batches) affect::data::apply_standardizer(b, stats);
  if (stats_out != nullptr) *stats_out = stats;
  return batches;
}

int cmd_synth(const std::string& preset_name, const std::string& spec_path,
              const std::string& out_dir, std::optional<std::uint64_t> seed) {
  affect::synth::SyntheticSpec spec;
  if (!spec_path.empty()) {
    spec = affect::synth::load_spec(spec_path);
  } else {
    spec = affect::synth::preset(preset_name);
  }
  if (seed) spec.seed = *seed;
  affect::synth::describe(spec, out_dir);
  std::cout << "wrote dataset to " << out_dir << " ("
            << spec.n_domains * spec.samples_per_domain << " samples, "
            << spec.n_domains << " domains)\n";
  return 0;
}

int cmd_ingest_check(const std::string& manifest, bool drop_nan) {
  affect::data::IngestReport report;
  const auto store = affect::data::ingest(
      manifest, {.drop_nan_samples = drop_nan}, &report);
  std::cout << "manifest ok: " << store.samples.size() << " samples, "
            << store.domains().size() << " domains, D=" << store.catalog.dim()
            << "\n";
  long long with_labels = 0, with_tracks = 0;
  for (const auto& s : store.samples) {
    with_labels += s.labels.has_value() ? 1 : 0;
    with_tracks += s.annotator_tracks.has_value() ? 1 : 0;
  }
  std::cout << "labels: " << with_labels << ", annotator tracks: " << with_tracks
            << "\n";
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int cmd_abfs(const std::string& manifest, const std::string& domain,
             const CommonOpts& common, const std::string& out_dir) {
  const RunProfile profile = resolve_profile(common);
  const auto store = affect::data::ingest(manifest);
  auto batches = standardized_domain_batches(store, domain, profile, nullptr);

  auto cfg_v = profile.tcn;
  cfg_v.seed = affect::num::derive_seed(common.seed, "tcn-valence");
  auto [net_v, scores_v] = affect::abfs::train_attention_tcn(
      batches, affect::abfs::Target::valence, cfg_v);
  auto cfg_a = profile.tcn;
  cfg_a.seed = affect::num::derive_seed(common.seed, "tcn-arousal");
  auto [net_a, scores_a] = affect::abfs::train_attention_tcn(
      batches, affect::abfs::Target::arousal, cfg_a);

  std::vector<std::string> warnings;
  const auto selection = affect::abfs::combine(
      affect::abfs::select_features(scores_v, profile.abfs_threshold, &warnings),
      affect::abfs::select_features(scores_a, profile.abfs_threshold, &warnings),
      profile.abfs_threshold);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  fs::create_directories(out_dir);
  affect::abfs::write_selection_report(
      domain, store.catalog, scores_v, scores_a, selection,
      (fs::path(out_dir) / "selection.csv").string(),
      (fs::path(out_dir) / "selection.txt").string());
  affect::abfs::save_selection_json(
      selection, store.catalog,
      (fs::path(out_dir) / "selection.json").string());
  echo_config(out_dir, profile, common.seed,
              {{"manifest", manifest}, {"domain", domain}});

  std::cout << "selected " << selection.unioned.size() << " features (source "
            << domain << "); reports in " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& manifest, const std::string& domain,
              const std::string& selection_path, const CommonOpts& common,
              const std::string& out_path) {
  const RunProfile profile = resolve_profile(common);
  const auto store = affect::data::ingest(manifest);
  const auto selection = affect::abfs::load_selection_json(selection_path);

  affect::data::StandardizationStats stats;
  auto batches = standardized_domain_batches(store, domain, profile, &stats);
  auto reshaped = affect::abfs::reshape_batches(batches, selection.unioned);

  auto cfg = profile.lstm;
  cfg.seed = affect::num::derive_seed(common.seed, "lstm");
  auto trained = affect::reg::train(reshaped, cfg, selection.unioned, stats);
  affect::reg::save_checkpoint(trained, store.catalog.feature_ids(), out_path);
  affect::reg::write_history_csv(out_path + ".history.csv", trained.history);

  std::cout << "trained on " << reshaped.size() << " samples, best epoch "
            << trained.best_epoch << "; checkpoint at " << out_path << "\n";
  return 0;
}

int cmd_predict(const std::string& checkpoint, const std::string& manifest,
                const std::string& out_path, const std::string& profile_name) {
  const RunProfile profile = affect::profile_by_name(profile_name);
  auto loaded = affect::reg::load_checkpoint(checkpoint);
  const auto store = affect::data::ingest(manifest);

  if (store.catalog.dim() != static_cast<int>(loaded.catalog_ids.size())) {
    throw std::runtime_error(
        "width mismatch: checkpoint expects " +
        std::to_string(loaded.catalog_ids.size()) +
        " features before selection, manifest provides " +
        std::to_string(store.catalog.dim()));
  }

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open " + out_path);
  out << "sample_id,frame,valence,arousal,valid\n";
  for (const auto& sample : store.samples) {
    auto batch = affect::data::pad_and_mask(sample, profile.pad_length);
    affect::data::apply_standardizer(batch, loaded.stats);
    auto reshaped = affect::abfs::reshape_batch(batch, loaded.selection);
    const auto pred = loaded.model.predict(reshaped);
    for (int t = 0; t < pred.rows(); ++t) {
      out << sample.sample_id << ',' << t << ','
          << affect::data::format_double(pred(t, 0)) << ','
          << affect::data::format_double(pred(t, 1)) << ','
          << (t < batch.valid ? 1 : 0) << '\n';
    }
  }
  std::cout << "predictions written to " << out_path << "\n";
  return 0;
}

int cmd_grid(const std::string& manifest, const std::string& preset_name,
             const std::string& spec_path, const CommonOpts& common,
             const std::string& out_root, const std::string& run_id,
             const std::string& out_dir, int jobs, bool resume) {
  const RunProfile profile = resolve_profile(common);

  affect::data::DomainStore store;
  if (!manifest.empty()) {
    store = affect::data::ingest(manifest);
  } else {
    affect::synth::SyntheticSpec spec;
    if (!spec_path.empty()) {
      spec = affect::synth::load_spec(spec_path);
    } else {
      spec = affect::synth::preset(preset_name.empty() ? "default3"
                                                       : preset_name);
    }
    spec.seed = common.seed;
    store = affect::synth::generate(spec).store;
  }

  std::string run_dir = out_dir;
  if (run_dir.empty()) {
    std::string root = out_root;
    if (root.empty()) {
      const char* env = std::getenv("AFFECT_OUT_ROOT");
      root = env != nullptr ? env : "runs";
    }
    std::string id = run_id;
    if (id.empty()) {
      id = "run-seed" + std::to_string(common.seed) + "-" + profile.name;
    }
    run_dir = (fs::path(root) / id).string();
  }

  const auto matrix = affect::experiments::run_grid(
      store, profile, common.seed, run_dir, {.jobs = jobs, .resume = resume});

  int failed = 0;
  for (const auto& cell : matrix.cells) failed += cell.has_metrics ? 0 : 1;
  std::cout << "grid complete: " << matrix.cells.size() << " cells ("
            << failed << " failed) in " << run_dir << "\n";
  return failed == 0 ? 0 : 1;
}

int cmd_report(const std::string& run_dir) {
  const auto matrix = affect::experiments::load_run(run_dir);
  const auto catalog = affect::experiments::load_run_catalog(run_dir);
  affect::experiments::emit_matrix(matrix, run_dir);
  affect::experiments::emit_feature_report(matrix, catalog, run_dir);
  std::cout << "reports rebuilt from " << matrix.cells.size() << " cells in "
            << run_dir << "\n";
  return 0;
}

int cmd_gradcheck(int seeds, double tol) {
  const auto cases = affect::num::run_gradcheck_suite(seeds, tol);
  bool all_pass = true;
  for (const auto& c : cases) {
    std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name
              << "  max_rel_err=" << c.max_rel_err;
    if (!c.pass) std::cout << "  worst=" << c.worst_param;
    std::cout << "\n";
    all_pass = all_pass && c.pass;
  }
  std::cout << (all_pass ? "gradcheck: all cases passed\n"
                         : "gradcheck: FAILURES\n");
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attention-based feature selection and cross-domain affect "
               "regression pipeline"};
  app.require_subcommand(1);

  // synth
  std::string synth_preset = "default3", synth_spec, synth_out = "dataset";
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--preset", synth_preset,
                    "default3, default6, or recovery20");
  synth->add_option("--spec", synth_spec, "generator spec json");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "generator seed");

  // ingest-check
  std::string ic_manifest;
  bool ic_drop_nan = false;
  auto* ic = app.add_subcommand("ingest-check", "validate a dataset manifest");
  ic->add_option("--manifest", ic_manifest)->required();
  ic->add_flag("--drop-nan", ic_drop_nan,
               "drop samples with non-finite features instead of failing");

  // abfs
  std::string abfs_manifest, abfs_domain, abfs_out = "abfs_report";
  CommonOpts abfs_common;
  auto* abfs_cmd = app.add_subcommand(
      "abfs", "train attention networks on one domain and report selection");
  abfs_cmd->add_option("--manifest", abfs_manifest)->required();
  abfs_cmd->add_option("--domain", abfs_domain)->required();
  abfs_cmd->add_option("--out", abfs_out, "report directory");
  add_common(abfs_cmd, abfs_common);

  // train
  std::string train_manifest, train_domain, train_selection,
      train_out = "model.ckpt.json";
  CommonOpts train_common;
  auto* train_cmd =
      app.add_subcommand("train", "train the regressor on one domain");
  train_cmd->add_option("--manifest", train_manifest)->required();
  train_cmd->add_option("--domain", train_domain)->required();
  train_cmd->add_option("--selection", train_selection,
                        "selection json from the abfs subcommand")
      ->required();
  train_cmd->add_option("--out", train_out, "checkpoint path");
  add_common(train_cmd, train_common);

  // predict
  std::string pred_ckpt, pred_manifest, pred_out = "predictions.csv",
              pred_profile = "desk";
  auto* pred_cmd =
      app.add_subcommand("predict", "per-frame predictions from a checkpoint");
  pred_cmd->add_option("--checkpoint", pred_ckpt)->required();
  pred_cmd->add_option("--manifest", pred_manifest)->required();
  pred_cmd->add_option("--out", pred_out);
  pred_cmd->add_option("--profile", pred_profile);

  // grid
  std::string grid_manifest, grid_preset, grid_spec, grid_out_root,
      grid_run_id, grid_out;
  int grid_jobs = 1;
  bool grid_resume = false;
  CommonOpts grid_common;
  auto* grid_cmd = app.add_subcommand(
      "grid", "run the full intra/inter/multi experiment grid");
  grid_cmd->add_option("--manifest", grid_manifest, "ingest this dataset");
  grid_cmd->add_option("--synth", grid_preset,
                       "generate a synthetic store from this preset");
  grid_cmd->add_option("--spec", grid_spec, "generator spec json");
  grid_cmd->add_option("--out-root", grid_out_root,
                       "runs root (default $AFFECT_OUT_ROOT or ./runs)");
  grid_cmd->add_option("--run-id", grid_run_id, "run directory name");
  grid_cmd->add_option("--out", grid_out, "full run directory (overrides root)");
  grid_cmd->add_option("--jobs", grid_jobs, "parallel cells")->default_val(1);
  grid_cmd->add_flag("--resume", grid_resume, "reuse completed cell files");
  add_common(grid_cmd, grid_common);

  // report
  std::string report_run;
  auto* report_cmd =
      app.add_subcommand("report", "rebuild reports from a run directory");
  report_cmd->add_option("--run", report_run)->required();

  // gradcheck
  int gc_seeds = 5;
  double gc_tol = 1e-4;
  auto* gc_cmd =
      app.add_subcommand("gradcheck", "finite-difference gradient checks");
  gc_cmd->add_option("--seeds", gc_seeds)->default_val(5);
  gc_cmd->add_option("--tol", gc_tol)->default_val(1e-4);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      return cmd_synth(synth_preset, synth_spec, synth_out, synth_seed);
    }
    if (ic->parsed()) return cmd_ingest_check(ic_manifest, ic_drop_nan);
    if (abfs_cmd->parsed()) {
      return cmd_abfs(abfs_manifest, abfs_domain, abfs_common, abfs_out);
    }
    if (train_cmd->parsed()) {
      return cmd_train(train_manifest, train_domain, train_selection,
                       train_common, train_out);
    }
    if (pred_cmd->parsed()) {
      return cmd_predict(pred_ckpt, pred_manifest, pred_out, pred_profile);
    }
    if (grid_cmd->parsed()) {
      return cmd_grid(grid_manifest, grid_preset, grid_spec, grid_common,
                      grid_out_root, grid_run_id, grid_out, grid_jobs,
                      grid_resume);
    }
    if (report_cmd->parsed()) return cmd_report(report_run);
    if (gc_cmd->parsed()) return cmd_gradcheck(gc_seeds, gc_tol);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
