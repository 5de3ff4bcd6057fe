#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "affect/abfs.hpp"
#include "affect/dataset.hpp"
#include "affect/metrics.hpp"
#include "affect/profiles.hpp"

namespace affect::experiments {

enum class Mode { intra, inter, multi };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

inline constexpr const char* kAllDomains = "ALL";

struct ExperimentPlan {
  Mode mode = Mode::intra;
  std::string source;  // kAllDomains for multi
  std::string target;
  int k = 5;
  std::uint64_t seed = 0;
  std::string profile_id = "desk";
};

ExperimentPlan make_plan(Mode mode, std::string source, std::string target,
                         int k, std::uint64_t seed, std::string profile_id);

// d intra + d(d-1) inter + 1 multi, deterministic order, with per-cell
// seeds derived from the run seed and the cell identity (not the order).
std::vector<ExperimentPlan> build_grid(const std::vector<std::string>& domains,
                                       std::uint64_t seed, int k = 5,
                                       const std::string& profile_id = "desk",
                                       std::vector<std::string>* warnings = nullptr);

struct FoldOutcome {
  int fold = 0;
  bool ok = false;
  std::string error;
  metrics::MetricReport report;
  abfs::AbfsSelection selection;
};

struct ExperimentResult {
  ExperimentPlan plan;
  std::vector<FoldOutcome> folds;
  bool complete = false;              // every fold succeeded
  bool has_metrics = false;           // at least one fold succeeded
  metrics::MetricReport aggregate;    // over successful folds
  std::string cell_error;             // set when the whole cell failed
};

// Test-facing knobs; not part of the normal pipeline surface.
struct PipelineHooks {
  // replaces test labels with uniform noise before evaluation
  bool randomize_test_labels = false;
  std::uint64_t randomize_seed = 1234;
  // when set, writes one regressor checkpoint + selection json per fold
  std::string checkpoint_dir;
};

// One grid cell: per fold, fit standardizer on the training folds, apply
// to train and test, run attention selection on the training folds only,
// reshape both sides, train the regressor, evaluate on the test side.
// intra/multi test on the held-out fold; inter trains on source folds and
// tests on the whole target domain.
ExperimentResult run_plan(const ExperimentPlan& plan,
                          const data::DomainStore& store,
                          const RunProfile& profile,
                          const PipelineHooks& hooks = {});

struct ResultsMatrix {
  std::vector<std::string> domains;
  std::vector<ExperimentResult> cells;  // grid order
};

nlohmann::json result_to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::json& j);

// matrix.csv, matrix.txt ("R.RR / C.CC" cells, em-dash for failed cells),
// figdata.csv (long format for intra-vs-inter comparisons)
void emit_matrix(const ResultsMatrix& matrix, const std::string& dir);
// features.csv (per cell, fold, selected feature) and features.txt
// (per-source stable sets with modality counts)
void emit_feature_report(const ResultsMatrix& matrix,
                         const data::FeatureCatalog& catalog,
                         const std::string& dir);

struct GridOptions {
  int jobs = 1;
  bool resume = false;
};

// Runs every cell, persisting cells/<source>__<target>.json incrementally,
// then writes matrix and feature reports plus a config echo into run_dir.
ResultsMatrix run_grid(const data::DomainStore& store,
                       const RunProfile& profile, std::uint64_t seed,
                       const std::string& run_dir,
                       const GridOptions& options = {});

// Rebuilds the matrix from persisted cell JSONs; the catalog comes from
// the run directory's catalog.csv.
ResultsMatrix load_run(const std::string& run_dir);
data::FeatureCatalog load_run_catalog(const std::string& run_dir);

std::string cell_file_name(const ExperimentPlan& plan);

}  // namespace affect::experiments
