#include <unistd.h>
// Acceptance suite: one checkable criterion per function, each printing a
// single PASS/FAIL line. Run everything or a single criterion via --only N.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "affect/abfs.hpp"
#include "affect/dataset.hpp"
#include "affect/experiments.hpp"
#include "affect/gradcheck_suite.hpp"
#include "affect/metrics.hpp"
#include "affect/profiles.hpp"
#include "affect/rng.hpp"
#include "affect/synthgen.hpp"

#include "../unit/oracles.hpp"

namespace fs = std::filesystem;
namespace xp = affect::experiments;
namespace nk = affect::num;
namespace data = affect::data;

namespace {

struct Criterion {
  int id;
  std::string name;
  std::function<bool(std::string&)> run;
};

fs::path scratch_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() /
                     ("affect_acceptance_" + tag + "_" +
                      std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- 1
bool gradient_fidelity(std::string& detail) {
  const auto cases = nk::run_gradcheck_suite(5, 1e-4);
  double worst = 0.0;
  std::string worst_name;
  bool ok = true;
  for (const auto& c : cases) {
    if (c.max_rel_err > worst) {
      worst = c.max_rel_err;
      worst_name = c.name;
    }
    ok = ok && c.pass;
  }
  std::ostringstream ss;
  ss << cases.size() << " cases, worst " << worst << " (" << worst_name << ")";
  detail = ss.str();
  return ok;
}

// ---------------------------------------------------------------- 2
bool metric_oracles(std::string& detail) {
  nk::Rng rng(20250810);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 50 + rng.uniform_int(200);
    std::vector<double> pred, truth;
    std::vector<std::uint8_t> mask;
    int valid = 0;
    for (int i = 0; i < n; ++i) {
      pred.push_back(rng.uniform());
      truth.push_back(rng.uniform());
      const std::uint8_t m = rng.uniform() < 0.75 ? 1 : 0;
      mask.push_back(m);
      valid += m;
    }
    if (valid < 2) mask[0] = mask[1] = 1;
    worst = std::max(worst,
                     std::abs(affect::metrics::rmse(pred, truth, mask) -
                              oracle::rmse(pred, truth, mask)));
    worst = std::max(worst,
                     std::abs(affect::metrics::ccc(pred, truth, mask).value -
                              oracle::ccc(pred, truth, mask)));
  }

  std::vector<double> x{0.1, 0.8, 0.4, 0.3};
  std::vector<std::uint8_t> all(4, 1);
  const bool self_ok =
      std::abs(affect::metrics::ccc(x, x, all).value - 1.0) < 1e-15;

  std::vector<double> a{0.0, 1.0}, b{1.0, 0.0};
  std::vector<std::uint8_t> two(2, 1);
  const bool anti_ok = affect::metrics::ccc(a, b, two).value == -1.0;

  std::ostringstream ss;
  ss << "100 random pairs, worst |delta| " << worst << ", ccc(x,x)="
     << (self_ok ? "1" : "BAD") << ", hand case " << (anti_ok ? "-1" : "BAD");
  detail = ss.str();
  return worst < 1e-9 && self_ok && anti_ok;
}

// ---------------------------------------------------------------- 3
bool causality(std::string& detail) {
  nk::Rng rng(31);
  bool ok = true;

  {  // stacked dilated convolutions
    nk::ConvDepthwise c1(6, 4, 1, rng), c2(6, 4, 3, rng);
    nk::Tensor x(50, 6);
    for (double& v : x.values()) v = rng.normal();
    nk::Tensor h1(50, 6), h2(50, 6);
    c1.forward(x, 50, h1);
    c2.forward(h1, 50, h2);
    for (int tp = 10; tp < 50; tp += 13) {
      nk::Tensor xp = x;
      for (int d = 0; d < 6; ++d) xp(tp, d) += 10.0 + d;
      nk::Tensor p1(50, 6), p2(50, 6);
      c1.forward(xp, 50, p1);
      c2.forward(p1, 50, p2);
      for (int t = 0; t < tp; ++t) {
        for (int d = 0; d < 6; ++d) ok = ok && p2(t, d) == h2(t, d);
      }
    }
  }

  {  // full attention network
    affect::abfs::AttentionTcnConfig cfg;
    cfg.kernel_size = 5;
    cfg.dilation_base = 5;
    cfg.hidden_levels = 1;
    cfg.seed = 99;
    affect::abfs::AttentionTcn net(6, cfg);
    nk::Tensor x(60, 6);
    for (double& v : x.values()) v = rng.normal();
    const nk::Tensor base = net.predict(x, 60);
    for (int tp = 5; tp < 60; tp += 7) {
      nk::Tensor xp = x;
      for (int d = 0; d < 6; ++d) xp(tp, d) -= 3.0;
      const nk::Tensor out = net.predict(xp, 60);
      for (int t = 0; t < tp; ++t) ok = ok && out(t, 0) == base(t, 0);
    }
  }

  detail = "outputs at t unchanged by perturbations at t' > t (exact)";
  return ok;
}

// ---------------------------------------------------------------- 4
bool abfs_recovery(std::string& detail) {
  const auto profile = affect::desk_profile();
  int planted_ok = 0, spurious_ok = 0;
  std::ostringstream ss;

  for (int s = 0; s < 5; ++s) {
    auto spec = affect::synth::preset("recovery20");
    spec.seed = nk::derive_seed(8800, "recovery", static_cast<std::uint64_t>(s));
    const auto out = affect::synth::generate(spec);

    std::vector<data::PaddedBatch> batches;
    for (const auto& sample : out.store.samples) {
      batches.push_back(data::pad_and_mask(sample, profile.pad_length));
    }
    const auto stats = data::fit_standardizer(batches, profile.std_floor);
    for (auto& b : batches) data::apply_standardizer(b, stats);

    auto cfg_v = profile.tcn;
    cfg_v.seed = nk::derive_seed(spec.seed, "tcn-valence");
    const auto scores_v = affect::abfs::train_attention_tcn(
                              batches, affect::abfs::Target::valence, cfg_v)
                              .second;
    auto cfg_a = profile.tcn;
    cfg_a.seed = nk::derive_seed(spec.seed, "tcn-arousal");
    const auto scores_a = affect::abfs::train_attention_tcn(
                              batches, affect::abfs::Target::arousal, cfg_a)
                              .second;
    const auto selection = affect::abfs::combine(
        affect::abfs::select_features(scores_v, profile.abfs_threshold),
        affect::abfs::select_features(scores_a, profile.abfs_threshold),
        profile.abfs_threshold);

    const std::set<int> chosen(selection.unioned.begin(), selection.unioned.end());
    int planted = 0;
    for (int j : out.truth.causal_indices) planted += chosen.count(j) ? 1 : 0;
    int spurious = 0;
    for (int j : out.truth.spurious_indices) spurious += chosen.count(j) ? 1 : 0;

    planted_ok += planted >= 2 ? 1 : 0;
    spurious_ok += spurious == 0 ? 1 : 0;
    ss << " seed" << s << ": planted " << planted << "/3, spurious " << spurious
       << ", |union| " << chosen.size() << ";";
  }
  detail = "planted>=2 in " + std::to_string(planted_ok) +
           "/5, no spurious in " + std::to_string(spurious_ok) + "/5 —" +
           ss.str();
  return planted_ok >= 4 && spurious_ok >= 4;
}

// ---------------------------------------------------------------- 5
bool transfer_property(std::string& detail) {
  int passes = 0;
  std::ostringstream ss;

  for (int s = 0; s < 5; ++s) {
    auto spec = affect::synth::preset("default3");
    spec.seed = nk::derive_seed(9900, "transfer", static_cast<std::uint64_t>(s));
    const auto out = affect::synth::generate(spec);
    const auto profile = affect::desk_profile();
    const std::uint64_t grid_seed = nk::derive_seed(spec.seed, "grid");

    const auto plans =
        xp::build_grid(out.store.domains(), grid_seed, profile.k_folds, "desk");
    double intra_sum = 0.0, inter_sum = 0.0;
    int intra_n = 0, inter_n = 0;
    bool all_ok = true;
    for (const auto& plan : plans) {
      const auto result = xp::run_plan(plan, out.store, profile);
      if (!result.has_metrics) {
        all_ok = false;
        continue;
      }
      if (plan.mode == xp::Mode::intra) {
        intra_sum += result.aggregate.rmse_mean;
        ++intra_n;
      } else if (plan.mode == xp::Mode::inter) {
        inter_sum += result.aggregate.rmse_mean;
        ++inter_n;
      }
    }

    auto ablation_profile = profile;
    ablation_profile.force_selection = out.truth.spurious_indices;
    double ablation_sum = 0.0;
    int ablation_n = 0;
    for (const auto& plan : plans) {
      if (plan.mode != xp::Mode::inter) continue;
      const auto result = xp::run_plan(plan, out.store, ablation_profile);
      if (!result.has_metrics) {
        all_ok = false;
        continue;
      }
      ablation_sum += result.aggregate.rmse_mean;
      ++ablation_n;
    }

    const double intra = intra_sum / std::max(1, intra_n);
    const double inter = inter_sum / std::max(1, inter_n);
    const double ablation = ablation_sum / std::max(1, ablation_n);
    const bool pass =
        all_ok && inter <= 1.15 * intra && inter < ablation;
    passes += pass ? 1 : 0;
    ss << " seed" << s << ": intra " << intra << ", inter " << inter
       << ", spurious-forced " << ablation << (pass ? " ok;" : " FAIL;");
  }
  detail = std::to_string(passes) + "/5 seeds —" + ss.str();
  return passes >= 4;
}

// ---------------------------------------------------------------- 6
bool structural_reproduction(std::string& detail) {
  auto spec = affect::synth::preset("default6");
  spec.samples_per_domain = 5;
  const auto out = affect::synth::generate(spec);
  const auto plans = xp::build_grid(out.store.domains(), 1, 5, "desk");

  int intra = 0, inter = 0, multi = 0;
  for (const auto& p : plans) {
    switch (p.mode) {
      case xp::Mode::intra: ++intra; break;
      case xp::Mode::inter: ++inter; break;
      case xp::Mode::multi: ++multi; break;
    }
  }

  const auto dir = scratch_dir("structural");
  xp::ResultsMatrix matrix;
  matrix.domains = out.store.domains();
  xp::ExperimentResult cell;
  cell.plan = xp::make_plan(xp::Mode::intra, "dom0", "dom0", 5, 1, "desk");
  cell.complete = true;
  cell.has_metrics = true;
  cell.aggregate.rmse_mean = 0.39;
  cell.aggregate.ccc_mean = 0.06;
  matrix.cells.push_back(cell);
  xp::emit_matrix(matrix, dir.string());
  const bool fmt_ok =
      slurp(dir / "matrix.txt").find("0.39 / 0.06") != std::string::npos;
  fs::remove_all(dir);

  std::ostringstream ss;
  ss << plans.size() << " plans (" << intra << " intra + " << inter
     << " inter + " << multi << " multi), cell format "
     << (fmt_ok ? "ok" : "BAD");
  detail = ss.str();
  return plans.size() == 37 && intra == 6 && inter == 30 && multi == 1 &&
         fmt_ok;
}

// ---------------------------------------------------------------- 7
bool no_leakage(std::string& detail) {
  auto spec = affect::synth::preset("default3");
  spec.samples_per_domain = 6;
  spec.len = 60;
  spec.dim = 8;
  spec.seed = 777;
  const auto out = affect::synth::generate(spec);

  auto profile = affect::desk_profile();
  affect::apply_overrides(profile, {"pad_length=64", "tcn.epochs=40",
                                    "tcn.kernel=6", "tcn.dilation=6",
                                    "lstm.hidden=12", "lstm.epochs=30"});

  bool ok = true;
  std::ostringstream ss;
  for (const auto mode : {xp::Mode::intra, xp::Mode::inter}) {
    const std::string target = mode == xp::Mode::intra ? "dom0" : "dom1";
    auto plan = xp::make_plan(mode, "dom0", target, 5, 4242, "desk");

    const auto dir_a = scratch_dir("leak_clean");
    const auto dir_b = scratch_dir("leak_noisy");
    xp::PipelineHooks clean;
    clean.checkpoint_dir = dir_a.string();
    xp::PipelineHooks noisy;
    noisy.checkpoint_dir = dir_b.string();
    noisy.randomize_test_labels = true;

    const auto r1 = xp::run_plan(plan, out.store, profile, clean);
    const auto r2 = xp::run_plan(plan, out.store, profile, noisy);
    ok = ok && r1.complete && r2.complete;
    ok = ok && r1.aggregate.rmse_mean != r2.aggregate.rmse_mean;
    for (std::size_t f = 0; f < r1.folds.size(); ++f) {
      ok = ok && r1.folds[f].selection.unioned == r2.folds[f].selection.unioned;
    }
    int files = 0;
    for (const auto& entry : fs::directory_iterator(dir_a)) {
      const auto other = dir_b / entry.path().filename();
      ok = ok && fs::exists(other) && slurp(entry.path()) == slurp(other);
      ++files;
    }
    ok = ok && files > 0;
    ss << " " << xp::to_string(mode) << ": metrics "
       << r1.aggregate.rmse_mean << " vs " << r2.aggregate.rmse_mean << ", "
       << files << " artifacts byte-identical;";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
  }
  detail = "label noise moved metrics, not parameters or selections —" +
           ss.str();
  return ok;
}

// ---------------------------------------------------------------- 8
bool determinism(std::string& detail) {
#ifndef AFFECT_CLI_PATH
  detail = "cli binary path not wired";
  return false;
#else
  const auto base = scratch_dir("determinism");
  const std::string quick =
      " --set tcn.epochs=25 --set tcn.kernel=4 --set tcn.dilation=4"
      " --set lstm.hidden=8 --set lstm.epochs=15 --set pad_length=48";
  const std::string spec_path = (base / "spec.json").string();
  {
    std::ofstream spec(spec_path);
    spec << R"({"n_domains": 2, "samples_per_domain": 6, "dim": 6, "len": 40,
                "causal_indices": [0, 1], "lags": [1, 2],
                "weights": [1.8, -1.5], "spurious_indices": [3], "seed": 1})";
  }
  auto run_once = [&](const std::string& name) {
    const std::string cmd = std::string(AFFECT_CLI_PATH) + " grid --spec " +
                            spec_path + " --seed 11 --jobs 1 --out " +
                            (base / name).string() + quick + " > " +
                            (base / (name + ".log")).string() + " 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  const int rc1 = run_once("a");
  const int rc2 = run_once("b");
  const std::string a = slurp(base / "a" / "matrix.csv");
  const std::string b = slurp(base / "b" / "matrix.csv");
  const bool ok = rc1 == 0 && rc2 == 0 && !a.empty() && a == b;
  std::ostringstream ss;
  ss << "two cli grid runs, matrix.csv " << a.size() << " bytes, "
     << (a == b ? "identical" : "DIFFER");
  detail = ss.str();
  fs::remove_all(base);
  return ok;
#endif
}

// ---------------------------------------------------------------- 9
bool mask_correctness(std::string& detail) {
  auto spec = affect::synth::preset("default3");
  spec.n_domains = 2;
  spec.samples_per_domain = 6;
  spec.len = 50;
  spec.dim = 8;
  spec.seed = 31337;
  const auto out = affect::synth::generate(spec);

  auto profile = affect::desk_profile();
  affect::apply_overrides(profile, {"pad_length=50", "tcn.epochs=40",
                                    "tcn.kernel=6", "tcn.dilation=6",
                                    "lstm.hidden=12", "lstm.epochs=25"});
  auto padded_profile = profile;
  padded_profile.pad_length = 100;  // 50 real frames + 50 padded

  double worst = 0.0;
  bool ok = true;
  for (const auto mode : {xp::Mode::intra, xp::Mode::inter}) {
    const std::string target = mode == xp::Mode::intra ? "dom0" : "dom1";
    auto plan = xp::make_plan(mode, "dom0", target, 5, 606, "desk");
    const auto r1 = xp::run_plan(plan, out.store, profile);
    const auto r2 = xp::run_plan(plan, out.store, padded_profile);
    ok = ok && r1.complete && r2.complete;
    for (std::size_t f = 0; f < r1.folds.size(); ++f) {
      worst = std::max(worst, std::abs(r1.folds[f].report.rmse_combined -
                                       r2.folds[f].report.rmse_combined));
      worst = std::max(worst, std::abs(r1.folds[f].report.ccc_combined -
                                       r2.folds[f].report.ccc_combined));
    }
  }
  std::ostringstream ss;
  ss << "fifty padded frames appended, worst metric delta " << worst;
  detail = ss.str();
  return ok && worst <= 1e-12;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[i + 1]);
    }
  }

  const std::vector<Criterion> criteria{
      {1, "gradient-fidelity", gradient_fidelity},
      {2, "metric-oracles", metric_oracles},
      {3, "causality", causality},
      {4, "abfs-recovery", abfs_recovery},
      {5, "transfer-property", transfer_property},
      {6, "structural-reproduction", structural_reproduction},
      {7, "no-leakage", no_leakage},
      {8, "determinism", determinism},
      {9, "mask-correctness", mask_correctness},
  };

  bool all_ok = true;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << " ("
              << secs << "s) — " << detail << "\n";
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
