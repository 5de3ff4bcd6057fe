#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "affect/abfs.hpp"
#include "affect/regressor.hpp"

namespace affect {

// One bundle of every tunable the pipeline needs. `paper` carries the
// published hyperparameters; `desk` is a reduced configuration sized so
// full grids finish in minutes on one machine.
struct RunProfile {
  std::string name = "desk";
  int pad_length = 256;
  double std_floor = 1e-8;
  int k_folds = 5;
  double agreement_threshold = 0.0;
  double abfs_threshold = 0.25;
  abfs::AttentionTcnConfig tcn;
  reg::LstmRegressorConfig lstm;
  // bypasses attention selection with a fixed column set (ablations)
  std::optional<std::vector<int>> force_selection;
};

RunProfile paper_profile();
RunProfile desk_profile();
RunProfile profile_by_name(const std::string& name);

// "key=value" overrides; unknown keys are an error listing valid keys.
void apply_override(RunProfile& profile, const std::string& assignment);
void apply_overrides(RunProfile& profile,
                     const std::vector<std::string>& assignments);

nlohmann::json profile_to_json(const RunProfile& profile);

}  // namespace affect
