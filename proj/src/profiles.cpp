#include "affect/profiles.hpp"

#include <charconv>
#include <stdexcept>

namespace affect {

RunProfile paper_profile() {
  RunProfile p;
  p.name = "paper";
  p.pad_length = 1000;
  p.tcn = {.epochs = 1000,
           .kernel_size = 250,
           .dilation_base = 250,
           .hidden_levels = 1,
           .lr = 0.01,
           .seed = 0};
  p.lstm = {.hidden = 256,
            .dropout = 0.1,
            .lr = 0.1,
            .max_epochs = 1000,
            .patience = 10,
            .min_delta = 1e-4,
            .val_fraction = 0.2,
            .clip_norm = 5.0,
            .loss = reg::LossKind::rmse,
            .seed = 0};
  return p;
}

RunProfile desk_profile() {
  RunProfile p;
  p.name = "desk";
  p.pad_length = 256;
  p.tcn = {.epochs = 200,
           .kernel_size = 25,
           .dilation_base = 25,
           .hidden_levels = 1,
           .lr = 0.01,
           .seed = 0};
  p.lstm = {.hidden = 32,
            .dropout = 0.1,
            .lr = 0.01,
            .max_epochs = 200,
            .patience = 10,
            .min_delta = 1e-4,
            .val_fraction = 0.2,
            .clip_norm = 5.0,
            .loss = reg::LossKind::rmse,
            .seed = 0};
  return p;
}

RunProfile profile_by_name(const std::string& name) {
  if (name == "paper") return paper_profile();
  if (name == "desk") return desk_profile();
  throw std::runtime_error("unknown profile: " + name +
                           " (expected paper or desk)");
}

namespace {

const char* kValidKeys =
    "pad_length, k_folds, agreement_threshold, abfs.threshold, "
    "abfs.force_selection, tcn.epochs, tcn.kernel, tcn.dilation, tcn.levels, "
    "tcn.lr, lstm.hidden, lstm.dropout, lstm.lr, lstm.epochs, lstm.patience, "
    "lstm.min_delta, lstm.val_fraction, lstm.clip_norm, lstm.loss";

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw std::runtime_error("override " + key + ": bad integer '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw std::runtime_error("override " + key + ": bad number '" + v + "'");
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t comma = v.find(',', start);
    const std::string part =
        v.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!part.empty()) out.push_back(parse_int(key, part));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) {
    throw std::runtime_error("override " + key + ": empty index list");
  }
  return out;
}

}  // namespace

void apply_override(RunProfile& profile, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::runtime_error("override must be key=value: " + assignment);
  }
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  if (key == "pad_length") profile.pad_length = parse_int(key, value);
  else if (key == "k_folds") profile.k_folds = parse_int(key, value);
  else if (key == "agreement_threshold") profile.agreement_threshold = parse_real(key, value);
  else if (key == "abfs.threshold") profile.abfs_threshold = parse_real(key, value);
  else if (key == "abfs.force_selection") profile.force_selection = parse_int_list(key, value);
  else if (key == "tcn.epochs") profile.tcn.epochs = parse_int(key, value);
  else if (key == "tcn.kernel") profile.tcn.kernel_size = parse_int(key, value);
  else if (key == "tcn.dilation") profile.tcn.dilation_base = parse_int(key, value);
  else if (key == "tcn.levels") profile.tcn.hidden_levels = parse_int(key, value);
  else if (key == "tcn.lr") profile.tcn.lr = parse_real(key, value);
  else if (key == "lstm.hidden") profile.lstm.hidden = parse_int(key, value);
  else if (key == "lstm.dropout") profile.lstm.dropout = parse_real(key, value);
  else if (key == "lstm.lr") profile.lstm.lr = parse_real(key, value);
  else if (key == "lstm.epochs") profile.lstm.max_epochs = parse_int(key, value);
  else if (key == "lstm.patience") profile.lstm.patience = parse_int(key, value);
  else if (key == "lstm.min_delta") profile.lstm.min_delta = parse_real(key, value);
  else if (key == "lstm.val_fraction") profile.lstm.val_fraction = parse_real(key, value);
  else if (key == "lstm.clip_norm") profile.lstm.clip_norm = parse_real(key, value);
  else if (key == "lstm.loss") profile.lstm.loss = reg::loss_kind_from_string(value);
  else {
    throw std::runtime_error("unknown override key '" + key +
                             "'; valid keys: " + kValidKeys);
  }
}

void apply_overrides(RunProfile& profile,
                     const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) apply_override(profile, a);
}

nlohmann::json profile_to_json(const RunProfile& profile) {
  nlohmann::json j;
  j["name"] = profile.name;
  j["pad_length"] = profile.pad_length;
  j["std_floor"] = profile.std_floor;
  j["k_folds"] = profile.k_folds;
  j["agreement_threshold"] = profile.agreement_threshold;
  j["abfs_threshold"] = profile.abfs_threshold;
  j["tcn"] = {{"epochs", profile.tcn.epochs},
              {"kernel_size", profile.tcn.kernel_size},
              {"dilation_base", profile.tcn.dilation_base},
              {"hidden_levels", profile.tcn.hidden_levels},
              {"lr", profile.tcn.lr}};
  j["lstm"] = {{"hidden", profile.lstm.hidden},
               {"dropout", profile.lstm.dropout},
               {"lr", profile.lstm.lr},
               {"max_epochs", profile.lstm.max_epochs},
               {"patience", profile.lstm.patience},
               {"min_delta", profile.lstm.min_delta},
               {"val_fraction", profile.lstm.val_fraction},
               {"clip_norm", profile.lstm.clip_norm},
               {"loss", reg::to_string(profile.lstm.loss)}};
  if (profile.force_selection) {
    j["force_selection"] = *profile.force_selection;
  }
  return j;
}

}  // namespace affect
