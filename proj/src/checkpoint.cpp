#include "affect/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

namespace affect::num {

nlohmann::json params_to_json(std::span<const Param> params,
                              nlohmann::json meta) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["meta"] = std::move(meta);
  nlohmann::json pj = nlohmann::json::object();
  for (const auto& p : params) {
    pj[p.name] = {{"shape", {p.tensor->rows(), p.tensor->cols()}},
                  {"data", p.tensor->values()}};
  }
  j["params"] = std::move(pj);
  return j;
}

void json_to_params(const nlohmann::json& j, std::span<Param> params) {
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version");
  }
  const auto& pj = j.at("params");
  for (auto& p : params) {
    if (!pj.contains(p.name)) {
      throw std::runtime_error("checkpoint: missing parameter " + p.name);
    }
    const auto& entry = pj.at(p.name);
    const auto shape = entry.at("shape").get<std::vector<int>>();
    if (shape.size() != 2 || shape[0] != p.tensor->rows() ||
        shape[1] != p.tensor->cols()) {
      throw std::runtime_error("checkpoint: shape mismatch for " + p.name);
    }
    auto data = entry.at("data").get<std::vector<double>>();
    if (data.size() != p.tensor->size()) {
      throw std::runtime_error("checkpoint: data size mismatch for " + p.name);
    }
    p.tensor->values() = std::move(data);
  }
}

void save_checkpoint(const std::string& path, std::span<const Param> params,
                     nlohmann::json meta) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
  out << params_to_json(params, std::move(meta)).dump(1) << "\n";
}

nlohmann::json load_checkpoint(const std::string& path,
                               std::span<Param> params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  nlohmann::json j;
  in >> j;
  json_to_params(j, params);
  return j.at("meta");
}

nlohmann::json load_checkpoint_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j.at("meta");
}

}  // namespace affect::num
