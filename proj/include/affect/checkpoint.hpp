#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "affect/tensor.hpp"

namespace affect::num {

inline constexpr int kCheckpointVersion = 1;

// Parameter map serialized as JSON: version, a meta object supplied by the
// caller, and one {shape, data} entry per named parameter. Doubles are
// written with shortest round-trip formatting, so save -> load -> save is
// byte-stable.
nlohmann::json params_to_json(std::span<const Param> params,
                              nlohmann::json meta);
void json_to_params(const nlohmann::json& j, std::span<Param> params);

void save_checkpoint(const std::string& path, std::span<const Param> params,
                     nlohmann::json meta);
// Returns the meta object; the params must already have matching shapes.
nlohmann::json load_checkpoint(const std::string& path,
                               std::span<Param> params);
nlohmann::json load_checkpoint_meta(const std::string& path);

}  // namespace affect::num
