#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "affect/tensor.hpp"

namespace affect::num {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over a fixed parameter list. Throws on a non-finite
// gradient, naming the offending parameter.
class Adam {
 public:
  Adam(std::vector<Param> params, AdamConfig cfg);

  void zero_grad();
  void step();
  long step_count() const { return t_; }
  std::span<const Param> params() const { return params_; }

 private:
  std::vector<Param> params_;
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

double global_grad_norm(std::span<const Param> params);
void clip_global_norm(std::span<const Param> params, double max_norm);

// Central-difference check of reverse-mode gradients.
//   eval(true)  -> loss; must also leave fresh gradients in every param
//   eval(false) -> loss only
// Relative error is |a - n| / max(1, |a|, |n|).
struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
};

GradCheckResult grad_check(const std::function<double(bool)>& eval,
                           std::span<const Param> params, double step = 1e-5);

}  // namespace affect::num
