#include "affect/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace affect::num {

Adam::Adam(std::vector<Param> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor->size(), 0.0);
    v_.emplace_back(p.tensor->size(), 0.0);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.tensor->zero_grad();
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& vals = params_[i].tensor->values();
    const auto& g = params_[i].tensor->grad();
    if (!all_finite(g)) {
      throw std::runtime_error("adam: non-finite gradient for parameter " +
                               params_[i].name);
    }
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < vals.size(); ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      vals[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

double global_grad_norm(std::span<const Param> params) {
  double ss = 0.0;
  for (const auto& p : params) {
    for (double g : p.tensor->grad()) ss += g * g;
  }
  return std::sqrt(ss);
}

void clip_global_norm(std::span<const Param> params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm <= max_norm || norm == 0.0) return;
  const double scale = max_norm / norm;
  for (const auto& p : params) {
    for (double& g : p.tensor->grad()) g *= scale;
  }
}

GradCheckResult grad_check(const std::function<double(bool)>& eval,
                           std::span<const Param> params, double step) {
  for (const auto& p : params) p.tensor->zero_grad();
  eval(true);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p.tensor->grad());

  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& vals = params[i].tensor->values();
    for (std::size_t j = 0; j < vals.size(); ++j) {
      const double orig = vals[j];
      vals[j] = orig + step;
      const double f_plus = eval(false);
      vals[j] = orig - step;
      const double f_minus = eval(false);
      vals[j] = orig;
      const double numeric = (f_plus - f_minus) / (2.0 * step);
      const double a = analytic[i][j];
      const double rel = std::abs(a - numeric) /
                         std::max({1.0, std::abs(a), std::abs(numeric)});
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_param = params[i].name + "[" + std::to_string(j) + "]";
      }
    }
  }
  return result;
}

}  // namespace affect::num
