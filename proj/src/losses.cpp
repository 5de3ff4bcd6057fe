#include "affect/losses.hpp"

#include <stdexcept>

namespace affect::num {

double mse(const Tensor& pred, const Tensor& truth,
           std::span<const std::uint8_t> mask) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols() ||
      static_cast<std::size_t>(pred.rows()) != mask.size()) {
    throw std::invalid_argument("mse: shape mismatch");
  }
  double sum = 0.0;
  long long n = 0;
  for (int t = 0; t < pred.rows(); ++t) {
    if (!mask[static_cast<std::size_t>(t)]) continue;
    for (int c = 0; c < pred.cols(); ++c) {
      const double e = pred(t, c) - truth(t, c);
      sum += e * e;
    }
    ++n;
  }
  if (n == 0) throw std::runtime_error("mse: no valid frames");
  return sum / (static_cast<double>(n) * pred.cols());
}

double ccc_loss(const Tensor& pred, const Tensor& truth,
                std::span<const std::uint8_t> mask) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols() ||
      static_cast<std::size_t>(pred.rows()) != mask.size()) {
    throw std::invalid_argument("ccc_loss: shape mismatch");
  }
  CccObjective obj(pred.cols());
  for (int t = 0; t < pred.rows(); ++t) {
    if (!mask[static_cast<std::size_t>(t)]) continue;
    for (int c = 0; c < pred.cols(); ++c) obj.add(pred(t, c), truth(t, c), c);
  }
  return obj.loss();
}

CccObjective::CccObjective(int targets) : targets_(targets) {
  if (targets < 1 || targets > 2) {
    throw std::invalid_argument("ccc objective: 1 or 2 targets");
  }
}

void CccObjective::add(double pred, double truth, int target) {
  m_[target].add(pred, truth);
}

double CccObjective::loss() const {
  double acc = 0.0;
  for (int c = 0; c < targets_; ++c) acc += 1.0 - m_[c].ccc().value;
  return acc / targets_;
}

double CccObjective::dpred(int target, double pred, double truth) const {
  const auto& m = m_[target];
  const double mx = m.mean_x();
  const double my = m.mean_y();
  const double dm = mx - my;
  const double denom = m.var_x() + m.var_y() + dm * dm;
  if (denom <= 0.0) return 0.0;
  const double c = 2.0 * m.cov() / denom;
  const double dccc = 2.0 / (static_cast<double>(m.n) * denom) *
                      ((truth - my) - c * ((pred - mx) + dm));
  return -dccc / targets_;
}

}  // namespace affect::num
