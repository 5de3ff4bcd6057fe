#pragma once

#include <cstdint>
#include <span>

#include "affect/metrics.hpp"
#include "affect/tensor.hpp"

namespace affect::num {

// Mask-weighted mean squared error, pooled over valid frames and all
// columns. Throws if the mask selects no frame.
double mse(const Tensor& pred, const Tensor& truth,
           std::span<const std::uint8_t> mask);

// 1 - CCC averaged over columns, using the metrics-module definition.
double ccc_loss(const Tensor& pred, const Tensor& truth,
                std::span<const std::uint8_t> mask);

// Pooled concordance objective for full-batch training: accumulate
// moments over every batch first, then query per-element gradients.
class CccObjective {
 public:
  explicit CccObjective(int targets = 2);
  void add(double pred, double truth, int target);
  double loss() const;  // mean over targets of (1 - CCC)
  // d loss / d pred for one pooled element
  double dpred(int target, double pred, double truth) const;

 private:
  int targets_;
  metrics::PooledMoments m_[2];
};

}  // namespace affect::num
