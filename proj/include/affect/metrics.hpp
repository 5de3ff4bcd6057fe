#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "affect/tensor.hpp"

namespace affect::metrics {

struct CccValue {
  double value = 0.0;
  // set when both series are constant and the denominator vanishes;
  // the value is then defined as 0
  bool degenerate = false;
};

// Pooled RMSE over valid frames. Throws if the mask has no valid frame.
double rmse(std::span<const double> pred, std::span<const double> truth,
            std::span<const std::uint8_t> mask);

// Lin's concordance correlation coefficient with population (1/n) moments:
//   2 cov(x,y) / (var(x) + var(y) + (mean(x) - mean(y))^2)
// Throws if fewer than 2 valid frames.
CccValue ccc(std::span<const double> pred, std::span<const double> truth,
             std::span<const std::uint8_t> mask);

double pearson(std::span<const double> x, std::span<const double> y);

// Running moments for one (pred, truth) stream; basis for both the pooled
// metrics and the concordance loss gradient.
struct PooledMoments {
  double sx = 0.0, sy = 0.0, sxy = 0.0, sxx = 0.0, syy = 0.0;
  double serr = 0.0;  // sum of squared differences, kept separate so the
                      // RMSE path does not cancel when pred ~ truth
  long long n = 0;

  void add(double x, double y) {
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
    const double e = x - y;
    serr += e * e;
    ++n;
  }
  double mean_x() const { return sx / static_cast<double>(n); }
  double mean_y() const { return sy / static_cast<double>(n); }
  double var_x() const { return sxx / static_cast<double>(n) - mean_x() * mean_x(); }
  double var_y() const { return syy / static_cast<double>(n) - mean_y() * mean_y(); }
  double cov() const { return sxy / static_cast<double>(n) - mean_x() * mean_y(); }
  CccValue ccc() const;
};

struct TargetMetrics {
  double rmse = 0.0;
  double ccc = 0.0;
  bool ccc_degenerate = false;
  long long valid_frames = 0;
};

// One evaluation (or one fold) plus optional cross-fold aggregates.
// `combined` values are the unweighted mean of the two targets.
struct MetricReport {
  TargetMetrics valence;
  TargetMetrics arousal;
  double rmse_combined = 0.0;
  double ccc_combined = 0.0;

  std::vector<double> fold_rmse;  // combined value per fold
  std::vector<double> fold_ccc;
  double rmse_mean = 0.0, rmse_std = 0.0;
  double ccc_mean = 0.0, ccc_std = 0.0;
};

// Pools valid frames of L x 2 prediction/label pairs across an evaluation
// set, then reports per-target and combined metrics.
class PooledEval {
 public:
  void add(const num::Tensor& pred, const num::Tensor& truth,
           std::span<const std::uint8_t> mask);
  MetricReport report() const;
  long long valid_frames() const { return valence_.n; }

 private:
  PooledMoments valence_;
  PooledMoments arousal_;
};

// Mean and standard deviation (population) of combined metrics across folds.
MetricReport aggregate(std::span<const MetricReport> folds);

}  // namespace affect::metrics
