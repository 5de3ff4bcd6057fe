#include "affect/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace affect::metrics {

double rmse(std::span<const double> pred, std::span<const double> truth,
            std::span<const std::uint8_t> mask) {
  if (pred.size() != truth.size() || pred.size() != mask.size()) {
    throw std::invalid_argument("rmse: length mismatch");
  }
  double sum = 0.0;
  long long n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    const double e = pred[i] - truth[i];
    sum += e * e;
    ++n;
  }
  if (n == 0) throw std::runtime_error("rmse: no valid frames");
  return std::sqrt(sum / static_cast<double>(n));
}

CccValue PooledMoments::ccc() const {
  if (n < 2) throw std::runtime_error("ccc: fewer than 2 valid frames");
  const double dm = mean_x() - mean_y();
  const double denom = var_x() + var_y() + dm * dm;
  if (denom <= 0.0) {
    return CccValue{0.0, true};
  }
  return CccValue{2.0 * cov() / denom, false};
}

CccValue ccc(std::span<const double> pred, std::span<const double> truth,
             std::span<const std::uint8_t> mask) {
  if (pred.size() != truth.size() || pred.size() != mask.size()) {
    throw std::invalid_argument("ccc: length mismatch");
  }
  PooledMoments m;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mask[i]) m.add(pred[i], truth[i]);
  }
  return m.ccc();
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("pearson: need two equal-length series");
  }
  PooledMoments m;
  for (std::size_t i = 0; i < x.size(); ++i) m.add(x[i], y[i]);
  const double d = std::sqrt(m.var_x()) * std::sqrt(m.var_y());
  if (d <= 0.0) return 0.0;
  return m.cov() / d;
}

void PooledEval::add(const num::Tensor& pred, const num::Tensor& truth,
                     std::span<const std::uint8_t> mask) {
  if (pred.cols() != 2 || truth.cols() != 2 || pred.rows() != truth.rows() ||
      static_cast<std::size_t>(pred.rows()) != mask.size()) {
    throw std::invalid_argument("metrics: expected L x 2 pred/truth pair");
  }
  for (int t = 0; t < pred.rows(); ++t) {
    if (!mask[static_cast<std::size_t>(t)]) continue;
    valence_.add(pred(t, 0), truth(t, 0));
    arousal_.add(pred(t, 1), truth(t, 1));
  }
}

MetricReport PooledEval::report() const {
  if (valence_.n == 0) throw std::runtime_error("metrics: no valid frames");
  MetricReport r;
  auto fill = [](const PooledMoments& m, TargetMetrics& t) {
    t.rmse = std::sqrt(m.serr / static_cast<double>(m.n));
    const CccValue c = m.ccc();
    t.ccc = c.value;
    t.ccc_degenerate = c.degenerate;
    t.valid_frames = m.n;
  };
  fill(valence_, r.valence);
  fill(arousal_, r.arousal);
  r.rmse_combined = 0.5 * (r.valence.rmse + r.arousal.rmse);
  r.ccc_combined = 0.5 * (r.valence.ccc + r.arousal.ccc);
  r.fold_rmse = {r.rmse_combined};
  r.fold_ccc = {r.ccc_combined};
  r.rmse_mean = r.rmse_combined;
  r.ccc_mean = r.ccc_combined;
  return r;
}

MetricReport aggregate(std::span<const MetricReport> folds) {
  if (folds.empty()) throw std::invalid_argument("aggregate: no folds");
  MetricReport out;
  // per-target values are pooled-by-average across folds for reporting
  double vr = 0, va = 0, cr = 0, ca = 0;
  long long frames_v = 0, frames_a = 0;
  for (const auto& f : folds) {
    out.fold_rmse.push_back(f.rmse_combined);
    out.fold_ccc.push_back(f.ccc_combined);
    vr += f.valence.rmse;
    va += f.arousal.rmse;
    cr += f.valence.ccc;
    ca += f.arousal.ccc;
    frames_v += f.valence.valid_frames;
    frames_a += f.arousal.valid_frames;
  }
  const double k = static_cast<double>(folds.size());
  out.valence.rmse = vr / k;
  out.arousal.rmse = va / k;
  out.valence.ccc = cr / k;
  out.arousal.ccc = ca / k;
  out.valence.valid_frames = frames_v;
  out.arousal.valid_frames = frames_a;
  out.rmse_combined = 0.5 * (out.valence.rmse + out.arousal.rmse);
  out.ccc_combined = 0.5 * (out.valence.ccc + out.arousal.ccc);

  auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    double s = 0;
    for (double x : v) s += x;
    mean = s / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size()));
  };
  mean_std(out.fold_rmse, out.rmse_mean, out.rmse_std);
  mean_std(out.fold_ccc, out.ccc_mean, out.ccc_std);
  return out;
}

}  // namespace affect::metrics
