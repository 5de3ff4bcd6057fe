#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affect::num {

// Dense row-major matrix of doubles with a lazily allocated gradient
// buffer of the same shape. Shape is fixed at construction.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols, double fill = 0.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int r, int c) { return values_[idx(r, c)]; }
  double operator()(int r, int c) const { return values_[idx(r, c)]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool has_grad() const { return !grad_.empty(); }
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void zero_grad();

  void fill(double v);

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
  std::vector<double> grad_;
};

// Named view of a trainable tensor, consumed by the optimizer and the
// gradient checker.
struct Param {
  std::string name;
  Tensor* tensor = nullptr;
};

bool all_finite(std::span<const double> v);

// Throws std::runtime_error naming `what` if any value is NaN/Inf.
void check_finite(std::span<const double> v, std::string_view what);
void check_finite(const Tensor& t, std::string_view what);

}  // namespace affect::num
