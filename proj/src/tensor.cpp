#include "affect/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace affect::num {

Tensor::Tensor(int rows, int cols, double fill)
    : rows_(rows),
      cols_(cols),
      values_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
              fill) {
  if (rows < 0 || cols < 0) {
    throw std::invalid_argument("tensor: negative dimension");
  }
}

std::vector<double>& Tensor::grad() {
  if (grad_.empty()) {
    grad_.assign(values_.size(), 0.0);
  }
  return grad_;
}

const std::vector<double>& Tensor::grad() const {
  if (grad_.empty()) {
    throw std::logic_error("tensor: gradient read before allocation");
  }
  return grad_;
}

void Tensor::zero_grad() { grad_.assign(values_.size(), 0.0); }

void Tensor::fill(double v) { values_.assign(values_.size(), v); }

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void check_finite(std::span<const double> v, std::string_view what) {
  if (!all_finite(v)) {
    throw std::runtime_error("non-finite value in " + std::string(what));
  }
}

void check_finite(const Tensor& t, std::string_view what) {
  check_finite(std::span<const double>(t.values()), what);
}

}  // namespace affect::num
