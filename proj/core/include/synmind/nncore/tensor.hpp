#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "synmind/common/errors.hpp"

namespace synmind::nn {

/// Dense row-major tensor. Rank is dynamic (0..3 used in practice).
/// Scalar type is float for training throughput or double for verification.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count(shape_), T(0)) {}

  Tensor(std::vector<std::size_t> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_)) {
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_string(shape_));
    }
  }

  static Tensor scalar(T v) { return Tensor({std::size_t{1}}, {v}); }

  static Tensor full(std::vector<std::size_t> shape, T v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  const T& at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  T& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const T& at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  Tensor reshaped(std::vector<std::size_t> new_shape) const {
    if (count(new_shape) != data_.size()) {
      throw DimensionError("cannot reshape " + shape_string(shape_) + " to " +
                           shape_string(new_shape));
    }
    return Tensor(std::move(new_shape), data_);
  }

  bool all_finite() const {
    for (const T& v : data_) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return Tensor<U>(shape_, std::move(out));
  }

  static std::size_t count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
  }

  static std::string shape_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) os << "x";
      os << shape[i];
    }
    os << ")";
    return os.str();
  }

  std::string shape_string() const { return shape_string(shape_); }

 private:
  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

}  // namespace synmind::nn
