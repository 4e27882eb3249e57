#include "jtw/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "jtw/errors.hpp"

namespace jtw {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (data_.size() != shape_size(shape_)) {
        throw ConfigError("tensor value count " + std::to_string(data_.size()) +
                          " does not match shape " + shape_string(shape_));
    }
}

Tensor Tensor::scalar(double v) { return Tensor({}, std::vector<double>{v}); }

Tensor Tensor::from(std::span<const double> values) {
    return Tensor({values.size()}, std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::from(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
    return Tensor({rows, cols}, std::vector<double>(values));
}

std::size_t Tensor::rows() const {
    if (shape_.size() != 2) throw UsageError("rows() on tensor of shape " + shape_string(shape_));
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (shape_.size() != 2) throw UsageError("cols() on tensor of shape " + shape_string(shape_));
    return shape_[1];
}

std::span<double> Tensor::row(std::size_t r) {
    const std::size_t c = cols();
    return std::span<double>(data_).subspan(r * c, c);
}

std::span<const double> Tensor::row(std::size_t r) const {
    const std::size_t c = cols();
    return std::span<const double>(data_).subspan(r * c, c);
}

double Tensor::item() const {
    if (data_.size() != 1) throw UsageError("item() on tensor of shape " + shape_string(shape_));
    return data_[0];
}

void Tensor::reset(const std::vector<std::size_t>& shape) {
    shape_ = shape;
    data_.assign(shape_size(shape_), 0.0);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace jtw
