#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace jtw {

// Dense row-major array of doubles. Rank 0 (scalar), 1 (vector) and 2
// (matrix) are the only ranks the model needs.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor scalar(double v);
    static Tensor from(std::span<const double> values);
    static Tensor from(std::initializer_list<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t rows() const;
    std::size_t cols() const;
    bool is_scalar() const noexcept { return data_.size() == 1 && shape_.size() <= 1; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    std::span<double> row(std::size_t r);
    std::span<const double> row(std::size_t r) const;

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
    double item() const;

    // Resize to `shape` and fill with zeros, reusing the allocation.
    void reset(const std::vector<std::size_t>& shape);
    void fill(double v);
    void zero() { fill(0.0); }
    bool all_finite() const noexcept;
    bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::size_t shape_size(const std::vector<std::size_t>& shape);
std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace jtw
