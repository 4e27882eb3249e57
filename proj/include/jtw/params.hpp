#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "jtw/tensor.hpp"

namespace jtw {

// Ordered collection of named parameter tensors. Order is significant: it is
// the serialization order and the index used by ParamId-style enums.
class ParamSet {
public:
    struct Entry {
        std::string name;
        Tensor value;
        friend bool operator==(const Entry&, const Entry&) = default;
    };

    Tensor& add(std::string name, Tensor value);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t parameter_count() const noexcept;

    Tensor& operator[](std::size_t i) { return entries_[i].value; }
    const Tensor& operator[](std::size_t i) const { return entries_[i].value; }
    Tensor& operator[](std::string_view name);
    const Tensor& operator[](std::string_view name) const;
    const std::string& name(std::size_t i) const { return entries_[i].name; }
    bool contains(std::string_view name) const noexcept;

    auto begin() noexcept { return entries_.begin(); }
    auto end() noexcept { return entries_.end(); }
    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

    // Same names and shapes, all zeros.
    ParamSet zeros_like() const;
    void zero();
    // this += scale * other (shapes must match).
    void add_scaled(const ParamSet& other, double scale);
    bool all_finite() const noexcept;

    friend bool operator==(const ParamSet&, const ParamSet&) = default;

private:
    std::vector<Entry> entries_;
};

}  // namespace jtw
