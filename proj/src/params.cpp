#include "jtw/params.hpp"

#include <algorithm>

#include "jtw/errors.hpp"

namespace jtw {

Tensor& ParamSet::add(std::string name, Tensor value) {
    if (contains(name)) throw ConfigError("duplicate parameter name: " + name);
    entries_.push_back({std::move(name), std::move(value)});
    return entries_.back().value;
}

std::size_t ParamSet::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
}

Tensor& ParamSet::operator[](std::string_view name) {
    for (auto& e : entries_)
        if (e.name == name) return e.value;
    throw ConfigError("unknown parameter: " + std::string(name));
}

const Tensor& ParamSet::operator[](std::string_view name) const {
    for (const auto& e : entries_)
        if (e.name == name) return e.value;
    throw ConfigError("unknown parameter: " + std::string(name));
}

bool ParamSet::contains(std::string_view name) const noexcept {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Entry& e) { return e.name == name; });
}

ParamSet ParamSet::zeros_like() const {
    ParamSet out;
    for (const auto& e : entries_) out.add(e.name, Tensor(e.value.shape()));
    return out;
}

void ParamSet::zero() {
    for (auto& e : entries_) e.value.zero();
}

void ParamSet::add_scaled(const ParamSet& other, double scale) {
    if (other.size() != size()) throw ConfigError("parameter set size mismatch");
    for (std::size_t i = 0; i < size(); ++i) {
        auto& dst = entries_[i].value;
        const auto& src = other.entries_[i].value;
        if (!dst.same_shape(src)) {
            throw ConfigError("shape mismatch for parameter " + entries_[i].name);
        }
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
    }
}

bool ParamSet::all_finite() const noexcept {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](const Entry& e) { return e.value.all_finite(); });
}

}  // namespace jtw
