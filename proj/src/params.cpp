#include "blw/params.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "blw/error.hpp"

namespace blw {

std::size_t ParameterStore::add(std::string name, std::vector<std::size_t> shape) {
    if (find(name)) throw ConfigError("duplicate parameter name '" + name + "'");
    const std::size_t n =
        std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    Parameter p;
    p.name = std::move(name);
    p.shape = std::move(shape);
    p.values.assign(n, 0.0);
    p.grad.assign(n, 0.0);
    params_.push_back(std::move(p));
    return params_.size() - 1;
}

std::optional<std::size_t> ParameterStore::find(std::string_view name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i].name == name) return i;
    }
    return std::nullopt;
}

std::size_t ParameterStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.size();
    return n;
}

void ParameterStore::zero_grad() {
    for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

}  // namespace blw
