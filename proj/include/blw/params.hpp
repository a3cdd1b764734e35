#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blw {

struct Parameter {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> values;
    std::vector<double> grad;

    std::size_t size() const { return values.size(); }
};

/// Flat, ordered, named parameter storage. Insertion order is the
/// serialization order.
class ParameterStore {
public:
    /// Adds a zero-initialized parameter and returns its index.
    std::size_t add(std::string name, std::vector<std::size_t> shape);

    Parameter& operator[](std::size_t i) { return params_[i]; }
    const Parameter& operator[](std::size_t i) const { return params_[i]; }

    std::optional<std::size_t> find(std::string_view name) const;

    std::size_t size() const { return params_.size(); }
    std::size_t scalar_count() const;
    void zero_grad();

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::vector<Parameter> params_;
};

}  // namespace blw
