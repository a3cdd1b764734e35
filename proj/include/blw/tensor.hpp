#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "blw/error.hpp"

namespace blw {

/// Batch x channels x length.
struct Shape {
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t length = 0;

    std::size_t size() const { return batch * channels * length; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Rank-3 tensor with contiguous row-major storage (length fastest) and an
/// optional gradient buffer of identical shape.
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;

    explicit BasicTensor(Shape shape, T fill = T(0)) : shape_(shape), data_(shape.size(), fill) {}

    BasicTensor(Shape shape, std::vector<T> values) : shape_(shape), data_(std::move(values)) {
        if (data_.size() != shape_.size()) {
            throw ShapeError("tensor of shape " + to_string(shape_) + " given " +
                             std::to_string(data_.size()) + " values");
        }
    }

    const Shape& shape() const { return shape_; }
    std::size_t batch() const { return shape_.batch; }
    std::size_t channels() const { return shape_.channels; }
    std::size_t length() const { return shape_.length; }
    std::size_t size() const { return data_.size(); }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }
    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T& operator()(std::size_t b, std::size_t c, std::size_t i) { return data_[index(b, c, i)]; }
    const T& operator()(std::size_t b, std::size_t c, std::size_t i) const {
        return data_[index(b, c, i)];
    }

    std::span<T> row(std::size_t b, std::size_t c) {
        return {data_.data() + index(b, c, 0), shape_.length};
    }
    std::span<const T> row(std::size_t b, std::size_t c) const {
        return {data_.data() + index(b, c, 0), shape_.length};
    }

    bool has_grad() const { return !grad_.empty(); }
    void enable_grad() { grad_.assign(data_.size(), T(0)); }
    void drop_grad() { grad_.clear(); }
    std::span<T> grad() { return grad_; }
    std::span<const T> grad() const { return grad_; }

    bool all_finite() const {
        for (T v : data_) {
            if (!std::isfinite(v)) return false;
        }
        for (T v : grad_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

private:
    std::size_t index(std::size_t b, std::size_t c, std::size_t i) const {
        return (b * shape_.channels + c) * shape_.length + i;
    }

    Shape shape_{};
    std::vector<T> data_;
    std::vector<T> grad_;
};

using Tensor = BasicTensor<double>;
using TensorF = BasicTensor<float>;

inline std::string to_string(const Shape& s) {
    return "(" + std::to_string(s.batch) + ", " + std::to_string(s.channels) + ", " +
           std::to_string(s.length) + ")";
}

}  // namespace blw
