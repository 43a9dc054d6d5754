#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace slz {

/// Dense row-major n-dimensional array. Shape entries are positive and
/// their product always equals the number of stored values.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, T fill = T{0});
    Tensor(std::vector<std::size_t> shape, std::vector<T> data);

    static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }
    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    // [C,H,W] accessors; no bounds checks.
    T& at(std::size_t c, std::size_t y, std::size_t x) {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }
    const T& at(std::size_t c, std::size_t y, std::size_t x) const {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }

    /// Pointer to the start of channel `c` of a [C,H,W] tensor.
    T* channel(std::size_t c) { return data_.data() + c * shape_[1] * shape_[2]; }
    const T* channel(std::size_t c) const { return data_.data() + c * shape_[1] * shape_[2]; }

    void fill(T value);
    bool all_finite() const;

    template <typename U>
    Tensor<U> cast() const {
        return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
    }

    bool operator==(const Tensor&) const = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<T> data_;
};

std::string shape_string(std::span<const std::size_t> shape);

/// Throws std::invalid_argument unless `t` has rank 3.
template <typename T>
void require_chw(const Tensor<T>& t, const char* what);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace slz
