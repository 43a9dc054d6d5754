#include "slz/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace slz {

namespace {

std::size_t checked_volume(const std::vector<std::size_t>& shape) {
    if (shape.empty()) {
        throw std::invalid_argument("tensor shape must have at least one axis");
    }
    for (std::size_t d : shape) {
        if (d == 0) {
            throw std::invalid_argument("tensor shape " + shape_string(shape) +
                                        " has a zero-length axis");
        }
    }
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
}

}  // namespace

std::string shape_string(std::span<const std::size_t> shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

template <typename T>
Tensor<T>::Tensor(std::vector<std::size_t> shape, T fill)
    : shape_(std::move(shape)), data_(checked_volume(shape_), fill) {}

template <typename T>
Tensor<T>::Tensor(std::vector<std::size_t> shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_volume(shape_) != data_.size()) {
        throw std::invalid_argument("tensor shape " + shape_string(shape_) + " needs " +
                                    std::to_string(checked_volume(shape_)) +
                                    " values, got " + std::to_string(data_.size()));
    }
}

template <typename T>
void Tensor<T>::fill(T value) {
    std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
bool Tensor<T>::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
void require_chw(const Tensor<T>& t, const char* what) {
    if (t.rank() != 3) {
        throw std::invalid_argument(std::string(what) + ": expected [C,H,W] tensor, got " +
                                    shape_string(t.shape()));
    }
}

template class Tensor<float>;
template class Tensor<double>;
template void require_chw(const Tensor<float>&, const char*);
template void require_chw(const Tensor<double>&, const char*);

}  // namespace slz
