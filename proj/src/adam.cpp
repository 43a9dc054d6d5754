#include "slz/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace slz {

template <typename T>
AdamState<T> AdamState<T>::fresh(std::span<const Tensor<T>> params, AdamHyper hyper) {
    AdamState s;
    s.hyper = hyper;
    for (const auto& p : params) {
        s.first_moment.push_back(Tensor<T>::zeros_like(p));
        s.second_moment.push_back(Tensor<T>::zeros_like(p));
    }
    return s;
}

template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const Tensor<T>> grads,
               AdamState<T>& state) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size()) {
        throw std::invalid_argument("adam_step: parameter, gradient and moment counts differ");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].shape() != grads[i].shape() ||
            params[i].shape() != state.first_moment[i].shape() ||
            params[i].shape() != state.second_moment[i].shape()) {
            throw std::invalid_argument("adam_step: shape mismatch at parameter " +
                                        std::to_string(i) + ": " +
                                        shape_string(params[i].shape()) + " vs gradient " +
                                        shape_string(grads[i].shape()));
        }
    }

    const AdamHyper& h = state.hyper;
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double correction1 = 1.0 - std::pow(h.beta1, t);
    const double correction2 = 1.0 - std::pow(h.beta2, t);
    const T b1 = static_cast<T>(h.beta1);
    const T b2 = static_cast<T>(h.beta2);

    for (std::size_t i = 0; i < params.size(); ++i) {
        T* p = params[i].data();
        const T* g = grads[i].data();
        T* m = state.first_moment[i].data();
        T* v = state.second_moment[i].data();
        for (std::size_t j = 0; j < params[i].size(); ++j) {
            m[j] = b1 * m[j] + (T{1} - b1) * g[j];
            v[j] = b2 * v[j] + (T{1} - b2) * g[j] * g[j];
            const double m_hat = static_cast<double>(m[j]) / correction1;
            const double v_hat = static_cast<double>(v[j]) / correction2;
            p[j] -= static_cast<T>(h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon));
        }
    }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(std::span<Tensor<float>>, std::span<const Tensor<float>>,
                        AdamState<float>&);
template void adam_step(std::span<Tensor<double>>, std::span<const Tensor<double>>,
                        AdamState<double>&);

}  // namespace slz
