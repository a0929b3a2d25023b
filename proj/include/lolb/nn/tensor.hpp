#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lolb/error.hpp"

namespace lolb::nn {

/// Dense row-major array. Feature maps are rank 3 (H, W, C with C fastest);
/// convolution weights are rank 4 (Cout, K, K, Cin); biases rank 1.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;
    explicit Tensor(std::vector<int> dims, T fill = T(0)) : dims_(std::move(dims)) {
        for (int d : dims_) {
            if (d < 0) throw ShapeError("negative tensor dimension");
        }
        data_.assign(element_count(dims_), fill);
    }
    Tensor(int h, int w, int c, T fill = T(0)) : Tensor(std::vector<int>{h, w, c}, fill) {}

    static std::size_t element_count(const std::vector<int>& dims) {
        return std::accumulate(dims.begin(), dims.end(), std::size_t(1),
                               [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
    }

    int rank() const noexcept { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const noexcept { return dims_; }
    int dim(int i) const { return dims_.at(static_cast<std::size_t>(i)); }
    int h() const { return dims_[0]; }
    int w() const { return dims_[1]; }
    int c() const { return dims_[2]; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& at(int y, int x, int ch) { return data_[(std::size_t(y) * std::size_t(dims_[1]) + std::size_t(x)) * std::size_t(dims_[2]) + std::size_t(ch)]; }
    T at(int y, int x, int ch) const { return data_[(std::size_t(y) * std::size_t(dims_[1]) + std::size_t(x)) * std::size_t(dims_[2]) + std::size_t(ch)]; }
    T* pixel(int y, int x) { return data_.data() + (std::size_t(y) * std::size_t(dims_[1]) + std::size_t(x)) * std::size_t(dims_[2]); }
    const T* pixel(int y, int x) const { return data_.data() + (std::size_t(y) * std::size_t(dims_[1]) + std::size_t(x)) * std::size_t(dims_[2]); }

    T& operator[](std::size_t i) { return data_[i]; }
    T operator[](std::size_t i) const { return data_[i]; }
    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    T* raw() noexcept { return data_.data(); }
    const T* raw() const noexcept { return data_.data(); }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
    bool same_shape(const Tensor& o) const noexcept { return dims_ == o.dims_; }

    std::string shape_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < dims_.size(); ++i) s += (i ? "," : "") + std::to_string(dims_[i]);
        return s + ")";
    }

    void require_rank(int r, const char* what) const {
        if (rank() != r) throw ShapeError(std::string(what) + ": expected rank " + std::to_string(r) + ", got " + shape_string());
    }

    Tensor& operator+=(const Tensor& o) {
        if (!same_shape(o)) throw ShapeError("tensor += shape mismatch " + shape_string() + " vs " + o.shape_string());
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<int> dims_;
    std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
    Tensor<To> out(t.dims());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<To>(t[i]);
    return out;
}

inline void require_same_shape(const auto& a, const auto& b, const char* what) {
    if (a.dims() != b.dims()) throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

}  // namespace lolb::nn
