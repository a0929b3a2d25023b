#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "lolb/nn/tensor.hpp"

namespace lolb::nn {

enum class Init {
    HeUniform,    // U(-b, b), b = sqrt(6 / fan_in)
    LecunUniform, // U(-b, b), b = sqrt(3 / fan_in)
    Zero,
    FacIdentity,  // bias of a filter head: centre tap of every d*d block set to 1
};

/// Learnable tensor with its gradient accumulator and Adam moments.
template <typename T>
struct Param {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    Tensor<T> m;
    Tensor<T> v;
    Init init = Init::Zero;
    int fan_in = 1;
    int fac_d = 0;  // used by Init::FacIdentity
};

/// Named parameters in registration order. References returned by add() stay
/// valid for the lifetime of the store.
template <typename T>
class ParamStore {
public:
    Param<T>& add(const std::string& name, std::vector<int> dims, Init init, int fan_in = 1, int fac_d = 0);

    /// Fills every parameter from its own stream derived from (seed, name).
    void initialize(std::uint64_t seed);
    void zero_grad();

    std::size_t size() const noexcept { return params_.size(); }
    std::size_t element_count() const;
    Param<T>& operator[](std::size_t i) { return params_[i]; }
    const Param<T>& operator[](std::size_t i) const { return params_[i]; }
    Param<T>* find(const std::string& name);
    const Param<T>* find(const std::string& name) const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    std::int64_t step = 0;  // Adam step counter

private:
    std::deque<Param<T>> params_;
    std::map<std::string, std::size_t> index_;
};

/// Copies values, moments and step from one store to another with the same layout.
template <typename To, typename From>
void copy_params(ParamStore<To>& dst, const ParamStore<From>& src);

}  // namespace lolb::nn
