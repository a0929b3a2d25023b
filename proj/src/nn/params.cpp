#include "lolb/nn/params.hpp"

#include <cmath>

#include "lolb/rng.hpp"

namespace lolb::nn {

template <typename T>
Param<T>& ParamStore<T>::add(const std::string& name, std::vector<int> dims, Init init, int fan_in, int fac_d) {
    if (index_.count(name)) throw ConfigError("duplicate parameter name " + name);
    Param<T> p;
    p.name = name;
    p.value = Tensor<T>(dims);
    p.grad = Tensor<T>(dims);
    p.m = Tensor<T>(dims);
    p.v = Tensor<T>(dims);
    p.init = init;
    p.fan_in = fan_in;
    p.fac_d = fac_d;
    index_[name] = params_.size();
    params_.push_back(std::move(p));
    return params_.back();
}

template <typename T>
void ParamStore<T>::initialize(std::uint64_t seed) {
    for (Param<T>& p : params_) {
        Rng rng(derive_seed(seed, p.name));
        p.m.fill(T(0));
        p.v.fill(T(0));
        p.grad.fill(T(0));
        switch (p.init) {
            case Init::HeUniform:
            case Init::LecunUniform: {
                const double b = std::sqrt((p.init == Init::HeUniform ? 6.0 : 3.0) / std::max(1, p.fan_in));
                for (auto& v : p.value.data()) v = static_cast<T>(uniform(rng, -b, b));
                break;
            }
            case Init::Zero:
                p.value.fill(T(0));
                break;
            case Init::FacIdentity: {
                p.value.fill(T(0));
                const int kk = p.fac_d * p.fac_d;
                for (std::size_t i = std::size_t(kk / 2); i < p.value.size(); i += std::size_t(kk)) p.value[i] = T(1);
                break;
            }
        }
    }
    step = 0;
}

template <typename T>
void ParamStore<T>::zero_grad() {
    for (Param<T>& p : params_) p.grad.fill(T(0));
}

template <typename T>
std::size_t ParamStore<T>::element_count() const {
    std::size_t n = 0;
    for (const Param<T>& p : params_) n += p.value.size();
    return n;
}

template <typename T>
Param<T>* ParamStore<T>::find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &params_[it->second];
}

template <typename T>
const Param<T>* ParamStore<T>::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &params_[it->second];
}

template <typename To, typename From>
void copy_params(ParamStore<To>& dst, const ParamStore<From>& src) {
    if (dst.size() != src.size()) throw ShapeError("parameter stores differ in size");
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Param<From>& s = src[i];
        Param<To>& d = dst[i];
        if (s.name != d.name || s.value.dims() != d.value.dims()) throw ShapeError("parameter layout mismatch at " + s.name);
        d.value = tensor_cast<To>(s.value);
        d.m = tensor_cast<To>(s.m);
        d.v = tensor_cast<To>(s.v);
    }
    dst.step = src.step;
}

template class ParamStore<float>;
template class ParamStore<double>;
template void copy_params(ParamStore<float>&, const ParamStore<float>&);
template void copy_params(ParamStore<double>&, const ParamStore<float>&);
template void copy_params(ParamStore<float>&, const ParamStore<double>&);
template void copy_params(ParamStore<double>&, const ParamStore<double>&);

}  // namespace lolb::nn
