#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "spc/errors.hpp"

namespace spc {

/// Dense rank-4 tensor with equal side M, row-major (last index fastest).
template <class T>
class Tensor4 {
public:
    Tensor4() = default;
    explicit Tensor4(std::size_t side) : side_(side), data_(side * side * side * side, T{}) {}

    [[nodiscard]] std::size_t side() const { return side_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    T& operator()(std::size_t a, std::size_t b, std::size_t c, std::size_t d)
    {
        return data_[((a * side_ + b) * side_ + c) * side_ + d];
    }
    const T& operator()(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const
    {
        return data_[((a * side_ + b) * side_ + c) * side_ + d];
    }

    [[nodiscard]] const std::vector<T>& data() const { return data_; }
    [[nodiscard]] std::vector<T>& data() { return data_; }

    [[nodiscard]] double norm() const
    {
        double acc = 0.0;
        for (const auto& v : data_) acc += std::norm(v);
        return std::sqrt(acc);
    }

    [[nodiscard]] double max_abs() const
    {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, static_cast<double>(std::abs(v)));
        return m;
    }

    friend bool operator==(const Tensor4&, const Tensor4&) = default;

private:
    std::size_t side_ = 0;
    std::vector<T> data_;
};

using RealTensor4 = Tensor4<double>;
using ComplexTensor4 = Tensor4<std::complex<double>>;

/// max |a - b| over entries; sides must agree.
template <class A, class B>
double max_abs_diff(const Tensor4<A>& a, const Tensor4<B>& b)
{
    if (a.side() != b.side()) throw DimensionError("max_abs_diff: side mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, static_cast<double>(std::abs(a.data()[i] - b.data()[i])));
    return m;
}

} // namespace spc
