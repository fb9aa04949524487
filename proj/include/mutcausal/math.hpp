#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numbers>
#include <vector>

#include <Eigen/Core>

namespace mutcausal {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

template <std::floating_point Scalar>
Scalar inv_logit(Scalar x) {
    using std::exp;
    if (x >= Scalar(0)) {
        return Scalar(1) / (Scalar(1) + exp(-x));
    }
    const Scalar e = exp(x);
    return e / (Scalar(1) + e);
}

template <std::floating_point Scalar>
Scalar logit(Scalar p) {
    using std::log;
    return log(p / (Scalar(1) - p));
}

// log(1 + exp(x)) without overflow for large |x|.
template <std::floating_point Scalar>
Scalar log1p_exp(Scalar x) {
    using std::exp;
    using std::log1p;
    return std::max(x, Scalar(0)) + log1p(exp(-std::abs(x)));
}

template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1>
inv_logit(const Eigen::ArrayBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    return (Scalar(1) + (-x).exp()).inverse();
}

template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1>
log1p_exp(const Eigen::ArrayBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    return x.max(Scalar(0)) + (-x.abs()).exp().log1p();
}

// Linear-interpolation quantile between order statistics (R type 7).
// `sorted` must be ascending and non-empty.
template <typename Derived>
typename Derived::Scalar quantile_sorted(const Eigen::DenseBase<Derived>& sorted, double prob) {
    const auto n = sorted.size();
    if (n == 1) return sorted(0);
    const double h = prob * static_cast<double>(n - 1);
    const auto lo = static_cast<Eigen::Index>(std::floor(h));
    const auto hi = std::min<Eigen::Index>(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted(lo) + frac * (sorted(hi) - sorted(lo));
}

template <typename Derived>
typename Derived::Scalar quantile(const Eigen::DenseBase<Derived>& values, double prob) {
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> sorted = values;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    return quantile_sorted(sorted, prob);
}

// Sample variance with the n-1 denominator; zero for fewer than two values.
template <typename Derived>
typename Derived::Scalar sample_variance(const Eigen::DenseBase<Derived>& values) {
    const auto n = values.size();
    if (n < 2) return 0;
    const auto mean = values.mean();
    return (values.derived().array() - mean).square().sum() / static_cast<double>(n - 1);
}

} // namespace mutcausal
