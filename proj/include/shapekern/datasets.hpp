#pragma once

#include <cstdint>

#include "shapekern/covering.hpp"
#include "shapekern/estimator.hpp"

namespace shapekern {

/// N points x ~ U[-2, 2], y = x^2 + xi * eps with standard normal eps.
inline Dataset quadratic_dataset(int N, double xi, std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("need at least one sample");
    if (!(xi >= 0.0)) throw std::invalid_argument("noise level must be non-negative");
    detail::SplitMix64 rng(seed);
    Dataset d;
    d.X.resize(N, 1);
    d.y.resize(N);
    for (int n = 0; n < N; ++n) {
        const double x = -2.0 + 4.0 * rng.uniform();
        d.X(n, 0) = x;
        d.y[n] = x * x + xi * rng.normal();
    }
    return d;
}

/// N points x ~ U[0, 1], y = x + (0.5 + x) eps: the conditional tau-quantile
/// is x + (0.5 + x) z_tau.
inline Dataset heteroscedastic_dataset(int N, std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("need at least one sample");
    detail::SplitMix64 rng(seed);
    Dataset d;
    d.X.resize(N, 1);
    d.y.resize(N);
    for (int n = 0; n < N; ++n) {
        const double x = rng.uniform();
        d.X(n, 0) = x;
        d.y[n] = x + (0.5 + x) * rng.normal();
    }
    return d;
}

}  // namespace shapekern
