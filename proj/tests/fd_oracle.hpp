#pragma once

// Finite-difference oracle for mixed kernel partials, built only from the plain
// kernel formulas below (no library code).

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace testing_oracle {

using Kernel = std::function<double(const Eigen::VectorXd &, const Eigen::VectorXd &)>;
using Index = std::vector<int>;

inline Kernel plain_gaussian(double sigma) {
    return [sigma](const Eigen::VectorXd &x, const Eigen::VectorXd &y) {
        return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
    };
}

inline Kernel plain_polynomial(int degree, double offset) {
    return [=](const Eigen::VectorXd &x, const Eigen::VectorXd &y) { return std::pow(x.dot(y) + offset, degree); };
}

// Nested central differences, one unit derivative at a time.
inline double nested_central(const Kernel &k, Index rx, Index ry, Eigen::VectorXd x, Eigen::VectorXd y, double h) {
    for (std::size_t j = 0; j < rx.size(); ++j) {
        if (rx[j] > 0) {
            --rx[j];
            Eigen::VectorXd xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            return (nested_central(k, rx, ry, xp, y, h) - nested_central(k, rx, ry, xm, y, h)) / (2.0 * h);
        }
    }
    for (std::size_t j = 0; j < ry.size(); ++j) {
        if (ry[j] > 0) {
            --ry[j];
            Eigen::VectorXd yp = y, ym = y;
            yp[j] += h;
            ym[j] -= h;
            return (nested_central(k, rx, ry, x, yp, h) - nested_central(k, rx, ry, x, ym, h)) / (2.0 * h);
        }
    }
    return k(x, y);
}

inline int order_of(const Index &r) {
    int o = 0;
    for (int v : r) o += v;
    return o;
}

// Two Richardson levels on top of the O(h^2) scheme. The step grows with the
// total order so round-off (eps / h^order) stays below the truncation error.
inline double fd_mixed(const Kernel &k, const Index &rx, const Index &ry, const Eigen::VectorXd &x,
                       const Eigen::VectorXd &y, double length_scale) {
    const int order = order_of(rx) + order_of(ry);
    const double h = length_scale * (order <= 2 ? 4e-3 : 4e-2);
    auto r1 = [&](double s) { return (4.0 * nested_central(k, rx, ry, x, y, s / 2) - nested_central(k, rx, ry, x, y, s)) / 3.0; };
    return (16.0 * r1(h / 2) - r1(h)) / 15.0;
}

}  // namespace testing_oracle
