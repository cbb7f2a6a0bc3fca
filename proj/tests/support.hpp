#pragma once

#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "l1ac/l1ac.hpp"

namespace l1ac::testing {

/// Random Hurwitz matrix of order n with spectral abscissa <= -margin.
inline Matrix random_stable(std::mt19937_64& rng, Eigen::Index n, double scale = 3.0,
                            double margin = 0.2) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = dist(rng);
    }
    const double abscissa = Eigen::EigenSolver<Matrix>(a).eigenvalues().real().maxCoeff();
    return a - (abscissa + margin) * Matrix::Identity(n, n);
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    }
    return m;
}

/// Exponential from Eigen's unsupported MatrixFunctions module (independent of mat_exp).
inline Matrix eigen_exp(const Matrix& a, double t) { return (a * t).exp(); }

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

/// Third-order plant with H1(s) = (s - 1) / ((s + 2)(s + 3)(s + 4)).
inline UncertainPlant nmp_plant(UncertaintySpec unc = {}) {
    Matrix a(3, 3);
    a << 0, 1, 0, 0, 0, 1, -24, -26, -9;
    Matrix b(3, 1);
    b << 0, 0, 1;
    Matrix c(1, 3);
    c << -1, 1, 0;
    return make_plant(a, b, c, std::nullopt, std::move(unc));
}

/// Final-window mean of a scalar series.
inline double tail_mean(const std::vector<double>& v, double fraction = 0.1) {
    const auto len = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(v.size())));
    double s = 0.0;
    for (std::size_t i = v.size() - len; i < v.size(); ++i) s += v[i];
    return s / static_cast<double>(len);
}

}  // namespace l1ac::testing
