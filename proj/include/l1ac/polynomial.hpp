#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "l1ac/statespace.hpp"

namespace l1ac {

/// Real polynomial, coefficients in ascending powers: c[0] + c[1] s + ...
class Polynomial {
public:
    Polynomial() : coeffs_{0.0} {}
    explicit Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) {
        if (coeffs_.empty()) {
            coeffs_.push_back(0.0);
        }
    }

    [[nodiscard]] const std::vector<double>& coeffs() const { return coeffs_; }
    [[nodiscard]] int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    [[nodiscard]] double leading() const { return coeffs_.back(); }
    [[nodiscard]] bool is_zero() const { return degree() == 0 && coeffs_[0] == 0.0; }

    [[nodiscard]] std::complex<double> operator()(std::complex<double> s) const {
        std::complex<double> acc{0.0, 0.0};
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc = acc * s + *it;
        }
        return acc;
    }

    /// Drops leading coefficients with magnitude <= tol.
    [[nodiscard]] Polynomial trimmed(double tol) const {
        std::vector<double> c = coeffs_;
        while (c.size() > 1 && std::abs(c.back()) <= tol) {
            c.pop_back();
        }
        if (c.size() == 1 && std::abs(c[0]) <= tol) {
            c[0] = 0.0;
        }
        return Polynomial(std::move(c));
    }

    friend Polynomial operator*(const Polynomial& p, const Polynomial& q) {
        std::vector<double> c(p.coeffs_.size() + q.coeffs_.size() - 1, 0.0);
        for (std::size_t i = 0; i < p.coeffs_.size(); ++i) {
            for (std::size_t j = 0; j < q.coeffs_.size(); ++j) {
                c[i + j] += p.coeffs_[i] * q.coeffs_[j];
            }
        }
        return Polynomial(std::move(c));
    }

    friend Polynomial operator-(const Polynomial& p, const Polynomial& q) {
        std::vector<double> c(std::max(p.coeffs_.size(), q.coeffs_.size()), 0.0);
        for (std::size_t i = 0; i < p.coeffs_.size(); ++i) c[i] += p.coeffs_[i];
        for (std::size_t i = 0; i < q.coeffs_.size(); ++i) c[i] -= q.coeffs_[i];
        return Polynomial(std::move(c));
    }

    friend Polynomial operator*(double k, const Polynomial& p) {
        std::vector<double> c = p.coeffs_;
        for (double& v : c) v *= k;
        return Polynomial(std::move(c));
    }

    /// Complex roots via companion-matrix eigenvalues.
    [[nodiscard]] std::vector<std::complex<double>> roots() const {
        const int deg = degree();
        if (deg < 1) {
            return {};
        }
        Matrix comp = Matrix::Zero(deg, deg);
        for (int i = 0; i < deg; ++i) {
            comp(0, i) = -coeffs_[deg - 1 - i] / leading();
        }
        for (int i = 1; i < deg; ++i) {
            comp(i, i - 1) = 1.0;
        }
        const Eigen::EigenSolver<Matrix> es(comp, false);
        return {es.eigenvalues().begin(), es.eigenvalues().end()};
    }

private:
    std::vector<double> coeffs_;
};

/// det(sI - A) by Faddeev-LeVerrier. Monic, degree n.
inline Polynomial characteristic_polynomial(const Matrix& a) {
    require_square(a, "characteristic_polynomial: A");
    const Eigen::Index n = a.rows();
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    c[n] = 1.0;
    Matrix m = Matrix::Zero(n, n);
    const Matrix ident = Matrix::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        m = a * m + c[n - k + 1] * ident;
        c[n - k] = -(a * m).trace() / static_cast<double>(k);
    }
    return Polynomial(std::move(c));
}

/// Numerator of c (sI - A)^{-1} b over det(sI - A), via
/// det(sI - A + b c) - det(sI - A). Coefficients below a relative 1e-10 of
/// the largest are treated as exact zeros.
inline Polynomial siso_numerator(const Matrix& a, const Matrix& b, const Matrix& c) {
    if (b.cols() != 1 || c.rows() != 1) {
        throw NumericError("siso_numerator: needs a single input and a single output");
    }
    const Polynomial den = characteristic_polynomial(a);
    const Polynomial shifted = characteristic_polynomial(a - b * c);
    const Polynomial num = shifted - den;
    double scale = 0.0;
    for (double v : den.coeffs()) scale = std::max(scale, std::abs(v));
    for (double v : shifted.coeffs()) scale = std::max(scale, std::abs(v));
    return num.trimmed(1e-10 * scale);
}

/**
 * @brief Observable canonical realization of a MISO transfer function.
 *
 * Realizes y = sum_j num[j](s) / den(s) u_j. Requires deg num[j] <= deg den.
 */
inline StateSpaceModel realize_miso(const std::vector<Polynomial>& num, const Polynomial& den) {
    const int k = den.degree();
    if (k < 1) {
        throw NumericError("realize_miso: denominator must have degree >= 1");
    }
    const auto inputs = static_cast<Eigen::Index>(num.size());
    std::vector<double> a(den.coeffs());
    const double lead = den.leading();
    for (double& v : a) v /= lead;

    Matrix am = Matrix::Zero(k, k);
    Matrix bm = Matrix::Zero(k, inputs);
    Matrix cm = Matrix::Zero(1, k);
    Matrix dm = Matrix::Zero(1, inputs);
    for (int i = 0; i < k; ++i) {
        am(i, 0) = -a[k - 1 - i];
        if (i + 1 < k) {
            am(i, i + 1) = 1.0;
        }
    }
    if (k > 0) {
        cm(0, 0) = 1.0;
    }
    for (Eigen::Index j = 0; j < inputs; ++j) {
        if (num[j].degree() > k) {
            throw NumericError("realize_miso: improper transfer function");
        }
        std::vector<double> b(static_cast<std::size_t>(k) + 1, 0.0);
        for (int i = 0; i <= num[j].degree(); ++i) {
            b[i] = num[j].coeffs()[i] / lead;
        }
        const double d = b[k];
        dm(0, j) = d;
        for (int i = 0; i < k; ++i) {
            bm(i, j) = b[k - 1 - i] - d * a[k - 1 - i];
        }
    }
    return {std::move(am), std::move(bm), std::move(cm), std::move(dm)};
}

}  // namespace l1ac
