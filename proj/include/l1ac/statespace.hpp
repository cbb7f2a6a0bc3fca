#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "l1ac/error.hpp"

namespace l1ac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline void require_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite()) {
        throw NumericError(what + " has non-finite entries");
    }
}

inline void require_square(const Matrix& m, const std::string& what) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw NumericError(what + " must be square and non-empty, got " + std::to_string(m.rows()) +
                           "x" + std::to_string(m.cols()));
    }
}

/// Eigenvalues with strictly negative real part.
inline bool is_hurwitz(const Matrix& a) {
    require_square(a, "is_hurwitz: A");
    const Eigen::EigenSolver<Matrix> es(a, false);
    const auto& ev = es.eigenvalues();
    return std::all_of(ev.begin(), ev.end(), [](const auto& l) { return l.real() < 0.0; });
}

/**
 * @brief Matrix exponential e^{A t}.
 *
 * Scaling and squaring on a (13,13) Padé kernel. Returns the identity
 * exactly for t == 0.
 */
inline Matrix mat_exp(const Matrix& a, double t) {
    require_square(a, "mat_exp: A");
    require_finite(a, "mat_exp: A");
    if (!std::isfinite(t)) {
        throw NumericError("mat_exp: t is not finite");
    }
    const Eigen::Index n = a.rows();
    const Matrix ident = Matrix::Identity(n, n);
    if (t == 0.0) {
        return ident;
    }

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    Matrix at = a * t;
    const double norm1 = at.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
        at /= std::ldexp(1.0, squarings);
    }

    const Matrix a2 = at * at;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;

    Matrix u = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    u += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident;
    u = at * u;

    Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
    v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;

    Matrix e = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) {
        e = e * e;
    }
    require_finite(e, "mat_exp: result");
    return e;
}

/// Integral of e^{A tau} over [0, T], read off the augmented exponential
/// exp([[A, I], [0, 0]] T). Valid for singular A.
inline Matrix phi(const Matrix& a, double period) {
    require_square(a, "phi: A");
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw NumericError("phi: period must be positive and finite");
    }
    const Eigen::Index n = a.rows();
    Matrix aug = Matrix::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = a;
    aug.topRightCorner(n, n).setIdentity();
    Matrix result = mat_exp(aug, period).topRightCorner(n, n);
    require_finite(result, "phi: result (A*T ill-conditioned)");
    return result;
}

/**
 * @brief Orthonormal basis of the orthogonal complement of span(B1).
 *
 * Columns have unit norm and the first entry with magnitude above 1e-12 in
 * each column is positive, so the output is deterministic.
 */
inline Matrix null_complement(const Matrix& b1) {
    require_finite(b1, "null_complement: B1");
    const Eigen::Index n = b1.rows();
    const Eigen::Index m = b1.cols();
    if (n == 0 || m == 0) {
        throw NumericError("null_complement: B1 is empty");
    }
    if (m >= n) {
        throw NumericError("null_complement: B1 must have fewer columns than rows");
    }
    const Eigen::ColPivHouseholderQR<Matrix> qr(b1);
    if (qr.rank() < m) {
        throw NumericError("null_complement: B1 is rank deficient");
    }
    const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    Matrix b2 = q.rightCols(n - m);
    for (Eigen::Index j = 0; j < b2.cols(); ++j) {
        auto col = b2.col(j);
        col.normalize();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(col(i)) > 1e-12) {
                if (col(i) < 0.0) {
                    col = -col;
                }
                break;
            }
        }
        // Projection residue from the Householder product.
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(col(i)) < 1e-15) {
                col(i) = 0.0;
            }
        }
    }
    return b2;
}

/// Continuous or discrete LTI system (A, B, C, D).
struct StateSpaceModel {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;

    StateSpaceModel() = default;
    StateSpaceModel(Matrix a, Matrix b, Matrix c, Matrix d)
        : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
        validate();
    }

    [[nodiscard]] Eigen::Index order() const { return A.rows(); }
    [[nodiscard]] Eigen::Index inputs() const { return B.cols(); }
    [[nodiscard]] Eigen::Index outputs() const { return C.rows(); }

    void validate() const {
        require_square(A, "StateSpaceModel: A");
        if (B.rows() != A.rows() || C.cols() != A.rows() || D.rows() != C.rows() ||
            D.cols() != B.cols()) {
            throw NumericError("StateSpaceModel: inconsistent dimensions");
        }
        require_finite(A, "StateSpaceModel: A");
        require_finite(B, "StateSpaceModel: B");
        require_finite(C, "StateSpaceModel: C");
        require_finite(D, "StateSpaceModel: D");
    }
};

/// sys1 followed by sys2.
inline StateSpaceModel series(const StateSpaceModel& sys1, const StateSpaceModel& sys2) {
    if (sys2.inputs() != sys1.outputs()) {
        throw NumericError("series: output/input count mismatch");
    }
    const Eigen::Index n1 = sys1.order();
    const Eigen::Index n2 = sys2.order();
    Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
    a.topLeftCorner(n1, n1) = sys1.A;
    a.bottomLeftCorner(n2, n1) = sys2.B * sys1.C;
    a.bottomRightCorner(n2, n2) = sys2.A;
    Matrix b(n1 + n2, sys1.inputs());
    b << sys1.B, sys2.B * sys1.D;
    Matrix c(sys2.outputs(), n1 + n2);
    c << sys2.D * sys1.C, sys2.C;
    return {std::move(a), std::move(b), std::move(c), sys2.D * sys1.D};
}

/// Transfer matrix at s = 0: C (-A)^{-1} B + D.
inline Matrix dc_gain(const StateSpaceModel& sys) {
    sys.validate();
    const Eigen::FullPivLU<Matrix> lu(sys.A);
    if (!lu.isInvertible()) {
        throw NumericError("dc_gain: A is singular (pole at the origin)");
    }
    return sys.D - sys.C * lu.solve(sys.B);
}

/**
 * @brief Feedforward gain K_r = -(c A_M^{-1} B1)^{-1}.
 *
 * Gives unit DC gain from the reference to the model output. Requires as
 * many inputs as outputs; for SISO this is the scalar -1/(c A^{-1} b).
 */
inline Matrix feedforward_gain(const Matrix& a_m, const Matrix& b1, const Matrix& c) {
    const Matrix h0 = dc_gain(StateSpaceModel(a_m, b1, c, Matrix::Zero(c.rows(), b1.cols())));
    if (h0.rows() != h0.cols()) {
        throw NumericError("feedforward_gain: needs as many inputs as outputs");
    }
    const Eigen::FullPivLU<Matrix> lu(h0);
    if (!lu.isInvertible() || h0.cwiseAbs().maxCoeff() < 1e-300) {
        throw NumericError("feedforward_gain: zero DC path from input to output");
    }
    return lu.inverse();
}

/// Zero-order-hold discretization: A_d = e^{A h}, B_d = phi(A, h) B.
inline StateSpaceModel discretize_zoh(const StateSpaceModel& sys, double step) {
    sys.validate();
    if (!(step > 0.0)) {
        throw NumericError("discretize_zoh: step must be positive");
    }
    return {mat_exp(sys.A, step), phi(sys.A, step) * sys.B, sys.C, sys.D};
}

/**
 * @brief Runtime state of a ZOH-discretized filter.
 *
 * `step(u)` holds u over one sample, advances the state and returns the
 * output at the end of the sample, y = C x_{k+1} + D u_k.
 */
class DiscreteFilter {
public:
    DiscreteFilter() = default;

    DiscreteFilter(const StateSpaceModel& continuous, double step)
        : continuous_(continuous),
          discrete_(discretize_zoh(continuous, step)),
          state_(Vector::Zero(continuous.order())),
          step_(step) {}

    Vector step(const Vector& u) {
        if (u.size() != discrete_.inputs()) {
            throw NumericError("DiscreteFilter::step: expected " +
                               std::to_string(discrete_.inputs()) + " inputs, got " +
                               std::to_string(u.size()));
        }
        state_ = discrete_.A * state_ + discrete_.B * u;
        return discrete_.C * state_ + discrete_.D * u;
    }

    void reset() { state_.setZero(); }

    [[nodiscard]] const StateSpaceModel& continuous() const { return continuous_; }
    [[nodiscard]] const StateSpaceModel& discrete() const { return discrete_; }
    [[nodiscard]] const Vector& state() const { return state_; }
    [[nodiscard]] double sample_step() const { return step_; }
    [[nodiscard]] Eigen::Index inputs() const { return discrete_.inputs(); }
    [[nodiscard]] Eigen::Index outputs() const { return discrete_.outputs(); }

private:
    StateSpaceModel continuous_;
    StateSpaceModel discrete_;
    Vector state_;
    double step_ = 0.0;
};

/// Bank of first-order low-pass filters omega/(s + omega), one per channel.
inline StateSpaceModel low_pass(Eigen::Index channels, double omega) {
    if (!(omega > 0.0)) {
        throw NumericError("low_pass: bandwidth must be positive");
    }
    const Matrix ident = Matrix::Identity(channels, channels);
    return {-omega * ident, omega * ident, ident, Matrix::Zero(channels, channels)};
}

}  // namespace l1ac
