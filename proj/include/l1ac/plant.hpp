#pragma once

#include <functional>
#include <optional>
#include <string>

#include "l1ac/statespace.hpp"

namespace l1ac {

/// Uncertainty as a function of the modeled state and time.
using UncertaintyFn = std::function<Vector(const Vector& x, double t)>;

/// Matched (through B1) and unmatched (through B2) uncertainties.
///
/// Constant specs keep their values so they can be serialized and hashed;
/// function specs are opaque.
class UncertaintySpec {
public:
    UncertaintySpec() = default;

    static UncertaintySpec none(Eigen::Index matched_dim, Eigen::Index unmatched_dim) {
        return constant(Vector::Zero(matched_dim), Vector::Zero(unmatched_dim));
    }

    static UncertaintySpec constant(Vector matched, Vector unmatched) {
        UncertaintySpec spec;
        spec.matched_const_ = std::move(matched);
        spec.unmatched_const_ = std::move(unmatched);
        return spec;
    }

    static UncertaintySpec functions(Eigen::Index matched_dim, UncertaintyFn matched,
                                     Eigen::Index unmatched_dim, UncertaintyFn unmatched) {
        UncertaintySpec spec;
        spec.matched_dim_ = matched_dim;
        spec.unmatched_dim_ = unmatched_dim;
        spec.matched_fn_ = std::move(matched);
        spec.unmatched_fn_ = std::move(unmatched);
        return spec;
    }

    [[nodiscard]] Vector matched(const Vector& x, double t) const {
        return matched_fn_ ? matched_fn_(x, t) : *matched_const_;
    }
    [[nodiscard]] Vector unmatched(const Vector& x, double t) const {
        return unmatched_fn_ ? unmatched_fn_(x, t) : *unmatched_const_;
    }

    [[nodiscard]] Eigen::Index matched_dim() const {
        return matched_const_ ? matched_const_->size() : matched_dim_;
    }
    [[nodiscard]] Eigen::Index unmatched_dim() const {
        return unmatched_const_ ? unmatched_const_->size() : unmatched_dim_;
    }

    [[nodiscard]] bool is_constant() const { return matched_const_ && unmatched_const_; }
    [[nodiscard]] const std::optional<Vector>& matched_constant() const { return matched_const_; }
    [[nodiscard]] const std::optional<Vector>& unmatched_constant() const {
        return unmatched_const_;
    }

private:
    std::optional<Vector> matched_const_;
    std::optional<Vector> unmatched_const_;
    Eigen::Index matched_dim_ = 0;
    Eigen::Index unmatched_dim_ = 0;
    UncertaintyFn matched_fn_;
    UncertaintyFn unmatched_fn_;
};

/**
 * @brief Closed-loop plant (model plus baseline controller) with uncertainties.
 *
 *   x' = A_M x + B1 K_r r + B1 (u_a + f1(x, t)) + B2 f2(x, t),  y = c x
 *
 * Single output. Construct with `make_plant`, which derives B2 and K_r and
 * checks the invariants.
 */
struct UncertainPlant {
    Matrix A_M;
    Matrix B1;
    Matrix B2;
    Matrix c;
    Matrix K_r;  // m x 1
    UncertaintySpec uncertainty;
    Vector x0;

    [[nodiscard]] Eigen::Index states() const { return A_M.rows(); }
    [[nodiscard]] Eigen::Index inputs() const { return B1.cols(); }
    [[nodiscard]] Eigen::Index unmatched_dim() const { return B2.cols(); }

    /// [B1 B2]
    [[nodiscard]] Matrix input_basis() const {
        Matrix b(states(), states());
        b << B1, B2;
        return b;
    }

    /// H1(s) = c (sI - A_M)^{-1} B1
    [[nodiscard]] StateSpaceModel matched_path() const {
        return {A_M, B1, c, Matrix::Zero(1, inputs())};
    }
    /// H2(s) = c (sI - A_M)^{-1} B2
    [[nodiscard]] StateSpaceModel unmatched_path() const {
        return {A_M, B2, c, Matrix::Zero(1, unmatched_dim())};
    }
};

/// Builds and validates an UncertainPlant. When `b2` is empty the orthogonal
/// complement of B1 is used. Throws ConfigError naming the offending field.
inline UncertainPlant make_plant(Matrix a_m, Matrix b1, Matrix c, std::optional<Matrix> b2,
                                 UncertaintySpec uncertainty, std::optional<Vector> x0 = {}) {
    UncertainPlant p;
    if (a_m.rows() == 0 || a_m.rows() != a_m.cols()) {
        throw ConfigError("plant.A_M", "must be square and non-empty");
    }
    const Eigen::Index n = a_m.rows();
    if (!a_m.allFinite()) throw ConfigError("plant.A_M", "non-finite entries");
    if (b1.rows() != n || b1.cols() < 1 || b1.cols() >= n) {
        throw ConfigError("plant.B1", "must be n x m with 1 <= m < n");
    }
    if (!b1.allFinite()) throw ConfigError("plant.B1", "non-finite entries");
    if (c.rows() != 1 || c.cols() != n) {
        throw ConfigError("plant.c", "must be 1 x n (single output)");
    }
    if (!c.allFinite()) throw ConfigError("plant.c", "non-finite entries");
    if (b1.cols() != 1) {
        throw ConfigError("plant.B1", "only a single control input is supported");
    }
    const Eigen::Index m = b1.cols();

    if (b2) {
        if (b2->rows() != n || b2->cols() != n - m) {
            throw ConfigError("plant.B2", "must be n x (n - m)");
        }
        if (!b2->allFinite()) throw ConfigError("plant.B2", "non-finite entries");
        const Matrix cross = b1.transpose() * *b2;
        const double scale = b1.norm() * b2->norm();
        if (cross.cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0)) {
            throw ConfigError("plant.B2", "orthogonality invariant B1^T B2 = 0 violated");
        }
        p.B2 = *b2;
    } else {
        try {
            p.B2 = null_complement(b1);
        } catch (const NumericError& e) {
            throw ConfigError("plant.B1", e.what());
        }
    }
    p.A_M = std::move(a_m);
    p.B1 = std::move(b1);
    p.c = std::move(c);

    if (Eigen::FullPivLU<Matrix>(p.input_basis()).rank() < n) {
        throw ConfigError("plant.B2", "[B1 B2] must have full rank");
    }
    try {
        p.K_r = feedforward_gain(p.A_M, p.B1, p.c);
    } catch (const NumericError& e) {
        throw ConfigError("plant.A_M", e.what());
    }

    if (uncertainty.matched_dim() == 0 && uncertainty.unmatched_dim() == 0) {
        uncertainty = UncertaintySpec::none(m, n - m);
    }
    if (uncertainty.matched_dim() != m) {
        throw ConfigError("uncertainty.matched", "dimension must equal the number of B1 columns");
    }
    if (uncertainty.unmatched_dim() != n - m) {
        throw ConfigError("uncertainty.unmatched",
                          "dimension must equal the number of B2 columns");
    }
    p.uncertainty = std::move(uncertainty);

    p.x0 = x0 ? *x0 : Vector::Zero(n);
    if (p.x0.size() != n) {
        throw ConfigError("plant.x0", "length must equal the state dimension");
    }
    return p;
}

/// The SISO test plant: A_m = [[-10, -50], [1, 0]], B_m = [2000; 0], C = [0 1].
inline UncertainPlant siso_benchmark(UncertaintySpec uncertainty = {}) {
    Matrix a(2, 2);
    a << -10.0, -50.0, 1.0, 0.0;
    Matrix b(2, 1);
    b << 2000.0, 0.0;
    Matrix c(1, 2);
    c << 0.0, 1.0;
    return make_plant(a, b, c, std::nullopt, std::move(uncertainty));
}

/// Step or ramp command, zero before the onset.
struct ReferenceSignal {
    enum class Kind { step, ramp };

    Kind kind = Kind::step;
    double onset = 0.0;
    double magnitude = 1.0;  // amplitude (step) or gradient (ramp)

    static ReferenceSignal step(double onset, double amplitude) {
        return {Kind::step, onset, amplitude};
    }
    static ReferenceSignal ramp(double onset, double gradient) {
        return {Kind::ramp, onset, gradient};
    }

    [[nodiscard]] double value(double t) const {
        if (t < onset) {
            return 0.0;
        }
        return kind == Kind::step ? magnitude : magnitude * (t - onset);
    }
};

inline double reference_value(const ReferenceSignal& sig, double t) { return sig.value(t); }

inline void check_state(const UncertainPlant& p, const Vector& x, const char* what) {
    if (x.size() != p.states()) {
        throw NumericError(std::string(what) + ": expected state of length " +
                           std::to_string(p.states()) + ", got " + std::to_string(x.size()));
    }
}

/// Right-hand side of the uncertain plant.
inline Vector plant_deriv(const UncertainPlant& p, const Vector& x, const Vector& u_a, double r,
                          double t) {
    check_state(p, x, "plant_deriv");
    if (u_a.size() != p.inputs()) {
        throw NumericError("plant_deriv: adaptive input has wrong length");
    }
    const Vector f1 = p.uncertainty.matched(x, t);
    const Vector f2 = p.uncertainty.unmatched(x, t);
    if (f1.size() != p.inputs() || f2.size() != p.unmatched_dim()) {
        throw NumericError("plant_deriv: uncertainty function returned wrong length");
    }
    return p.A_M * x + p.B1 * (p.K_r.col(0) * r + u_a + f1) + p.B2 * f2;
}

/// Right-hand side of the desired (reference) model x_M' = A_M x_M + B1 K_r r.
inline Vector reference_model_deriv(const UncertainPlant& p, const Vector& x_m, double r) {
    check_state(p, x_m, "reference_model_deriv");
    return p.A_M * x_m + p.B1 * (p.K_r.col(0) * r);
}

inline double output_of(const UncertainPlant& p, const Vector& x) { return (p.c * x)(0); }

/// Steady state for a constant reference and constant uncertainties with u_a = 0.
inline Vector open_loop_steady_state(const UncertainPlant& p, double r) {
    if (!p.uncertainty.is_constant()) {
        throw Error("open_loop_steady_state: needs constant uncertainties");
    }
    const Vector rhs = p.B1 * (p.K_r.col(0) * r + *p.uncertainty.matched_constant()) +
                       p.B2 * *p.uncertainty.unmatched_constant();
    return -p.A_M.fullPivLu().solve(rhs);
}

}  // namespace l1ac
