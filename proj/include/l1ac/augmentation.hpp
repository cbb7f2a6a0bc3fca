#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "l1ac/plant.hpp"
#include "l1ac/polynomial.hpp"

namespace l1ac {

/// Which adaptive control law drives u_a.
enum class Law {
    off,           // predictor and estimator run, u_a = 0
    matched_only,  // u_a = -C1(s) sigma1
    original,      // unmatched branch C2(s) H1^{-1}(s) H2(s)
    modified,      // unmatched branch C2(s) H1(0)^{-1} H2(s)
};

inline std::string_view to_string(Law law) {
    switch (law) {
        case Law::off: return "off";
        case Law::matched_only: return "matched-only";
        case Law::original: return "original";
        case Law::modified: return "modified";
    }
    return "?";
}

inline std::optional<Law> parse_law(std::string_view s) {
    if (s == "off") return Law::off;
    if (s == "matched-only" || s == "matched_only") return Law::matched_only;
    if (s == "original") return Law::original;
    if (s == "modified") return Law::modified;
    return std::nullopt;
}

/// Controller tuning. An empty L_p means the zero matrix.
struct AugmentationConfig {
    Matrix L_p;
    double T_S = 1e-3;
    double omega_matched = 50.0;
    double omega_unmatched = 50.0;
    Law law = Law::modified;

    [[nodiscard]] Matrix predictor_gain(Eigen::Index n) const {
        return L_p.size() == 0 ? Matrix::Zero(n, n) : L_p;
    }

    /// A_S = L_p + A_M
    [[nodiscard]] Matrix error_dynamics(const UncertainPlant& p) const {
        return predictor_gain(p.states()) + p.A_M;
    }

    void validate(const UncertainPlant& p) const {
        if (!(T_S > 0.0) || !std::isfinite(T_S)) {
            throw ConfigError("controller.T_S", "sample period must be positive");
        }
        if (!(omega_matched > 0.0) || !std::isfinite(omega_matched)) {
            throw ConfigError("controller.omega_matched", "bandwidth must be positive");
        }
        if (!(omega_unmatched > 0.0) || !std::isfinite(omega_unmatched)) {
            throw ConfigError("controller.omega_unmatched", "bandwidth must be positive");
        }
        if (L_p.size() != 0) {
            if (L_p.rows() != p.states() || L_p.cols() != p.states()) {
                throw ConfigError("controller.L_p", "must be n x n");
            }
            if (!L_p.allFinite()) throw ConfigError("controller.L_p", "non-finite entries");
        }
        if (!is_hurwitz(error_dynamics(p))) {
            throw ConfigError("controller.L_p", "A_S = L_p + A_M must be Hurwitz");
        }
    }
};

/// Piecewise-constant uncertainty estimate, held over one sample interval.
struct SigmaEstimate {
    Vector sigma1;  // matched, m entries
    Vector sigma2;  // unmatched, n - m entries
    std::int64_t valid_from = 0;
};

/// State predictor right-hand side.
inline Vector predictor_deriv(const AugmentationConfig& cfg, const UncertainPlant& p,
                              const Vector& x_hat, const Vector& u_a, double r,
                              const SigmaEstimate& sigma, const Vector& x_tilde) {
    check_state(p, x_hat, "predictor_deriv");
    check_state(p, x_tilde, "predictor_deriv");
    if (u_a.size() != p.inputs() || sigma.sigma1.size() != p.inputs() ||
        sigma.sigma2.size() != p.unmatched_dim()) {
        throw NumericError("predictor_deriv: input or estimate has wrong length");
    }
    Vector dx = p.A_M * x_hat + p.B1 * (p.K_r.col(0) * r + u_a + sigma.sigma1) +
                p.B2 * sigma.sigma2;
    if (cfg.L_p.size() != 0) {
        dx += cfg.L_p * x_tilde;
    }
    return dx;
}

/// -B^{-1} Phi^{-1}(T_S) e^{A_S T_S}, mapping the sampled prediction error to the estimate.
inline Matrix adaptation_gain(const Matrix& a_s, const Matrix& input_basis, double period) {
    const Matrix ph = phi(a_s, period);
    const Eigen::FullPivLU<Matrix> phi_lu(ph);
    if (!phi_lu.isInvertible()) {
        throw NumericError("adaptation_gain: Phi(T_S) is singular");
    }
    const Eigen::FullPivLU<Matrix> b_lu(input_basis);
    if (!b_lu.isInvertible()) {
        throw NumericError("adaptation_gain: [B1 B2] is singular");
    }
    Matrix gain = -b_lu.solve(phi_lu.solve(mat_exp(a_s, period)));
    require_finite(gain, "adaptation_gain");
    return gain;
}

/// Piecewise-constant update law with the gain precomputed for a fixed A_S.
class PiecewiseConstantAdaptation {
public:
    PiecewiseConstantAdaptation(const AugmentationConfig& cfg, const UncertainPlant& p)
        : m_(p.inputs()) {
        rebuild(cfg, p);
    }

    /// Recomputes the gain, e.g. after the plant matrices changed.
    void rebuild(const AugmentationConfig& cfg, const UncertainPlant& p) {
        gain_ = adaptation_gain(cfg.error_dynamics(p), p.input_basis(), cfg.T_S);
        m_ = p.inputs();
    }

    [[nodiscard]] SigmaEstimate update(const Vector& x_tilde, std::int64_t sample) const {
        if (x_tilde.size() != gain_.cols()) {
            throw NumericError("adaptation update: prediction error has wrong length");
        }
        const Vector sigma = gain_ * x_tilde;
        return {sigma.head(m_), sigma.tail(sigma.size() - m_), sample};
    }

    [[nodiscard]] const Matrix& gain() const { return gain_; }

private:
    Matrix gain_;
    Eigen::Index m_;
};

inline SigmaEstimate adaptation_update(const AugmentationConfig& cfg, const UncertainPlant& p,
                                       const Vector& x_tilde, std::int64_t sample = 0) {
    return PiecewiseConstantAdaptation(cfg, p).update(x_tilde, sample);
}

/**
 * @brief Continuous realization of the unmatched branch, sigma2 -> control.
 *
 * modified: C2(s) H1(0)^{-1} H2(s); original: C2(s) H1^{-1}(s) H2(s) realized
 * jointly (so an improper H1^{-1} H2 is accepted as long as the product is
 * proper), rejected when H1 has a zero outside the open left half plane.
 */
inline StateSpaceModel unmatched_path_model(const UncertainPlant& p, const AugmentationConfig& cfg) {
    const double omega = cfg.omega_unmatched;
    switch (cfg.law) {
        case Law::modified: {
            Matrix h1_dc;
            try {
                h1_dc = dc_gain(p.matched_path());
            } catch (const NumericError& e) {
                throw ConfigError("plant.A_M", e.what());
            }
            const Eigen::FullPivLU<Matrix> lu(h1_dc);
            if (h1_dc.rows() != h1_dc.cols() || !lu.isInvertible()) {
                throw ConfigError("controller.law", "modified law needs an invertible DC gain of H1");
            }
            const StateSpaceModel scaled_h2(p.A_M, p.B2, lu.inverse() * p.c,
                                            Matrix::Zero(p.inputs(), p.unmatched_dim()));
            return series(scaled_h2, low_pass(p.inputs(), omega));
        }
        case Law::original: {
            const Polynomial n1 = siso_numerator(p.A_M, p.B1, p.c);
            if (n1.is_zero()) {
                throw ConfigError("controller.law", "original law needs a nonzero H1");
            }
            for (const auto& z : n1.roots()) {
                if (!(z.real() < 0.0)) {
                    std::ostringstream msg;
                    msg << "original law needs stable matched transmission zeros (H1 minimum "
                           "phase, all zeros in the open left half plane); found zero at s = "
                        << z.real() << (z.imag() >= 0 ? "+" : "") << z.imag() << "i";
                    throw ConfigError("controller.law", msg.str());
                }
            }
            const Polynomial den = n1 * Polynomial({omega, 1.0});
            std::vector<Polynomial> nums;
            for (Eigen::Index j = 0; j < p.unmatched_dim(); ++j) {
                nums.push_back(omega * siso_numerator(p.A_M, p.B2.col(j), p.c));
                if (nums.back().degree() > den.degree()) {
                    throw ConfigError("controller.law",
                                      "original law: C2(s) H1^{-1}(s) H2(s) is improper");
                }
            }
            return realize_miso(nums, den);
        }
        default:
            throw ConfigError("controller.law", "law has no unmatched branch");
    }
}

inline DiscreteFilter build_unmatched_path(const UncertainPlant& p, const AugmentationConfig& cfg) {
    const StateSpaceModel model = unmatched_path_model(p, cfg);
    if (!is_hurwitz(model.A)) {
        throw ConfigError("controller.law", "unmatched branch realization is not stable");
    }
    return {model, cfg.T_S};
}

/// Filters and branches that turn the estimates into u_a.
class ControlLaw {
public:
    ControlLaw(const UncertainPlant& p, const AugmentationConfig& cfg)
        : law_(cfg.law), m_(p.inputs()), n2_(p.unmatched_dim()) {
        if (law_ == Law::off) {
            return;
        }
        matched_ = DiscreteFilter(low_pass(m_, cfg.omega_matched), cfg.T_S);
        if (law_ == Law::original || law_ == Law::modified) {
            unmatched_ = build_unmatched_path(p, cfg);
        }
    }

    /// Advances the filters one sample with the estimate held; returns u_a.
    Vector update(const SigmaEstimate& sigma) {
        if (sigma.sigma1.size() != m_ || sigma.sigma2.size() != n2_) {
            throw NumericError("control_update: estimate has wrong length");
        }
        Vector u = Vector::Zero(m_);
        if (law_ == Law::off) {
            return u;
        }
        u -= matched_->step(sigma.sigma1);
        if (unmatched_) {
            u -= unmatched_->step(sigma.sigma2);
        }
        return u;
    }

    [[nodiscard]] Law law() const { return law_; }
    [[nodiscard]] const std::optional<DiscreteFilter>& matched_filter() const { return matched_; }
    [[nodiscard]] const std::optional<DiscreteFilter>& unmatched_path() const { return unmatched_; }

private:
    Law law_;
    Eigen::Index m_;
    Eigen::Index n2_;
    std::optional<DiscreteFilter> matched_;
    std::optional<DiscreteFilter> unmatched_;
};

inline Vector control_update(ControlLaw& law, const SigmaEstimate& sigma) { return law.update(sigma); }

}  // namespace l1ac
