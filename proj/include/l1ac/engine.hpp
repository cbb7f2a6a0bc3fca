#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "l1ac/augmentation.hpp"

namespace l1ac {

struct EngineConfig {
    double t_end = 10.0;
    int substeps_per_sample = 1;

    void validate() const {
        if (!(t_end > 0.0) || !std::isfinite(t_end)) {
            throw ConfigError("engine.t_end", "must be positive");
        }
        if (substeps_per_sample < 1) {
            throw ConfigError("engine.substeps_per_sample", "must be >= 1");
        }
    }
};

/// Closed-loop signals sampled at every controller boundary t_i = i T_S.
struct SimTrace {
    std::string label;
    Law law = Law::off;
    std::vector<double> t;
    std::vector<double> r;
    std::vector<double> y;
    std::vector<double> y_m;
    std::vector<Vector> u_a;
    std::vector<Vector> sigma1;
    std::vector<Vector> sigma2;
    std::vector<Vector> x;
    std::vector<Vector> x_hat;
    std::vector<Vector> x_tilde;

    [[nodiscard]] std::size_t size() const { return t.size(); }
    [[nodiscard]] bool empty() const { return t.empty(); }
    [[nodiscard]] Eigen::Index states() const { return x.empty() ? 0 : x.front().size(); }
    [[nodiscard]] Eigen::Index inputs() const { return u_a.empty() ? 0 : u_a.front().size(); }
    [[nodiscard]] Eigen::Index unmatched_dim() const {
        return sigma2.empty() ? 0 : sigma2.front().size();
    }

    void reserve(std::size_t n) {
        for (auto* v : {&t, &r, &y, &y_m}) v->reserve(n);
        for (auto* v : {&u_a, &sigma1, &sigma2, &x, &x_hat, &x_tilde}) v->reserve(n);
    }
};

/**
 * @brief One classical fourth-order Runge-Kutta step.
 *
 * `deriv` is either deriv(t, x) or, for autonomous systems, deriv(x).
 */
template <typename Deriv>
Vector integrate_step(Deriv&& deriv, double t, const Vector& x, double h) {
    if (!(h > 0.0)) {
        throw NumericError("integrate_step: step must be positive");
    }
    auto eval = [&](double tt, const Vector& xx) -> Vector {
        Vector d;
        if constexpr (std::is_invocable_v<Deriv, double, const Vector&>) {
            d = deriv(tt, xx);
        } else {
            d = deriv(xx);
        }
        if (!d.allFinite()) {
            throw NumericError("integrate_step: non-finite derivative at t = " + std::to_string(tt));
        }
        return d;
    };
    const double half = 0.5 * h;
    const Vector k1 = eval(t, x);
    const Vector k2 = eval(t + half, x + half * k1);
    const Vector k3 = eval(t + half, x + half * k2);
    const Vector k4 = eval(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <typename Deriv>
Vector integrate_step(Deriv&& deriv, const Vector& x, double h) {
    return integrate_step(std::forward<Deriv>(deriv), 0.0, x, h);
}

/// Constant plant for run_closed_loop.
struct ConstantPlant {
    const UncertainPlant* plant;
    const UncertainPlant& operator()(double /*t*/) const { return *plant; }
};

/**
 * @brief Fixed-step closed-loop simulation.
 *
 * At each boundary t_i: x~ = x^ - x, sigma^ from the update law, u_a from
 * the control law; then plant, reference model and predictor are integrated
 * over [t_i, t_i + T_S) with u_a, sigma^ and r held per substep.
 *
 * `schedule(t)` returns the plant in force for the sample starting at t. The
 * estimator gain is rebuilt when A_M changes; the control-law filters are
 * built once from the plant at t = 0.
 */
template <typename Schedule>
    requires std::is_invocable_r_v<const UncertainPlant&, Schedule, double>
SimTrace run_closed_loop(Schedule&& schedule, const AugmentationConfig& cfg,
                         const ReferenceSignal& sig, const EngineConfig& eng) {
    eng.validate();
    const UncertainPlant& p0 = schedule(0.0);
    cfg.validate(p0);

    const Eigen::Index n = p0.states();
    PiecewiseConstantAdaptation adaptation(cfg, p0);
    ControlLaw control(p0, cfg);
    Matrix last_a_m = p0.A_M;

    const auto samples = static_cast<std::int64_t>(std::llround(eng.t_end / cfg.T_S));
    const double h = cfg.T_S / eng.substeps_per_sample;

    Vector x = p0.x0;
    Vector x_hat = p0.x0;
    Vector x_m = p0.x0;

    SimTrace trace;
    trace.law = cfg.law;
    trace.label = std::string(to_string(cfg.law));
    trace.reserve(static_cast<std::size_t>(samples) + 1);

    Vector z(3 * n);
    for (std::int64_t i = 0; i <= samples; ++i) {
        const double t_i = static_cast<double>(i) * cfg.T_S;
        const UncertainPlant& p = schedule(t_i);
        if (p.A_M != last_a_m) {
            adaptation.rebuild(cfg, p);
            last_a_m = p.A_M;
        }

        const Vector x_tilde = x_hat - x;
        const SigmaEstimate sigma = adaptation.update(x_tilde, i);
        const Vector u_a = control.update(sigma);
        if (!sigma.sigma1.allFinite() || !sigma.sigma2.allFinite() || !u_a.allFinite()) {
            throw DivergenceError(t_i, "non-finite estimate or control signal");
        }

        trace.t.push_back(t_i);
        trace.r.push_back(sig.value(t_i));
        trace.y.push_back(output_of(p, x));
        trace.y_m.push_back(output_of(p, x_m));
        trace.u_a.push_back(u_a);
        trace.sigma1.push_back(sigma.sigma1);
        trace.sigma2.push_back(sigma.sigma2);
        trace.x.push_back(x);
        trace.x_hat.push_back(x_hat);
        trace.x_tilde.push_back(x_tilde);

        if (i == samples) {
            break;
        }

        z << x, x_hat, x_m;
        for (int k = 0; k < eng.substeps_per_sample; ++k) {
            const double t_sub = t_i + k * h;
            const double r = sig.value(t_sub);
            auto deriv = [&](double t, const Vector& s) -> Vector {
                const Vector xs = s.segment(0, n);
                const Vector xh = s.segment(n, n);
                const Vector xm = s.segment(2 * n, n);
                Vector d(3 * n);
                d << plant_deriv(p, xs, u_a, r, t),
                    predictor_deriv(cfg, p, xh, u_a, r, sigma, xh - xs),
                    reference_model_deriv(p, xm, r);
                return d;
            };
            try {
                z = integrate_step(deriv, t_sub, z, h);
            } catch (const NumericError& e) {
                throw DivergenceError(t_sub, e.what());
            }
            if (!z.allFinite()) {
                throw DivergenceError(t_sub + h, "non-finite state");
            }
        }
        x = z.segment(0, n);
        x_hat = z.segment(n, n);
        x_m = z.segment(2 * n, n);
    }
    return trace;
}

inline SimTrace run_closed_loop(const UncertainPlant& plant, const AugmentationConfig& cfg,
                                const ReferenceSignal& sig, const EngineConfig& eng) {
    return run_closed_loop(ConstantPlant{&plant}, cfg, sig, eng);
}

}  // namespace l1ac
