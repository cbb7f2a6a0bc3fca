#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "l1ac/engine.hpp"

namespace l1ac {

/**
 * @brief Scalar summary of a trace.
 *
 * Step quantities are measured from the onset sample and normalized by the
 * change from the output at onset (y0) to the output at t_end. Overshoot is
 * the peak above y(t_end); the 2% settling band is centred on final_value.
 * Crossing times are sample instants, so their resolution is the trace
 * spacing.
 */
struct Metrics {
    double steady_state_error = 0.0;  // mean |y - r| over the final window
    double final_value = 0.0;         // mean y over the final window
    double tracking_error_l2 = 0.0;   // integral of (y - r)^2 dt, trapezoidal
    double peak_u_a = 0.0;            // max |u_a| over the trace

    // Step references only.
    std::optional<double> overshoot_pct;
    std::optional<double> rise_time_10_90;     // empty if 90% is never reached
    std::optional<double> settling_time_2pct;  // empty if not settled by t_end
    std::optional<double> time_to_90pct;       // from onset

    // Ramp references only: mean of r - y over the final window.
    std::optional<double> tracking_lag;
};

namespace detail {

inline std::size_t window_start(std::size_t n, double fraction) {
    const auto len = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    return n - std::clamp<std::size_t>(len, 1, n);
}

}  // namespace detail

inline Metrics compute_metrics(const SimTrace& trace, const ReferenceSignal& sig,
                               double window_fraction = 0.1) {
    const std::size_t n = trace.size();
    if (n == 0) {
        throw Error("compute_metrics: empty trace");
    }
    if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
        throw ConfigError("output.steady_state_fraction", "must be in (0, 1]");
    }
    if (trace.y.size() != n || trace.r.size() != n || trace.u_a.size() != n) {
        throw Error("compute_metrics: trace columns have different lengths");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (trace.r[i] != sig.value(trace.t[i])) {
            throw Error("compute_metrics: reference signal does not match the trace at t = " +
                        std::to_string(trace.t[i]));
        }
    }

    Metrics m;
    const std::size_t w0 = detail::window_start(n, window_fraction);
    const auto window = static_cast<double>(n - w0);
    double sum_y = 0.0;
    double sum_err = 0.0;
    double sum_lag = 0.0;
    for (std::size_t i = w0; i < n; ++i) {
        sum_y += trace.y[i];
        sum_err += std::abs(trace.y[i] - trace.r[i]);
        sum_lag += trace.r[i] - trace.y[i];
    }
    m.final_value = sum_y / window;
    m.steady_state_error = sum_err / window;

    for (std::size_t i = 1; i < n; ++i) {
        const double e0 = trace.y[i - 1] - trace.r[i - 1];
        const double e1 = trace.y[i] - trace.r[i];
        m.tracking_error_l2 += 0.5 * (e0 * e0 + e1 * e1) * (trace.t[i] - trace.t[i - 1]);
    }
    for (const auto& u : trace.u_a) {
        if (u.size() > 0) {
            m.peak_u_a = std::max(m.peak_u_a, u.cwiseAbs().maxCoeff());
        }
    }

    if (sig.kind == ReferenceSignal::Kind::ramp) {
        m.tracking_lag = sum_lag / window;
        return m;
    }

    const auto onset_it = std::lower_bound(trace.t.begin(), trace.t.end(), sig.onset);
    if (onset_it == trace.t.end()) {
        throw Error("compute_metrics: step onset lies after the end of the trace");
    }
    const auto k0 = static_cast<std::size_t>(onset_it - trace.t.begin());
    const double y0 = trace.y[k0];
    // An output already at its final value is normalized by the step size instead.
    const double y_end = trace.y.back();
    double span = y_end - y0;
    if (std::abs(span) <= 1e-12 * std::max(1.0, std::abs(y_end))) {
        span = sig.magnitude;
    }
    if (span == 0.0) {
        throw Error("compute_metrics: zero step amplitude; step metrics undefined");
    }

    double peak = y0;
    std::optional<double> t10;
    std::optional<double> t90;
    std::optional<std::size_t> last_outside;
    for (std::size_t i = k0; i < n; ++i) {
        const double e = (trace.y[i] - y0) / span;
        if ((trace.y[i] - peak) * span > 0.0) peak = trace.y[i];
        if (!t10 && e >= 0.1) t10 = trace.t[i];
        if (!t90 && e >= 0.9) t90 = trace.t[i];
        if (std::abs((trace.y[i] - m.final_value) / span) > 0.02) last_outside = i;
    }
    const double over = (peak - y_end) / span;
    m.overshoot_pct = std::max(0.0, over * 100.0);
    if (t10 && t90) {
        m.rise_time_10_90 = *t90 - *t10;
        m.time_to_90pct = *t90 - sig.onset;
    }
    if (!last_outside) {
        m.settling_time_2pct = 0.0;
    } else if (*last_outside + 1 < n) {
        m.settling_time_2pct = trace.t[*last_outside + 1] - sig.onset;
    }
    return m;
}

}  // namespace l1ac
