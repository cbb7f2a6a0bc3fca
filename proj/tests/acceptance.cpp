// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

namespace {

using namespace l1ac;
namespace fs = std::filesystem;

const std::string kScenarioDir = L1AC_SCENARIO_DIR;
const std::string kDataDir = L1AC_TEST_DATA_DIR;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

const RunResult& run_for(const ScenarioResult& res, Law law) {
    for (const auto& r : res.runs) {
        if (r.law == law) return r;
    }
    throw Error("no run for law " + std::string(to_string(law)));
}

Outcome nominal_step() {
    const auto res = run_preset("nominal-step");
    const double err = std::abs(res.runs.front().trace.y.back() - 1.0);
    return {err < 1e-3, "|y(t_end) - 1| = " + num(err) + " (< 1e-3)"};
}

Outcome nominal_ramp() {
    // Final-value theorem on (s + 10) / (s (s^2 + 10 s + 50)).
    const double oracle = 10.0 / 50.0;
    const auto res = run_preset("nominal-ramp");
    const double lag = *res.runs.front().metrics.tracking_lag;
    return {std::abs(lag - oracle) <= 1e-2,
            "lag = " + num(lag) + ", oracle " + num(oracle) + " (+- 1e-2)"};
}

Outcome unaugmented_uncertain_step() {
    // x_ss = -A^{-1} (B1 (K_g + f1) + B2 f2), solved by hand for the 2x2 plant:
    // x1 = -f2, x2 = (2000 (K_g + f1) - 10 x1) / 50.
    const double x1 = -0.001;
    const double oracle = (2000.0 * (0.025 + 0.05) - 10.0 * x1) / 50.0;
    const auto res = run_preset("uncertain-step-off");
    const double y = res.runs.front().trace.y.back();
    return {std::abs(y - oracle) <= 1e-3,
            "y(t_end) = " + num(y) + ", oracle " + num(oracle) + " (+- 1e-3)"};
}

Outcome matched_only() {
    const UncertainPlant p = siso_benchmark();
    const double f1 = 0.05;
    const double f2 = 0.001;
    // Residual c (-A^{-1}) B2 f2 and matched contribution c (-A^{-1}) B1 f1.
    const Eigen::FullPivLU<Matrix> lu(-p.A_M);
    const double residual = (p.c * lu.solve(p.B2))(0, 0) * f2;
    const double matched = (p.c * lu.solve(p.B1))(0, 0) * f1;
    const auto res = run_preset("uncertain-step-matched-only");
    const auto off = run_preset("uncertain-step-off");
    const double y_ss = res.runs.front().metrics.final_value;
    const double removed = off.runs.front().metrics.final_value - y_ss;
    const bool ok = std::abs(std::abs(y_ss - 1.0) - residual) <= 5e-5 &&
                    std::abs(residual - 2.0e-4) <= 5e-5 && std::abs(removed - matched) <= 1e-3;
    return {ok, "|y_ss - 1| = " + num(std::abs(y_ss - 1.0)) + ", oracle " + num(residual) +
                    " (+- 5e-5); matched contribution removed " + num(removed) + " of " +
                    num(matched)};
}

Outcome full_augmentation() {
    const auto res = run_preset("uncertain-step-compare");
    const double yo = run_for(res, Law::original).metrics.final_value;
    const double ym = run_for(res, Law::modified).metrics.final_value;
    const bool ok = std::abs(yo - 1.0) < 1e-3 && std::abs(ym - 1.0) < 1e-3 && std::abs(yo - ym) < 1e-6;
    return {ok, "|y_ss - 1| original " + num(std::abs(yo - 1.0)) + ", modified " +
                    num(std::abs(ym - 1.0)) + " (< 1e-3); difference " + num(std::abs(yo - ym)) +
                    " (< 1e-6)"};
}

Outcome transient_ordering() {
    const auto res = run_preset("uncertain-step-compare");
    const auto& mo = run_for(res, Law::original).metrics;
    const auto& mm = run_for(res, Law::modified).metrics;
    if (!mo.rise_time_10_90 || !mm.rise_time_10_90) {
        return {false, "rise time undefined"};
    }
    const bool ok = *mm.overshoot_pct >= *mo.overshoot_pct && *mm.rise_time_10_90 >= *mo.rise_time_10_90;
    return {ok, "overshoot modified " + num(*mm.overshoot_pct) + "% vs original " +
                    num(*mo.overshoot_pct) + "%; rise time modified " + num(*mm.rise_time_10_90) +
                    " s vs original " + num(*mo.rise_time_10_90) + " s"};
}

Outcome estimator_reconstruction() {
    const auto res = run_preset("uncertain-step-matched-only");
    const auto& tr = res.runs.front().trace;
    std::vector<double> s1;
    std::vector<double> s2;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        s1.push_back(tr.sigma1[i](0));
        s2.push_back(tr.sigma2[i](0));
    }
    const double m1 = testing::tail_mean(s1);
    const double m2 = testing::tail_mean(s2);
    const bool ok = std::abs(m1 - 0.05) <= 5e-3 && std::abs(m2 - 0.001) <= 5e-4;
    return {ok, "mean sigma1 = " + num(m1) + " (0.05 +- 5e-3), mean sigma2 = " + num(m2) +
                    " (0.001 +- 5e-4)"};
}

Outcome non_minimum_phase_gate() {
    std::string rejection;
    try {
        load_scenario(kDataDir + "/nmp-original.json");
    } catch (const ConfigError& e) {
        rejection = e.what();
    }
    const bool rejected = rejection.find("transmission zeros") != std::string::npos &&
                          rejection.find("open left half plane") != std::string::npos;
    const Scenario s = load_scenario(kScenarioDir + "/nmp-modified.json");
    const auto zeros = siso_numerator(s.plant.A_M, s.plant.B1, s.plant.c).roots();
    const bool zero_at_one = zeros.size() == 1 && std::abs(zeros[0] - 1.0) < 1e-9;
    const auto res = run_scenario(s);
    const auto& tr = res.runs.front().trace;
    const double err = std::abs(tr.y.back() - tr.r.back());
    const bool ok = rejected && zero_at_one && err < 1e-2;
    return {ok, std::string("original ") + (rejected ? "rejected" : "NOT rejected") +
                    ", H1 zero at +1 " + (zero_at_one ? "confirmed" : "missing") +
                    ", modified |y_ss - r| = " + num(err) + " (< 1e-2)"};
}

Outcome numerical_kernels() {
    std::mt19937_64 rng(2024);
    double semigroup = 0.0;
    double phi_identity = 0.0;
    double zoh_dc = 0.0;
    double rk4 = 0.0;
    std::uniform_real_distribution<double> td(0.01, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index n = 1 + trial % 5;
        const Matrix a = testing::random_stable(rng, n);
        const double t1 = td(rng);
        const double t2 = td(rng);
        semigroup = std::max(semigroup, testing::max_abs_diff(mat_exp(a, t1 + t2),
                                                              mat_exp(a, t1) * mat_exp(a, t2)));
        phi_identity = std::max(phi_identity,
                                testing::max_abs_diff(a * phi(a, t1) + Matrix::Identity(n, n),
                                                      mat_exp(a, t1)));
        const StateSpaceModel sys(a, testing::random_matrix(rng, n, 1),
                                  testing::random_matrix(rng, 1, n), Matrix::Zero(1, 1));
        const auto d = discretize_zoh(sys, t2);
        const Matrix ddc = d.C * (Matrix::Identity(n, n) - d.A).fullPivLu().solve(d.B);
        const Matrix cdc = dc_gain(sys);
        zoh_dc = std::max(zoh_dc, testing::max_abs_diff(ddc, cdc) / std::max(1.0, cdc.norm()));
        const Vector x0 = testing::random_matrix(rng, n, 1);
        const double h = 1e-3;
        const Vector x1 = integrate_step([&a](const Vector& v) -> Vector { return a * v; }, x0, h);
        rk4 = std::max(rk4, (x1 - mat_exp(a, h) * x0).cwiseAbs().maxCoeff());
    }
    const bool ok = semigroup <= 1e-9 && phi_identity <= 1e-10 && zoh_dc <= 1e-9 && rk4 <= 1e-10;
    return {ok, "semigroup " + num(semigroup) + " (1e-9), phi " + num(phi_identity) +
                    " (1e-10), ZOH DC " + num(zoh_dc) + " (1e-9), RK4 " + num(rk4) + " (1e-10)"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "l1ac_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::vector<std::string> first;
    bool identical = true;
    std::size_t bytes = 0;
    for (int pass = 0; pass < 2; ++pass) {
        const auto res = run_preset("uncertain-step-compare");
        for (std::size_t k = 0; k < res.runs.size(); ++k) {
            const fs::path p = dir / (std::to_string(pass) + "_" + res.runs[k].trace.label + ".csv");
            emit_csv(res.runs[k].trace, p);
            const std::string text = slurp(p);
            if (pass == 0) {
                first.push_back(text);
                bytes += text.size();
            } else {
                identical = identical && text == first[k];
            }
        }
    }
    fs::remove_all(dir);
    return {identical && bytes > 0, std::to_string(first.size()) + " CSV files, " +
                                        std::to_string(bytes) + " bytes, " +
                                        (identical ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"nominal step tracking", nominal_step},
        {"nominal ramp lag", nominal_ramp},
        {"unaugmented uncertain step", unaugmented_uncertain_step},
        {"matched-only residual", matched_only},
        {"full augmentation, both laws", full_augmentation},
        {"transient ordering", transient_ordering},
        {"estimator reconstruction", estimator_reconstruction},
        {"non-minimum-phase gate", non_minimum_phase_gate},
        {"numerical kernels", numerical_kernels},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failures += out.pass ? 0 : 1;
        std::printf("[%s] criterion %zu: %s: %s\n", out.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first.c_str(), out.detail.c_str());
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
    return failures == 0 ? 0 : 1;
}
