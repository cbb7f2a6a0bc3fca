#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"

namespace l1ac {
namespace {

UncertaintySpec campaign() {
    return UncertaintySpec::constant(Vector::Constant(1, 0.05), Vector::Constant(1, 0.001));
}

TEST(BenchmarkPlant, Structure) {
    const auto p = siso_benchmark();
    EXPECT_EQ(p.states(), 2);
    EXPECT_EQ(p.inputs(), 1);
    EXPECT_EQ(p.unmatched_dim(), 1);
    EXPECT_EQ(p.B2(0, 0), 0.0);
    EXPECT_EQ(p.B2(1, 0), 1.0);
    EXPECT_NEAR(p.K_r(0, 0), 0.025, 1e-15);
    EXPECT_EQ(p.x0, Vector::Zero(2));
}

TEST(BenchmarkPlant, EigenvaluesAreMinusFivePlusMinusFiveJ) {
    const auto eig = Eigen::EigenSolver<Matrix>(siso_benchmark().A_M).eigenvalues();
    for (Eigen::Index i = 0; i < 2; ++i) {
        EXPECT_NEAR(eig(i).real(), -5.0, 1e-12);
        EXPECT_NEAR(std::abs(eig(i).imag()), 5.0, 1e-12);
    }
}

TEST(PlantDeriv, UncertaintiesEnterThroughTheirChannels) {
    const auto p = siso_benchmark(campaign());
    const Vector d = plant_deriv(p, Vector::Zero(2), Vector::Zero(1), 1.0, 0.0);
    // B1 (K_r + f1) = [2000 * 0.075; 0], B2 f2 = [0; 0.001]
    EXPECT_NEAR(d(0), 150.0, 1e-12);
    EXPECT_NEAR(d(1), 0.001, 1e-18);
}

TEST(PlantDeriv, AdaptiveInputCancelsMatchedTerm) {
    const auto p = siso_benchmark(campaign());
    const Vector d = plant_deriv(p, Vector::Zero(2), Vector::Constant(1, -0.05), 0.0, 0.0);
    EXPECT_NEAR(d(0), 0.0, 1e-13);
    EXPECT_NEAR(d(1), 0.001, 1e-18);
}

TEST(PlantDeriv, StateDependentUncertainty) {
    auto unc = UncertaintySpec::functions(
        1, [](const Vector& x, double t) { return Vector::Constant(1, x(1) + t); },
        1, [](const Vector&, double) { return Vector::Zero(1); });
    const auto p = siso_benchmark(unc);
    EXPECT_FALSE(p.uncertainty.is_constant());
    Vector x(2);
    x << 0.0, 0.5;
    const Vector d = plant_deriv(p, x, Vector::Zero(1), 0.0, 0.25);
    EXPECT_NEAR(d(0), -50.0 * 0.5 + 2000.0 * 0.75, 1e-12);
}

TEST(PlantDeriv, RejectsWrongLengths) {
    const auto p = siso_benchmark();
    EXPECT_THROW(plant_deriv(p, Vector::Zero(3), Vector::Zero(1), 0.0, 0.0), NumericError);
    EXPECT_THROW(plant_deriv(p, Vector::Zero(2), Vector::Zero(2), 0.0, 0.0), NumericError);
}

TEST(SteadyState, UnaugmentedUncertainStep) {
    // Hand solve of A x = -(B1 (K_g + f1) + B2 f2):
    //   row 2: x1 = -0.001
    //   row 1: -10 x1 - 50 x2 = -150  ->  x2 = (150 + 0.01) / 50
    const double x1 = -0.001;
    const double x2 = (150.0 - 10.0 * x1) / 50.0;
    const Vector xs = open_loop_steady_state(siso_benchmark(campaign()), 1.0);
    EXPECT_NEAR(xs(0), x1, 1e-15);
    EXPECT_NEAR(xs(1), x2, 1e-12);
    EXPECT_NEAR(xs(1), 3.0002, 1e-12);
}

TEST(SteadyState, NominalIsUnitGain) {
    const Vector xs = open_loop_steady_state(siso_benchmark(), 1.0);
    EXPECT_NEAR(output_of(siso_benchmark(), xs), 1.0, 1e-14);
}

TEST(ReferenceModel, MatchesNominalPlant) {
    const auto p = siso_benchmark();
    Vector x(2);
    x << 0.2, -0.3;
    EXPECT_EQ(reference_model_deriv(p, x, 1.0), plant_deriv(p, x, Vector::Zero(1), 1.0, 0.0));
}

TEST(ReferenceSignal, StepAndRamp) {
    const auto step = ReferenceSignal::step(2.0, 1.5);
    EXPECT_EQ(step.value(1.999), 0.0);
    EXPECT_EQ(step.value(2.0), 1.5);
    EXPECT_EQ(reference_value(step, 9.0), 1.5);
    const auto ramp = ReferenceSignal::ramp(1.0, 2.0);
    EXPECT_EQ(ramp.value(0.5), 0.0);
    EXPECT_EQ(ramp.value(1.0), 0.0);
    EXPECT_DOUBLE_EQ(ramp.value(3.5), 5.0);
}

TEST(RampLag, FinalValueTheoremOracle) {
    // Error transfer 1 - T(s) = s (s + 10) / (s^2 + 10 s + 50); with R = 1/s^2
    // the lag is lim s E(s) = 10 / 50. The engine holds r over each sample,
    // which adds a mean delay of T_S / 2 at unit gradient.
    const double oracle = 10.0 / 50.0;
    const auto p = siso_benchmark();
    AugmentationConfig cfg;
    cfg.law = Law::off;
    const auto trace = run_closed_loop(p, cfg, ReferenceSignal::ramp(0.0, 1.0), EngineConfig{});
    EXPECT_NEAR(trace.r.back() - trace.y.back(), oracle + cfg.T_S / 2.0, 1e-8);
    EXPECT_NEAR(trace.r.back() - trace.y.back(), oracle, 1e-3);
}

TEST(MakePlant, DerivesComplementAndGain) {
    const auto p = testing::nmp_plant();
    EXPECT_NEAR((p.B1.transpose() * p.B2).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    EXPECT_NEAR(p.K_r(0, 0), -24.0, 1e-12);
}

TEST(MakePlant, ErrorsNameTheField) {
    const auto base = siso_benchmark();
    auto key_of = [](auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            return e.key();
        }
        return std::string("<no error>");
    };
    Matrix bad_b2(2, 1);
    bad_b2 << 1.0, 1.0;
    EXPECT_EQ(key_of([&] { make_plant(base.A_M, base.B1, base.c, bad_b2, {}); }), "plant.B2");
    try {
        make_plant(base.A_M, base.B1, base.c, bad_b2, {});
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("orthogonality"), std::string::npos);
    }
    EXPECT_EQ(key_of([&] { make_plant(base.A_M, base.B1, Matrix::Ones(1, 3), {}, {}); }),
              "plant.c");
    EXPECT_EQ(key_of([&] { make_plant(Matrix::Ones(2, 3), base.B1, base.c, {}, {}); }),
              "plant.A_M");
    EXPECT_EQ(key_of([&] { make_plant(base.A_M, Matrix::Zero(2, 1), base.c, {}, {}); }),
              "plant.B1");
    EXPECT_EQ(key_of([&] {
                  make_plant(base.A_M, base.B1, base.c, {},
                             UncertaintySpec::constant(Vector::Zero(2), Vector::Zero(1)));
              }),
              "uncertainty.matched");
    EXPECT_EQ(key_of([&] { make_plant(base.A_M, base.B1, base.c, {}, {}, Vector::Zero(3)); }),
              "plant.x0");
    Matrix singular(2, 2);
    singular << 0, 0, 1, 0;
    EXPECT_EQ(key_of([&] { make_plant(singular, base.B1, base.c, {}, {}); }), "plant.A_M");
}

}  // namespace
}  // namespace l1ac
