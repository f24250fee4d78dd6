#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "liebridge/density.hpp"
#include "liebridge/errors.hpp"

using namespace liebridge;

namespace {

constexpr double kPi = std::numbers::pi;

// Heat kernel of 1/2 Laplacian on S^3 of radius 1 at geodesic distance alpha.
double s3_kernel(double s, double alpha) {
    double sum = 0.0;
    for (int n = -3; n <= 3; ++n) {
        const double b = alpha + 2.0 * kPi * n;
        sum += b * std::exp(-b * b / (2.0 * s));
    }
    return std::pow(2.0 * kPi * s, -1.5) * std::exp(s / 2.0) * sum / std::sin(alpha);
}

// SO(3) with the unit metric is S^3 of radius 2 modulo +-1. Density is relative to
// the measure that is Lebesgue on axis-angle coordinates near the identity.
double so3_kernel(double t, double theta) {
    const auto s3r2 = [&](double d) { return s3_kernel(t / 4.0, d / 2.0) / 8.0; };
    return s3r2(theta) + s3r2(2.0 * kPi - theta);
}

double so3_total_mass(double t) {
    const int n = 20000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double th = (i + 0.5) * kPi / n;
        s += so3_kernel(t, th) * 4.0 * kPi * th * th * jacobian_theta(th);
    }
    return s * kPi / n;
}

EstimatorReport estimate(const GroupElement& v, double T, int k, int n, std::uint64_t seed,
                         PhiFormula formula = PhiFormula::derived,
                         const MetricTensor& a = MetricTensor::identity()) {
    IntegratorConfig cfg;
    cfg.seed = seed;
    return estimate_heat_kernel(v, a, T, k, n, cfg, formula, QConvention::euclidean_consistent);
}

}  // namespace

TEST(QFactor, Examples) {
    const double T = 0.05;
    const double flat = std::pow(2.0 * kPi * T, -1.5);
    const auto e = GroupElement::identity();
    EXPECT_NEAR(q_factor(T, e, MetricTensor::identity(), QConvention::euclidean_consistent) / flat, 1.0, 1e-12);
    EXPECT_NEAR(q_factor(T, e, MetricTensor::diagonal(0.2, 0.2, 0.8), QConvention::euclidean_consistent) / flat,
                std::sqrt(0.032), 1e-12);
    EXPECT_NEAR(q_factor(T, group_exp(Vec3(0.3, 0, 0)), MetricTensor::identity(), QConvention::euclidean_consistent) /
                    flat,
                std::exp(-0.9), 1e-12);
    EXPECT_NEAR(q_factor(T, e, MetricTensor::diagonal(0.2, 0.2, 0.8), QConvention::paper_verbatim),
                std::pow(0.032 / (2.0 * kPi * T), 1.5), 1e-9);
    EXPECT_THROW(q_factor(0.0, e, MetricTensor::identity(), QConvention::euclidean_consistent), ArgumentError);
    EXPECT_THROW(q_factor(1.0, group_exp(Vec3(kPi, 0, 0)), MetricTensor::identity(),
                          QConvention::euclidean_consistent),
                 CutLocusError);
}

TEST(WeightSummary, MatchesDirectComputation) {
    const std::vector<double> lw = {-0.3, 0.1, 0.7, -1.2, 0.0};
    double s1 = 0.0;
    double s2 = 0.0;
    for (double x : lw) {
        s1 += std::exp(x);
        s2 += std::exp(2.0 * x);
    }
    const double n = 5.0;
    const double m = s1 / n;
    const double var = (s2 - n * m * m) / (n - 1.0);
    const auto s = summarize_log_weights(lw);
    EXPECT_NEAR(s.log_mean, std::log(m), 1e-14);
    EXPECT_NEAR(s.log_sd, 0.5 * std::log(var), 1e-12);
    EXPECT_NEAR(s.ess, s1 * s1 / s2, 1e-12);
    EXPECT_LE(s.ess, n);
}

TEST(WeightSummary, StableForHugeLogWeightsAndOrderFree) {
    const auto s = summarize_log_weights({1000.0, 1001.0});
    EXPECT_NEAR(s.log_mean, 1000.0 + std::log((1.0 + std::exp(1.0)) / 2.0), 1e-12);
    const auto a = summarize_log_weights({0.3, -2.0, 5.0, 1.1});
    const auto b = summarize_log_weights({5.0, 1.1, 0.3, -2.0});
    EXPECT_EQ(a.log_mean, b.log_mean);
    EXPECT_EQ(a.log_sd, b.log_sd);
    EXPECT_EQ(a.ess, b.ess);
}

TEST(WeightSummary, Errors) {
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    EXPECT_THROW(summarize_log_weights({0.0}), ArgumentError);
    EXPECT_THROW(summarize_log_weights({ninf, ninf, ninf}), DegenerateWeights);
    EXPECT_NO_THROW(summarize_log_weights({ninf, 0.0}));
}

TEST(ExactKernel, OracleIsAProbabilityDensity) {
    for (double t : {0.05, 0.3, 1.0, 3.0}) {
        EXPECT_NEAR(so3_total_mass(t), 1.0, 1e-6) << "t = " << t;
    }
    // small time: flat Gaussian near the identity
    EXPECT_NEAR(so3_kernel(1e-3, 1e-3) * std::pow(2.0 * kPi * 1e-3, 1.5), std::exp(-0.5e-3), 1e-3);
}

TEST(HeatKernel, ReportInvariants) {
    const auto r = estimate(group_exp(Vec3(0.4, 0.2, 0.0)), 0.3, 20, 64, 3);
    EXPECT_NEAR(r.p_hat, std::exp(r.log_p_hat), 1e-12 * r.p_hat);
    EXPECT_GT(r.ess, 0.0);
    EXPECT_LE(r.ess, 64.0);
    EXPECT_EQ(r.n_bridges, 64);
    EXPECT_EQ(r.log_weights.size(), 64u);
    EXPECT_EQ(r.formula, PhiFormula::derived);
    EXPECT_EQ(r.q_convention, QConvention::euclidean_consistent);
    EXPECT_THROW(estimate(GroupElement::identity(), 0.3, 20, 1, 3), ArgumentError);
}

TEST(HeatKernel, Deterministic) {
    const auto v = group_exp(Vec3(0.4, 0.2, 0.0));
    const auto a = MetricTensor::diagonal(0.2, 0.2, 0.8);
    IntegratorConfig cfg;
    cfg.seed = 8;
    const auto one = estimate_heat_kernel(v, a, 1.0, 20, 32, cfg, PhiFormula::derived,
                                          QConvention::euclidean_consistent, 1);
    const auto two = estimate_heat_kernel(v, a, 1.0, 20, 32, cfg, PhiFormula::derived,
                                          QConvention::euclidean_consistent, 3);
    EXPECT_EQ(one.log_p_hat, two.log_p_hat);
    EXPECT_EQ(one.log_weights, two.log_weights);
}

TEST(HeatKernel, FlatLimit) {
    const double T = 0.02;
    const double d = 0.1;
    const auto r = estimate(group_exp(Vec3(0.0, d, 0.0)), T, 50, 4096, 21);
    const double gauss = std::pow(2.0 * kPi * T, -1.5) * std::exp(-d * d / (2.0 * T));
    EXPECT_NEAR(r.p_hat / gauss, 1.0, 0.1);
}

TEST(HeatKernel, MatchesExactKernel) {
    for (double T : {0.3, 1.0}) {
        for (double theta : {0.8, 1.5, 2.5}) {
            const auto v = group_exp(Vec3(theta / std::sqrt(2.0), 0.0, theta / std::sqrt(2.0)));
            const double exact = so3_kernel(T, theta);
            const auto r = estimate(v, T, 50, 2048, 7);
            EXPECT_NEAR(r.p_hat / exact, 1.0, 0.03) << "T = " << T << " theta = " << theta;
            EXPECT_LT(r.std_error / r.p_hat, 0.01);
        }
    }
}

TEST(HeatKernel, ExactKernelSeparatesPhiFormulas) {
    const double T = 0.3;
    const double theta = 1.5;
    const auto v = group_exp(Vec3(0.0, 0.0, theta));
    const double exact = so3_kernel(T, theta);
    const auto derived = estimate(v, T, 50, 2048, 7);
    const auto verbatim = estimate(v, T, 50, 2048, 7, PhiFormula::paper_verbatim);
    EXPECT_LT(std::abs(derived.p_hat - exact), 3.0 * derived.std_error + 0.02 * exact);
    EXPECT_GT(std::abs(verbatim.p_hat - exact), 0.2 * exact);

    // Same paths with the opposite sign on the log-phi integrand.
    std::vector<double> flipped;
    for (double lw : derived.log_weights) {
        flipped.push_back(-lw);
    }
    const double p_flipped = std::exp(log_q_factor(T, v, MetricTensor::identity(), QConvention::euclidean_consistent) +
                                      summarize_log_weights(flipped).log_mean);
    EXPECT_GT(std::abs(p_flipped - exact), 0.15 * exact);
}

TEST(HeatKernel, InversionSymmetry) {
    const auto v = group_exp(Vec3(0.5, -0.4, 0.6));
    const auto fwd = estimate(v, 0.3, 50, 2048, 13);
    const auto inv = estimate(v.inverse(), 0.3, 50, 2048, 13);
    const double joint = std::hypot(fwd.std_error, inv.std_error);
    EXPECT_LT(std::abs(fwd.p_hat - inv.p_hat), 3.0 * joint);
}

TEST(HeatKernel, StandardErrorShrinksAsInverseSqrtN) {
    const auto v = group_exp(Vec3(1.5, 0.0, 0.0));
    std::vector<double> x;
    std::vector<double> y;
    for (int n : {256, 1024, 4096}) {
        const auto r = estimate(v, 0.3, 20, n, 55);
        x.push_back(std::log(static_cast<double>(n)));
        y.push_back(std::log(r.std_error));
    }
    const double mx = (x[0] + x[1] + x[2]) / 3.0;
    const double my = (y[0] + y[1] + y[2]) / 3.0;
    double sxy = 0.0;
    double sxx = 0.0;
    for (int i = 0; i < 3; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    EXPECT_NEAR(sxy / sxx, -0.5, 0.1);
}
