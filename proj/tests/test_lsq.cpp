#include <gtest/gtest.h>

#include <cmath>

#include "meascost/lsq.hpp"

using namespace meascost;

TEST(LevenbergMarquardt, RecoversExponentialDecay) {
    std::vector<double> t, y;
    for (int i = 0; i < 40; ++i) {
        t.push_back(0.1 * i);
        y.push_back(2.5 * std::exp(-1.3 * t.back()) + 0.2);
    }
    auto f = [&](const lsq::Vec& p) {
        lsq::Vec r(static_cast<Eigen::Index>(t.size()));
        for (std::size_t i = 0; i < t.size(); ++i) r(static_cast<Eigen::Index>(i)) = p(0) * std::exp(-p(1) * t[i]) + p(2) - y[i];
        return r;
    };
    lsq::Vec p0(3);
    p0 << 1.0, 0.5, 0.0;
    const auto res = lsq::levenberg_marquardt(f, p0);
    ASSERT_TRUE(res.converged);
    EXPECT_NEAR(res.params(0), 2.5, 1e-8);
    EXPECT_NEAR(res.params(1), 1.3, 1e-8);
    EXPECT_NEAR(res.params(2), 0.2, 1e-8);
    EXPECT_LT(res.residual_norm, 1e-8);
}

TEST(LevenbergMarquardt, RespectsBounds) {
    auto f = [](const lsq::Vec& p) {
        lsq::Vec r(1);
        r(0) = p(0) + 1.0;
        return r;
    };
    lsq::Bounds b{lsq::Vec::Constant(1, 0.0), lsq::Vec::Constant(1, 10.0)};
    const auto res = lsq::levenberg_marquardt(f, lsq::Vec::Constant(1, 5.0), {}, b);
    EXPECT_NEAR(res.params(0), 0.0, 1e-12);
}

TEST(LevenbergMarquardt, CovarianceFromResidualScatter) {
    // Straight line through noisy-looking but fixed data: compare with the
    // textbook ordinary-least-squares standard errors.
    const std::vector<double> x = {0, 1, 2, 3, 4, 5}, y = {0.1, 0.9, 2.2, 2.8, 4.1, 5.0};
    auto f = [&](const lsq::Vec& p) {
        lsq::Vec r(6);
        for (int i = 0; i < 6; ++i) r(i) = p(0) + p(1) * x[i] - y[i];
        return r;
    };
    const auto res = lsq::levenberg_marquardt(f, lsq::Vec::Zero(2));
    double sx = 0, sxx = 0, n = 6;
    for (double v : x) {
        sx += v;
        sxx += v * v;
    }
    const double s2 = res.residuals.squaredNorm() / 4.0;
    const double det = n * sxx - sx * sx;
    EXPECT_NEAR(res.standard_errors(1), std::sqrt(s2 * n / det), 1e-6);
    EXPECT_NEAR(res.standard_errors(0), std::sqrt(s2 * sxx / det), 1e-6);
}
