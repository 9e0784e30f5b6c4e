#pragma once

// Small dense Levenberg-Marquardt engine for the calibration fits.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "meascost/errors.hpp"

namespace meascost::lsq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Options {
    std::size_t max_iterations = 200;
    double relative_step_tolerance = 1e-8;
    double initial_damping = 1e-3;
};

struct Bounds {
    Vec lower;
    Vec upper;
};

struct Result {
    Vec params;
    Vec residuals;
    double residual_norm = 0.0;
    Mat covariance;
    Vec standard_errors;
    std::size_t iterations = 0;
    bool converged = false;
    double condition_number = 0.0;  // of the column-scaled Jacobian
};

using ResidualFn = std::function<Vec(const Vec&)>;

// Central-difference Jacobian.
inline Mat numeric_jacobian(const ResidualFn& f, const Vec& p, const std::optional<Bounds>& bounds = {}) {
    const Vec r0 = f(p);
    Mat jac(r0.size(), p.size());
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        const double h = 6e-6 * std::max(std::abs(p(j)), 1e-3);
        Vec hi = p, lo = p;
        hi(j) += h;
        lo(j) -= h;
        double span = 2.0 * h;
        if (bounds && lo(j) < bounds->lower(j)) {
            lo(j) = p(j);
            span = h;
        }
        if (bounds && hi(j) > bounds->upper(j)) {
            hi(j) = p(j);
            span = (lo(j) == p(j)) ? 0.0 : h;
        }
        if (span == 0.0) {
            jac.col(j).setZero();
            continue;
        }
        jac.col(j) = (f(hi) - f(lo)) / span;
    }
    return jac;
}

namespace detail {

inline Vec clamp(Vec p, const std::optional<Bounds>& bounds) {
    if (!bounds) return p;
    for (Eigen::Index j = 0; j < p.size(); ++j) p(j) = std::clamp(p(j), bounds->lower(j), bounds->upper(j));
    return p;
}

inline void finish(Result& res, const Mat& jac, std::size_t n_params) {
    const auto m = res.residuals.size();
    res.residual_norm = res.residuals.norm();
    Vec scale = jac.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j)
        if (scale(j) == 0.0) scale(j) = 1.0;
    const Mat scaled = jac * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Mat> svd(scaled);
    const auto& sv = svd.singularValues();
    res.condition_number = sv.size() && sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                                 : std::numeric_limits<double>::infinity();
    const double dof = static_cast<double>(m) - static_cast<double>(n_params);
    const double s2 = dof > 0 ? res.residuals.squaredNorm() / dof : 0.0;
    const Mat normal = jac.transpose() * jac;
    res.covariance = s2 * normal.completeOrthogonalDecomposition().pseudoInverse();
    res.standard_errors = res.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace detail

// Minimizes |f(p)|^2 starting from p0. Returns with converged == false when
// the iteration cap is reached; callers decide whether that is an error.
inline Result levenberg_marquardt(const ResidualFn& f, Vec p0, const Options& opt = {},
                                  const std::optional<Bounds>& bounds = {}) {
    Result res;
    Vec p = detail::clamp(std::move(p0), bounds);
    Vec r = f(p);
    if (!r.allFinite()) throw DomainError("residuals are not finite at the initial point");
    double cost = r.squaredNorm();
    double damping = opt.initial_damping;
    Mat jac = numeric_jacobian(f, p, bounds);

    for (res.iterations = 1; res.iterations <= opt.max_iterations; ++res.iterations) {
        const Mat a = jac.transpose() * jac;
        const Vec g = jac.transpose() * r;
        bool accepted = false;
        Vec step;
        while (!accepted) {
            Mat damped = a;
            for (Eigen::Index j = 0; j < a.rows(); ++j) damped(j, j) += damping * std::max(a(j, j), 1e-12);
            step = damped.ldlt().solve(-g);
            const Vec trial = detail::clamp(p + step, bounds);
            step = trial - p;
            const Vec r_trial = f(trial);
            const double trial_cost = r_trial.allFinite() ? r_trial.squaredNorm() : INFINITY;
            if (trial_cost <= cost) {
                accepted = true;
                p = trial;
                r = r_trial;
                const double old_cost = cost;
                cost = trial_cost;
                damping = std::max(damping / 3.0, 1e-15);
                const double rel = step.norm() / (p.norm() + 1e-30);
                if (rel < opt.relative_step_tolerance || (old_cost - cost) <= 1e-30 * (1.0 + old_cost)) {
                    res.converged = true;
                }
            } else {
                damping *= 4.0;
                if (damping > 1e16) {
                    // No descent direction left: p is stationary to machine precision.
                    res.converged = true;
                    break;
                }
            }
        }
        if (res.converged) break;
        jac = numeric_jacobian(f, p, bounds);
    }
    res.iterations = std::min(res.iterations, opt.max_iterations);
    res.params = p;
    res.residuals = r;
    detail::finish(res, numeric_jacobian(f, p, bounds), static_cast<std::size_t>(p.size()));
    return res;
}

}  // namespace meascost::lsq
