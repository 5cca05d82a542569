#ifndef CLIMARISK_ELASTICITY_HPP
#define CLIMARISK_ELASTICITY_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "climarisk/error.hpp"
#include "climarisk/matrix.hpp"
#include "climarisk/panel.hpp"
#include "climarisk/parallel.hpp"
#include "climarisk/stats.hpp"
#include "climarisk/svm.hpp"

namespace climarisk {

/// Log-linear elasticity fit: ln Y = intercept + sum_j beta_j ln(K_j + offset).
/// Each beta is the % response of Y to a 1% change in its regressor.
struct ElasticityModel {
    double intercept = 0.0; // in log space
    std::vector<double> betas;
    std::vector<std::string> regressor_names;
    double offset = 0.0; // additive shift applied to regressors before the log
    double r_squared = 0.0;
    double residual_variance = 0.0;
};

namespace detail {

/// Householder QR least squares for the (small, dense) design matrices used
/// here. Throws RankDeficient when a pivot collapses.
inline std::vector<double> qr_least_squares(Matrix a, std::vector<double> rhs,
                                            double* residual_ss = nullptr) {
    const std::size_t n = a.rows();
    const std::size_t p = a.cols();

    double max_col_norm = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += a(i, j) * a(i, j);
        max_col_norm = std::max(max_col_norm, std::sqrt(ss));
    }

    for (std::size_t k = 0; k < p; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) norm += a(i, k) * a(i, k);
        norm = std::sqrt(norm);
        if (norm <= 1e-10 * std::max(1.0, max_col_norm))
            throw Error(Errc::rank_deficient,
                        "design column " + std::to_string(k) + " is linearly dependent");

        if (a(k, k) > 0.0) norm = -norm;
        std::vector<double> v(n - k);
        v[0] = a(k, k) - norm;
        for (std::size_t i = k + 1; i < n; ++i) v[i - k] = a(i, k);
        const double vtv = norm * norm - a(k, k) * norm; // = ||v||^2 / 2
        if (vtv <= 0.0)
            throw Error(Errc::rank_deficient,
                        "design column " + std::to_string(k) + " is numerically degenerate");

        a(k, k) = norm;
        for (std::size_t i = k + 1; i < n; ++i) a(i, k) = 0.0;
        for (std::size_t j = k + 1; j < p; ++j) {
            double proj = 0.0;
            for (std::size_t i = k; i < n; ++i) proj += v[i - k] * a(i, j);
            proj /= vtv;
            for (std::size_t i = k; i < n; ++i) a(i, j) -= proj * v[i - k];
        }
        double proj = 0.0;
        for (std::size_t i = k; i < n; ++i) proj += v[i - k] * rhs[i];
        proj /= vtv;
        for (std::size_t i = k; i < n; ++i) rhs[i] -= proj * v[i - k];
    }

    std::vector<double> solution(p);
    for (std::size_t k = p; k-- > 0;) {
        double s = rhs[k];
        for (std::size_t j = k + 1; j < p; ++j) s -= a(k, j) * solution[j];
        solution[k] = s / a(k, k);
    }
    if (residual_ss) {
        double ss = 0.0;
        for (std::size_t i = p; i < n; ++i) ss += rhs[i] * rhs[i];
        *residual_ss = ss;
    }
    return solution;
}

} // namespace detail

/// Ordinary least squares on the logs; with i.i.d. Gaussian log-residuals
/// this is the maximum-likelihood estimate. Count-valued regressors may need
/// a positive offset (they can be zero in quiet years).
inline ElasticityModel fit_cdc(std::span<const double> target, const Matrix& regressors,
                               double offset = 0.0, std::vector<std::string> names = {}) {
    const std::size_t n = target.size();
    const std::size_t k = regressors.cols();
    if (regressors.rows() != n)
        throw Error(Errc::dimension_mismatch,
                    "target has " + std::to_string(n) + " rows, regressors " +
                        std::to_string(regressors.rows()));
    if (n < k + 1)
        throw Error(Errc::too_few_observations, "need at least " + std::to_string(k + 1) +
                                                    " observations for " + std::to_string(k) +
                                                    " regressors, got " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!(target[i] > 0.0))
            throw Error(Errc::non_positive_value,
                        "target value " + format_double(target[i]) + " at row " +
                            std::to_string(i + 1) + " is not positive");
        for (std::size_t j = 0; j < k; ++j)
            if (!(regressors(i, j) + offset > 0.0))
                throw Error(Errc::non_positive_value,
                            "regressor " + std::to_string(j + 1) + " at row " +
                                std::to_string(i + 1) + " is " + format_double(regressors(i, j)) +
                                "; offset " + format_double(offset) + " does not make it positive");
    }

    Matrix design(n, k + 1);
    std::vector<double> log_target(n);
    for (std::size_t i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        for (std::size_t j = 0; j < k; ++j) design(i, j + 1) = std::log(regressors(i, j) + offset);
        log_target[i] = std::log(target[i]);
    }

    double residual_ss = 0.0;
    const auto coef = detail::qr_least_squares(design, log_target, &residual_ss);

    ElasticityModel model;
    model.intercept = coef[0];
    model.betas.assign(coef.begin() + 1, coef.end());
    model.offset = offset;
    model.regressor_names = std::move(names);
    if (model.regressor_names.empty())
        for (std::size_t j = 0; j < k; ++j)
            model.regressor_names.push_back("K" + std::to_string(j + 1));

    const double mean_log = mean(log_target);
    double total_ss = 0.0;
    for (double v : log_target) total_ss += (v - mean_log) * (v - mean_log);
    model.r_squared = total_ss > 0.0 ? 1.0 - residual_ss / total_ss : 1.0;
    model.residual_variance =
        n > k + 1 ? residual_ss / static_cast<double>(n - (k + 1)) : 0.0;
    return model;
}

/// One scenario step: every indicator responds to a fractional weather
/// change `lambda` through its elasticity. Values driven negative by the
/// linearization are clamped at zero with a warning.
struct ScenarioPrediction {
    std::vector<double> values;
    std::vector<bool> clamped;
    std::vector<std::string> warnings;
};

inline ScenarioPrediction predict_scenario(std::span<const double> baseline,
                                           std::span<const double> betas, double lambda) {
    if (baseline.size() != betas.size())
        throw Error(Errc::dimension_mismatch, "baseline has " + std::to_string(baseline.size()) +
                                                  " entries, betas " + std::to_string(betas.size()));
    if (!(lambda > -1.0))
        throw Error(Errc::config_invalid, "lambda must be > -1, got " + format_double(lambda));

    ScenarioPrediction out;
    out.values.resize(baseline.size());
    out.clamped.assign(baseline.size(), false);
    for (std::size_t j = 0; j < baseline.size(); ++j) {
        double v = baseline[j] * (1.0 + lambda * betas[j]);
        if (v < 0.0) {
            out.clamped[j] = true;
            out.warnings.push_back("scenario value for indicator " + std::to_string(j + 1) +
                                   " clamped to 0 at lambda " + format_double(lambda));
            v = 0.0;
        }
        out.values[j] = v;
    }
    return out;
}

/// Maps a normalized feature vector to an underwriting probability.
using Scorer = std::function<double(std::span<const double>)>;

inline Scorer make_svm_scorer(const SvmModel& model, const Calibration& calibration) {
    if (model.w.empty()) throw Error(Errc::no_model, "scorer needs a trained model");
    return [model, calibration](std::span<const double> features) {
        return predict_probability(model, calibration, features);
    };
}

struct ProbabilityCurve {
    std::vector<double> lambdas;
    std::vector<double> probabilities;
    std::optional<double> lambda_star; // 0.5 crossing, when one exists
    std::vector<std::string> warnings;
};

/// Sweeps the scenario chain over a lambda grid: predict raw indicators,
/// re-map them into the training panel's normalized frame (clamping into
/// [0,1] where the scenario extrapolates outside it), then score. A 0.5
/// probability crossing is refined by bisection to 1e-6.
inline ProbabilityCurve sweep(const Scorer& score, std::span<const double> baseline,
                              std::span<const double> betas, const NormalizedPanel& frame,
                              std::span<const double> lambda_grid, unsigned threads = 1) {
    if (lambda_grid.empty()) throw Error(Errc::grid_empty, "lambda grid is empty");
    if (baseline.size() != frame.m())
        throw Error(Errc::dimension_mismatch, "baseline does not match the normalization frame");
    for (std::size_t i = 0; i + 1 < lambda_grid.size(); ++i)
        if (!(lambda_grid[i] < lambda_grid[i + 1]))
            throw Error(Errc::config_invalid, "lambda grid must be strictly increasing");
    if (!(lambda_grid.front() > -1.0))
        throw Error(Errc::config_invalid, "lambda grid must stay above -1");

    auto probability_at = [&](double lambda, bool* any_clamped = nullptr) {
        const auto prediction = predict_scenario(baseline, betas, lambda);
        std::vector<double> normalized(baseline.size());
        for (std::size_t j = 0; j < baseline.size(); ++j) {
            bool clamped = false;
            normalized[j] = frame.renormalize(j, prediction.values[j], &clamped);
            if (clamped && any_clamped) *any_clamped = true;
        }
        return score(normalized);
    };

    ProbabilityCurve curve;
    curve.lambdas.assign(lambda_grid.begin(), lambda_grid.end());
    curve.probabilities.resize(lambda_grid.size());
    std::vector<char> clamped_at(lambda_grid.size(), 0);
    parallel_for(lambda_grid.size(), threads, [&](std::size_t i) {
        bool clamped = false;
        curve.probabilities[i] = probability_at(lambda_grid[i], &clamped);
        clamped_at[i] = clamped ? 1 : 0;
    });
    for (std::size_t i = 0; i < lambda_grid.size(); ++i)
        if (clamped_at[i]) {
            curve.warnings.push_back("normalized prediction clamped into [0,1] from lambda " +
                                     format_double(lambda_grid[i]) + " onward");
            break;
        }

    // locate the first 0.5 crossing on the grid, then bisect
    for (std::size_t i = 0; i < curve.lambdas.size(); ++i) {
        const double offset = curve.probabilities[i] - 0.5;
        if (offset == 0.0) {
            curve.lambda_star = curve.lambdas[i];
            break;
        }
        if (i + 1 == curve.lambdas.size()) break;
        const double next_offset = curve.probabilities[i + 1] - 0.5;
        if (offset * next_offset < 0.0) {
            double lo = curve.lambdas[i], hi = curve.lambdas[i + 1];
            double lo_offset = offset;
            while (hi - lo > 1e-6) {
                const double mid = 0.5 * (lo + hi);
                const double mid_offset = probability_at(mid) - 0.5;
                if (mid_offset == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (lo_offset * mid_offset < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    lo_offset = mid_offset;
                }
            }
            curve.lambda_star = 0.5 * (lo + hi);
            break;
        }
    }
    return curve;
}

} // namespace climarisk

#endif // CLIMARISK_ELASTICITY_HPP
