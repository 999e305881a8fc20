#include "idrank/twonn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "idrank/error.hpp"

namespace idrank {

namespace {

constexpr std::size_t kMinRatios = 3;

void check_ratios(std::span<const double> mu) {
    if (mu.size() < kMinRatios) {
        fail(ErrorCode::TooFewPoints,
             "need at least 3 mu ratios, got " + std::to_string(mu.size()));
    }
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!std::isfinite(mu[i])) {
            fail(ErrorCode::NonFiniteInput, "mu[" + std::to_string(i) + "] is not finite");
        }
        if (mu[i] < 1.0) {
            fail(ErrorCode::InvalidRatio,
                 "mu[" + std::to_string(i) + "] = " + std::to_string(mu[i]) + " is below 1");
        }
    }
}

void check_discard(double discard_fraction) {
    if (!(discard_fraction >= 0.0 && discard_fraction < 1.0)) {
        fail(ErrorCode::InvalidArgument,
             "discard_fraction must lie in [0, 1), got " + std::to_string(discard_fraction));
    }
}

}  // namespace

std::string_view to_string(FitMethod method) {
    return method == FitMethod::Mle ? "mle" : "regression";
}

FitMethod parse_fit_method(std::string_view text) {
    if (text == "mle") return FitMethod::Mle;
    if (text == "regression") return FitMethod::Regression;
    fail(ErrorCode::InvalidArgument, "unknown fit method '" + std::string(text) + "'");
}

IdEstimate fit_mle(std::span<const double> mu) {
    check_ratios(mu);
    double sum_log = 0.0;
    for (double m : mu) sum_log += std::log(m);
    if (sum_log <= 0.0) {
        fail(ErrorCode::DegenerateInput, "all mu ratios equal 1; the Pareto shape is unbounded");
    }
    IdEstimate est;
    est.method = FitMethod::Mle;
    est.n_used = mu.size();
    est.d_hat = static_cast<double>(mu.size()) / sum_log;
    return est;
}

std::vector<CurvePoint> regression_curve(std::span<const double> mu, double discard_fraction) {
    check_ratios(mu);
    check_discard(discard_fraction);

    std::vector<double> sorted(mu.begin(), mu.end());
    std::sort(sorted.begin(), sorted.end());

    const std::size_t n = sorted.size();
    const auto requested = static_cast<std::size_t>(std::ceil(discard_fraction * static_cast<double>(n)));
    const std::size_t discard = std::max<std::size_t>(requested, 1);
    const std::size_t kept = discard < n ? n - discard : 0;
    if (kept < kMinRatios) {
        fail(ErrorCode::TooFewPoints, "only " + std::to_string(kept) +
                                          " ratios remain after discarding the largest " +
                                          std::to_string(discard));
    }

    std::vector<CurvePoint> curve(kept);
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < kept; ++i) {
        const double f = static_cast<double>(i + 1) / dn;
        curve[i] = {std::log(sorted[i]), -std::log(1.0 - f)};
    }
    return curve;
}

IdEstimate fit_regression(std::span<const double> mu, double discard_fraction) {
    const auto curve = regression_curve(mu, discard_fraction);

    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& p : curve) {
        sxx += p.log_mu * p.log_mu;
        sxy += p.log_mu * p.neg_log_survival;
    }
    if (sxx <= 0.0) {
        fail(ErrorCode::DegenerateInput, "all retained mu ratios equal 1; slope undefined");
    }
    const double slope = sxy / sxx;

    double ss_res = 0.0;
    for (const auto& p : curve) {
        const double r = p.neg_log_survival - slope * p.log_mu;
        ss_res += r * r;
    }

    IdEstimate est;
    est.method = FitMethod::Regression;
    est.d_hat = slope;
    est.n_used = curve.size();
    est.discard_fraction = discard_fraction;
    est.residual = std::sqrt(ss_res / static_cast<double>(curve.size()));
    return est;
}

IdEstimate estimate_id(const PointCloud& cloud, const EstimateOptions& options) {
    const NeighborStats stats = two_nearest(cloud, options.search);
    IdEstimate est = options.method == FitMethod::Mle
                         ? fit_mle(stats.mu)
                         : fit_regression(stats.mu, options.discard_fraction);
    est.n_duplicates = stats.n_duplicates;
    return est;
}

}  // namespace idrank
