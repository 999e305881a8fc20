#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "idrank/neighbors.hpp"
#include "idrank/point_cloud.hpp"

namespace idrank {

enum class FitMethod { Mle, Regression };

std::string_view to_string(FitMethod method);
/// Throws InvalidArgument for anything other than "mle" / "regression".
FitMethod parse_fit_method(std::string_view text);

inline constexpr double kDefaultDiscardFraction = 0.1;

struct IdEstimate {
    double d_hat = 0.0;
    FitMethod method = FitMethod::Mle;
    std::size_t n_used = 0;
    double discard_fraction = 0.0;   // regression only
    std::optional<double> residual;  // RMS log-log residual, regression only
    std::size_t n_duplicates = 0;    // points collapsed before the neighbour search

    bool operator==(const IdEstimate&) const = default;
};

/// Closed-form Pareto(scale 1) maximum likelihood: d = n / sum(ln mu).
IdEstimate fit_mle(std::span<const double> mu);

/// One (x, y) = (ln mu_(i), -ln(1 - i/N)) pair of the empirical-CDF fit.
struct CurvePoint {
    double log_mu = 0.0;
    double neg_log_survival = 0.0;
};

/// The points that enter the regression fit, in ascending mu order. Drops the
/// ceil(discard_fraction * N) largest ratios, and always at least one.
std::vector<CurvePoint> regression_curve(std::span<const double> mu, double discard_fraction);

/// Least squares through the origin of -ln(1 - F_emp) against ln mu.
IdEstimate fit_regression(std::span<const double> mu,
                          double discard_fraction = kDefaultDiscardFraction);

struct EstimateOptions {
    FitMethod method = FitMethod::Mle;
    double discard_fraction = kDefaultDiscardFraction;
    SearchPath search = SearchPath::Auto;
};

/// two_nearest -> mu -> fit.
IdEstimate estimate_id(const PointCloud& cloud, const EstimateOptions& options = {});

}  // namespace idrank
