#pragma once

#include <utility>

namespace pecopt {

/// Univariate normal predictive distribution for one target.
struct GaussianPrediction {
    double mean = 0.0;
    double stddev = 0.0;  // >= 0
};

/// Standard normal density.
double normal_pdf(double z);

/// Standard normal CDF.
double normal_cdf(double z);

/// Inverse standard normal CDF (quantile function). p in (0, 1).
double normal_quantile(double p);

/// Two-sided z multiplier for a central interval at the given level,
/// e.g. level 0.95 -> 1.959964.
double interval_z(double level);

struct Interval {
    double lower;
    double upper;
};

/// Central prediction interval mean +- z(level) * stddev.
Interval prediction_interval(const GaussianPrediction& pred, double level = 0.95);

}  // namespace pecopt
