#pragma once

#include <vector>

#include "pecopt/gaussian.hpp"

namespace pecopt {

struct ClassificationReport {
    double bce = 0.0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc_pr = 0.0;
    long tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Threshold metrics at the given cut plus AUC-PR by trapezoid over the
/// threshold-swept precision/recall curve (anchored at recall 0 with
/// precision 1). Probabilities are clipped to [1e-12, 1-1e-12] for BCE;
/// precision/recall/F1 are 0 when their denominators are 0.
ClassificationReport classification_metrics(const std::vector<double>& probabilities,
                                            const std::vector<int>& labels,
                                            double threshold = 0.5);

struct PointwiseMetrics {
    double rmse = 0.0;
    double mae = 0.0;
    double mape = 0.0;  // percent; samples with |y| < 1e-9 are skipped
    double r2 = 0.0;
    long mape_skipped = 0;
};

PointwiseMetrics pointwise_metrics(const std::vector<double>& y_true,
                                   const std::vector<double>& y_pred);

struct ProbabilisticMetrics {
    double picp = 0.0;
    double mpiw = 0.0;
    double crps = 0.0;  // mean per sample
    double nll = 0.0;   // mean per sample; +/-inf markers for zero-stddev cases
};

ProbabilisticMetrics probabilistic_metrics(const std::vector<GaussianPrediction>& predictions,
                                           const std::vector<double>& y_true,
                                           double level = 0.95);

/// Closed-form CRPS of a Gaussian forecast:
///   sigma * (z * (2*Phi(z) - 1) + 2*phi(z) - 1/sqrt(pi)), z = (y-mu)/sigma.
/// Degenerates to |y - mu| as sigma -> 0.
double gaussian_crps(double y, double mu, double sigma);

struct RegressionReport {
    PointwiseMetrics point;
    ProbabilisticMetrics prob;
};

struct CalibrationCurve {
    std::vector<double> nominal;   // strictly increasing grid in (0,1)
    std::vector<double> observed;  // coverage at each nominal level
};

CalibrationCurve calibration_curve(const std::vector<GaussianPrediction>& predictions,
                                   const std::vector<double>& y_true,
                                   const std::vector<double>& grid);

struct WidthHistogram {
    std::vector<double> edges;  // bins+1 edges over [min width, max width]
    std::vector<long> counts;
};

WidthHistogram interval_width_histogram(const std::vector<GaussianPrediction>& predictions,
                                        double level, int bins);

}  // namespace pecopt
