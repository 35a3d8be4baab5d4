#include "pecopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pecopt {

namespace {

constexpr double kProbClip = 1e-12;
constexpr double kInvSqrtPi = 0.5641895835477562869;

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

ClassificationReport classification_metrics(const std::vector<double>& probabilities,
                                            const std::vector<int>& labels, double threshold) {
    if (probabilities.size() != labels.size()) {
        throw std::invalid_argument("classification_metrics: length mismatch");
    }
    if (probabilities.empty()) {
        throw std::invalid_argument("classification_metrics: empty input");
    }

    ClassificationReport rep;
    double bce = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p = std::clamp(probabilities[i], kProbClip, 1.0 - kProbClip);
        const bool truth = labels[i] != 0;
        bce -= truth ? std::log(p) : std::log(1.0 - p);
        const bool pred = probabilities[i] >= threshold;
        if (pred && truth) ++rep.tp;
        else if (pred && !truth) ++rep.fp;
        else if (!pred && truth) ++rep.fn;
        else ++rep.tn;
    }
    const double n = static_cast<double>(probabilities.size());
    rep.bce = bce / n;
    rep.accuracy = static_cast<double>(rep.tp + rep.tn) / n;
    rep.precision = ratio_or_zero(static_cast<double>(rep.tp),
                                  static_cast<double>(rep.tp + rep.fp));
    rep.recall = ratio_or_zero(static_cast<double>(rep.tp),
                               static_cast<double>(rep.tp + rep.fn));
    rep.f1 = ratio_or_zero(static_cast<double>(rep.tp),
                           static_cast<double>(rep.tp) +
                               0.5 * static_cast<double>(rep.fp + rep.fn));

    // AUC-PR: sweep a cut through the sorted scores; a point per distinct
    // probability value, trapezoid over recall.
    std::vector<std::size_t> order(probabilities.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return probabilities[a] > probabilities[b];
    });
    const long total_pos = rep.tp + rep.fn;

    double auc = 0.0;
    double prev_recall = 0.0, prev_precision = 1.0;
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double score = probabilities[order[i]];
        while (i < order.size() && probabilities[order[i]] == score) {
            (labels[order[i]] != 0 ? tp : fp)++;
            ++i;
        }
        const double rec = ratio_or_zero(static_cast<double>(tp), static_cast<double>(total_pos));
        const double prec = ratio_or_zero(static_cast<double>(tp), static_cast<double>(tp + fp));
        auc += (rec - prev_recall) * 0.5 * (prec + prev_precision);
        prev_recall = rec;
        prev_precision = prec;
    }
    rep.auc_pr = auc;
    return rep;
}

PointwiseMetrics pointwise_metrics(const std::vector<double>& y_true,
                                   const std::vector<double>& y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw std::invalid_argument("pointwise_metrics: length mismatch");
    }
    if (y_true.size() < 2) {
        throw std::invalid_argument("pointwise_metrics: need at least 2 samples");
    }
    const double n = static_cast<double>(y_true.size());
    PointwiseMetrics m;
    double sse = 0.0, sae = 0.0, sape = 0.0;
    const double mean_y = std::accumulate(y_true.begin(), y_true.end(), 0.0) / n;
    double sst = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double e = y_true[i] - y_pred[i];
        sse += e * e;
        sae += std::abs(e);
        const double dy = y_true[i] - mean_y;
        sst += dy * dy;
        if (std::abs(y_true[i]) < 1e-9) {
            ++m.mape_skipped;
        } else {
            sape += std::abs(e / y_true[i]);
        }
    }
    m.rmse = std::sqrt(sse / n);
    m.mae = sae / n;
    const long used = static_cast<long>(y_true.size()) - m.mape_skipped;
    m.mape = used > 0 ? 100.0 * sape / static_cast<double>(used) : 0.0;
    m.r2 = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);
    return m;
}

double gaussian_crps(double y, double mu, double sigma) {
    if (sigma < 0.0 || !std::isfinite(sigma)) {
        throw std::invalid_argument("gaussian_crps: sigma must be finite and >= 0");
    }
    if (sigma == 0.0) {
        return std::abs(y - mu);
    }
    const double z = (y - mu) / sigma;
    return sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - kInvSqrtPi);
}

ProbabilisticMetrics probabilistic_metrics(const std::vector<GaussianPrediction>& predictions,
                                           const std::vector<double>& y_true, double level) {
    if (predictions.size() != y_true.size()) {
        throw std::invalid_argument("probabilistic_metrics: length mismatch");
    }
    if (predictions.empty()) {
        throw std::invalid_argument("probabilistic_metrics: empty input");
    }
    const double n = static_cast<double>(predictions.size());
    ProbabilisticMetrics m;
    double nll = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto& p = predictions[i];
        const auto iv = prediction_interval(p, level);
        if (y_true[i] >= iv.lower && y_true[i] <= iv.upper) m.picp += 1.0;
        m.mpiw += iv.upper - iv.lower;
        m.crps += gaussian_crps(y_true[i], p.mean, p.stddev);
        if (p.stddev == 0.0) {
            nll += y_true[i] == p.mean ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
        } else {
            const double z = (y_true[i] - p.mean) / p.stddev;
            nll += std::log(p.stddev) + 0.5 * z * z + 0.5 * std::log(2.0 * M_PI);
        }
    }
    m.picp /= n;
    m.mpiw /= n;
    m.crps /= n;
    m.nll = nll / n;
    return m;
}

CalibrationCurve calibration_curve(const std::vector<GaussianPrediction>& predictions,
                                   const std::vector<double>& y_true,
                                   const std::vector<double>& grid) {
    if (grid.empty()) {
        throw std::invalid_argument("calibration_curve: empty grid");
    }
    if (predictions.empty() || predictions.size() != y_true.size()) {
        throw std::invalid_argument("calibration_curve: bad inputs");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0 && grid[i] < 1.0)) {
            throw std::invalid_argument("calibration_curve: grid levels must lie in (0,1)");
        }
        if (i > 0 && grid[i] <= grid[i - 1]) {
            throw std::invalid_argument("calibration_curve: grid must be strictly increasing");
        }
    }
    CalibrationCurve curve;
    curve.nominal = grid;
    curve.observed.resize(grid.size(), 0.0);
    const double n = static_cast<double>(predictions.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        long inside = 0;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const auto iv = prediction_interval(predictions[i], grid[g]);
            if (y_true[i] >= iv.lower && y_true[i] <= iv.upper) ++inside;
        }
        curve.observed[g] = static_cast<double>(inside) / n;
    }
    return curve;
}

WidthHistogram interval_width_histogram(const std::vector<GaussianPrediction>& predictions,
                                        double level, int bins) {
    if (predictions.empty()) {
        throw std::invalid_argument("interval_width_histogram: empty input");
    }
    if (bins < 1) {
        throw std::invalid_argument("interval_width_histogram: bins must be >= 1");
    }
    std::vector<double> widths(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto iv = prediction_interval(predictions[i], level);
        widths[i] = iv.upper - iv.lower;
    }
    const auto [lo_it, hi_it] = std::minmax_element(widths.begin(), widths.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi == lo) hi = lo + 1.0;  // constant widths collapse into bin 0

    WidthHistogram h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) {
        h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
    }
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double w : widths) {
        int b = static_cast<int>((w - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

}  // namespace pecopt
