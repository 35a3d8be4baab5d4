#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pecopt/metrics.hpp"
#include "pecopt/rng.hpp"

using namespace pecopt;

namespace {

// Brute-force AUC-PR: enumerate every distinct score as a threshold,
// recompute precision/recall by full scans, trapezoid from (0, 1).
double auc_pr_bruteforce(const std::vector<double>& probs, const std::vector<int>& labels) {
    std::vector<double> thresholds = probs;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    long total_pos = 0;
    for (int l : labels) total_pos += l != 0 ? 1 : 0;

    double auc = 0.0, prev_r = 0.0, prev_p = 1.0;
    for (double t : thresholds) {
        long tp = 0, fp = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] >= t) (labels[i] != 0 ? tp : fp)++;
        }
        const double r = total_pos > 0 ? static_cast<double>(tp) / total_pos : 0.0;
        const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        auc += (r - prev_r) * 0.5 * (p + prev_p);
        prev_r = r;
        prev_p = p;
    }
    return auc;
}

// Simpson quadrature of the CRPS integral for a Gaussian forecast. The
// integrand jumps at x = y, so the two smooth halves integrate
// separately.
double crps_quadrature(double y, double mu, double sigma) {
    auto simpson = [&](double a, double b, auto f) {
        const int n = 20000;  // even
        const double h = (b - a) / n;
        double s = f(a) + f(b);
        for (int i = 1; i < n; ++i) {
            s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
        }
        return s * h / 3.0;
    };
    const double lo = std::min(mu - 14.0 * sigma, y - 1.0);
    const double hi = std::max(mu + 14.0 * sigma, y + 1.0);
    auto below = [&](double x) {
        const double cdf = normal_cdf((x - mu) / sigma);
        return cdf * cdf;
    };
    auto above = [&](double x) {
        const double d = normal_cdf((x - mu) / sigma) - 1.0;
        return d * d;
    };
    return simpson(lo, y, below) + simpson(y, hi, above);
}

}  // namespace

TEST_CASE("classification metrics on hand-checked cases") {
    SUBCASE("perfect predictions") {
        const std::vector<double> p = {1.0, 1.0, 0.0, 0.0};
        const std::vector<int> y = {1, 1, 0, 0};
        const auto r = classification_metrics(p, y);
        CHECK(r.bce < 1e-10);
        CHECK(r.accuracy == 1.0);
        CHECK(r.precision == 1.0);
        CHECK(r.recall == 1.0);
        CHECK(r.f1 == 1.0);
        CHECK(r.auc_pr == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("constant 0.5 predictor has BCE ln 2") {
        const std::vector<double> p(10, 0.5);
        std::vector<int> y(10, 0);
        for (int i = 0; i < 5; ++i) y[i] = 1;
        const auto r = classification_metrics(p, y);
        CHECK(r.bce == doctest::Approx(0.69314718055994529).epsilon(1e-12));
    }

    SUBCASE("confusion counts TP=8 FP=2 FN=4 TN=6") {
        std::vector<double> p;
        std::vector<int> y;
        auto add = [&](int n, double prob, int label) {
            for (int i = 0; i < n; ++i) {
                p.push_back(prob);
                y.push_back(label);
            }
        };
        add(8, 0.9, 1);   // TP
        add(2, 0.9, 0);   // FP
        add(4, 0.1, 1);   // FN
        add(6, 0.1, 0);   // TN
        const auto r = classification_metrics(p, y);
        CHECK(r.tp == 8);
        CHECK(r.fp == 2);
        CHECK(r.fn == 4);
        CHECK(r.tn == 6);
        CHECK(r.precision == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(r.recall == doctest::Approx(8.0 / 12.0).epsilon(1e-12));
        CHECK(r.f1 == doctest::Approx(0.72727272727272729).epsilon(1e-12));
        CHECK(r.accuracy == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(r.tp + r.fp + r.tn + r.fn == 20);
    }

    SUBCASE("degenerate denominators fall back to zero") {
        // all-negative predictions: no positive calls, no positive labels
        const auto r = classification_metrics({0.1, 0.2}, {0, 0});
        CHECK(r.precision == 0.0);
        CHECK(r.recall == 0.0);
        CHECK(r.f1 == 0.0);
    }

    CHECK_THROWS_AS(classification_metrics({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(classification_metrics({0.5}, {1, 0}), std::invalid_argument);
}

TEST_CASE("auc-pr matches the exhaustive threshold oracle") {
    Rng rng(606);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = rng.uniform_int(5, 200);
        std::vector<double> p(n);
        std::vector<int> y(n);
        const bool ties = rng.bernoulli(0.5);
        for (int i = 0; i < n; ++i) {
            p[i] = ties ? 0.1 * rng.uniform_int(0, 10) : rng.uniform();
            y[i] = rng.bernoulli(0.5) ? 1 : 0;
        }
        if (std::accumulate(y.begin(), y.end(), 0) == 0) y[0] = 1;
        const auto r = classification_metrics(p, y);
        CHECK(r.auc_pr == doctest::Approx(auc_pr_bruteforce(p, y)).epsilon(1e-9));
    }
}

TEST_CASE("pointwise regression metrics") {
    SUBCASE("exact predictions") {
        const auto m = pointwise_metrics({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
        CHECK(m.rmse == 0.0);
        CHECK(m.mae == 0.0);
        CHECK(m.mape == 0.0);
        CHECK(m.r2 == 1.0);
    }

    SUBCASE("hand-computed case") {
        const auto m = pointwise_metrics({1.0, 2.0, 3.0}, {2.0, 2.0, 2.0});
        CHECK(m.rmse == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
        CHECK(m.mae == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(m.r2 == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("predicting the mean gives r2 = 0") {
        const std::vector<double> y = {2.0, 4.0, 9.0, 1.0};
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
        const auto m = pointwise_metrics(y, std::vector<double>(y.size(), mean));
        CHECK(m.r2 == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("mape skips near-zero truths and counts them") {
        const auto m = pointwise_metrics({0.0, 2.0}, {1.0, 1.0});
        CHECK(m.mape_skipped == 1);
        CHECK(m.mape == doctest::Approx(50.0).epsilon(1e-12));
    }

    SUBCASE("rmse >= mae on random data") {
        Rng rng(4);
        for (int t = 0; t < 50; ++t) {
            std::vector<double> y(40), p(40);
            for (int i = 0; i < 40; ++i) {
                y[i] = rng.normal(0, 3);
                p[i] = y[i] + rng.normal(0, 1);
            }
            const auto m = pointwise_metrics(y, p);
            CHECK(m.rmse >= m.mae - 1e-12);
        }
    }

    CHECK_THROWS_AS(pointwise_metrics({1.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("gaussian crps closed form") {
    SUBCASE("center hit with unit sigma") {
        CHECK(gaussian_crps(0.0, 0.0, 1.0) ==
              doctest::Approx(0.23369497725510913).epsilon(1e-12));
    }

    SUBCASE("sigma -> 0 degenerates to absolute error") {
        CHECK(gaussian_crps(3.0, 1.0, 0.0) == 2.0);
        CHECK(gaussian_crps(1.0, 1.0, 0.0) == 0.0);
    }

    SUBCASE("matches numerical quadrature on 100 random triples") {
        Rng rng(19);
        for (int t = 0; t < 100; ++t) {
            const double mu = rng.uniform(-5.0, 5.0);
            const double sigma = rng.uniform(0.1, 3.0);
            const double y = mu + rng.normal(0, 2.0 * sigma);
            CHECK(gaussian_crps(y, mu, sigma) ==
                  doctest::Approx(crps_quadrature(y, mu, sigma)).epsilon(1e-6));
        }
    }
}

TEST_CASE("probabilistic metrics") {
    SUBCASE("everything inside its interval gives PICP 1") {
        std::vector<GaussianPrediction> preds = {{1.0, 0.5}, {2.0, 0.5}};
        const auto m = probabilistic_metrics(preds, {1.1, 1.9});
        CHECK(m.picp == 1.0);
        CHECK(m.mpiw == doctest::Approx(2.0 * interval_z(0.95) * 0.5).epsilon(1e-12));
    }

    SUBCASE("zero sigma with a miss marks NLL infinite, CRPS absolute") {
        std::vector<GaussianPrediction> preds = {{1.0, 0.0}};
        const auto m = probabilistic_metrics(preds, {2.0});
        CHECK(std::isinf(m.nll));
        CHECK(m.nll > 0);
        CHECK(m.crps == 1.0);
        CHECK(m.mpiw == 0.0);
    }

    SUBCASE("perfect deterministic forecast") {
        std::vector<GaussianPrediction> preds = {{2.0, 0.0}};
        const auto m = probabilistic_metrics(preds, {2.0});
        CHECK(m.crps == 0.0);
        CHECK(m.picp == 1.0);
        CHECK(m.mpiw == 0.0);
    }

    CHECK_THROWS_AS(probabilistic_metrics({}, {}), std::invalid_argument);
}

TEST_CASE("prediction intervals") {
    SUBCASE("standard normal 95% bounds") {
        const auto iv = prediction_interval({0.0, 1.0}, 0.95);
        CHECK(iv.lower == doctest::Approx(-1.959964).epsilon(1e-5));
        CHECK(iv.upper == doctest::Approx(1.959964).epsilon(1e-5));
    }
    SUBCASE("zero sigma collapses the interval") {
        const auto iv = prediction_interval({3.5, 0.0}, 0.95);
        CHECK(iv.lower == 3.5);
        CHECK(iv.upper == 3.5);
    }
    SUBCASE("width is linear in sigma") {
        const double z = interval_z(0.9);
        for (double s : {0.1, 1.0, 7.5}) {
            const auto iv = prediction_interval({0.0, s}, 0.9);
            CHECK(iv.upper - iv.lower == doctest::Approx(2.0 * z * s).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(prediction_interval({0.0, 1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("calibration curve") {
    SUBCASE("perfectly calibrated synthetic data") {
        Rng rng(31);
        const int n = 10000;
        std::vector<GaussianPrediction> preds(n);
        std::vector<double> y(n);
        for (int i = 0; i < n; ++i) {
            preds[i] = {rng.uniform(-3.0, 3.0), rng.uniform(0.2, 2.0)};
            y[i] = rng.normal(preds[i].mean, preds[i].stddev);
        }
        const std::vector<double> grid = {0.5, 0.8, 0.9, 0.95};
        const auto curve = calibration_curve(preds, y, grid);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            CHECK(std::abs(curve.observed[g] - grid[g]) <= 0.02);
        }
        // nested intervals: observed coverage non-decreasing
        for (std::size_t g = 1; g < grid.size(); ++g) {
            CHECK(curve.observed[g] >= curve.observed[g - 1]);
        }
    }

    SUBCASE("input validation") {
        std::vector<GaussianPrediction> preds = {{0.0, 1.0}};
        CHECK_THROWS_AS(calibration_curve(preds, {0.0}, {}), std::invalid_argument);
        CHECK_THROWS_AS(calibration_curve(preds, {0.0}, {0.9, 0.5}), std::invalid_argument);
        CHECK_THROWS_AS(calibration_curve(preds, {0.0}, {0.5, 1.5}), std::invalid_argument);
    }
}

TEST_CASE("interval width histogram") {
    SUBCASE("constant sigma lands in one bin") {
        std::vector<GaussianPrediction> preds(50, GaussianPrediction{1.0, 0.3});
        const auto h = interval_width_histogram(preds, 0.95, 10);
        long total = 0;
        int nonzero = 0;
        for (long c : h.counts) {
            total += c;
            if (c > 0) ++nonzero;
        }
        CHECK(total == 50);
        CHECK(nonzero == 1);
    }

    SUBCASE("counts cover every prediction") {
        Rng rng(3);
        std::vector<GaussianPrediction> preds;
        for (int i = 0; i < 500; ++i) preds.push_back({0.0, rng.uniform(0.1, 5.0)});
        const auto h = interval_width_histogram(preds, 0.9, 25);
        CHECK(std::accumulate(h.counts.begin(), h.counts.end(), 0L) == 500);
        CHECK(h.edges.size() == 26);
    }
}
