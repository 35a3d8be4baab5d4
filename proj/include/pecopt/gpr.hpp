#pragma once

#include <cstdint>
#include <vector>

#include "pecopt/gaussian.hpp"
#include "pecopt/tree.hpp"

namespace pecopt {

struct GprKernelParams {
    double signal_var = 1.0;   // sigma_f^2
    double lengthscale = 2.0;  // shared across the 9 (standardized) features
    double noise_var = 1e-4;   // sigma_n^2
};

struct GprFitConfig {
    int subsample_cap = 2000;
    std::uint64_t seed = 0;
    double jitter_start = 1e-8;
    double jitter_max = 1e-4;
};

/// Exact Gaussian-process regression with an RBF kernel. Training solves
/// (K + sigma_n^2 I) alpha = y through a Cholesky factor; prediction is
/// the standard posterior mean k*^T alpha and latent variance
/// k** - k*^T K^-1 k* (clamped at zero).
class GprModel {
public:
    GprModel() = default;

    /// Rows beyond the subsample cap are discarded after a seeded shuffle.
    /// Cholesky failures escalate the diagonal jitter tenfold up to
    /// jitter_max before raising a numerical error.
    static GprModel fit(const std::vector<FeatureRow>& x, const std::vector<double>& y,
                        const GprKernelParams& kernel, const GprFitConfig& cfg = {});

    /// Grid search over kernel candidates maximizing the log marginal
    /// likelihood on a subsample, then a final fit with the winner.
    static GprModel fit_with_grid_search(const std::vector<FeatureRow>& x,
                                         const std::vector<double>& y,
                                         const GprFitConfig& cfg = {});

    GaussianPrediction predict(const FeatureRow& x) const;

    double log_marginal_likelihood() const { return lml_; }
    const GprKernelParams& kernel() const { return kernel_; }
    std::size_t training_size() const { return x_.size(); }
    const std::vector<double>& alpha() const { return alpha_; }

    // serialization hooks used by the regressor wrappers: persisting
    // (x, y, kernel) and refitting reproduces the factorization bitwise
    const std::vector<FeatureRow>& training_inputs() const { return x_; }
    const std::vector<double>& training_targets() const { return y_; }
    const std::vector<double>& cholesky() const { return chol_; }

private:
    std::vector<FeatureRow> x_;
    std::vector<double> y_;      // retained (subsampled) targets
    std::vector<double> chol_;   // n x n lower-triangular factor, row-major
    std::vector<double> alpha_;  // (K + sigma_n^2 I)^-1 y
    GprKernelParams kernel_;
    double lml_ = 0.0;
};

}  // namespace pecopt
