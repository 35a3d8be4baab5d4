#pragma once

#include <cstdint>
#include <vector>

#include "pecopt/gaussian.hpp"
#include "pecopt/tree.hpp"

namespace pecopt {

struct NaturalGradient {
    double d_mu;
    double d_log_sigma;
};

/// Natural gradient of the Gaussian NLL in (mu, log sigma): the ordinary
/// gradient ((mu-y)/sigma^2, 1-(y-mu)^2/sigma^2) premultiplied by the
/// inverse Fisher information diag(sigma^2, 1/2), giving
/// (mu - y, (1 - (y-mu)^2/sigma^2) / 2).
NaturalGradient natural_gradient_gaussian(double y, double mu, double log_sigma);

struct NgboostConfig {
    int iterations = 500;
    double learning_rate = 0.01;
    int max_depth = 4;
    int min_leaf = 5;
    double subsample = 0.5;  // row fraction per stage
    double sigma_floor = 1e-6;
    int early_stop_patience = 0;  // 0 disables validation-based early stop
    std::uint64_t seed = 0;
};

/// Single-target NGBoost with extra-trees base learners over a Gaussian
/// likelihood. One tree per distribution parameter per stage; each stage
/// carries a line-searched scaling factor so train NLL never increases.
class NgboostModel {
public:
    struct Stage {
        double scale = 1.0;
        RegressionTree mu_tree;
        RegressionTree log_sigma_tree;
    };

    NgboostModel() = default;

    /// Fit on (x, y); y in the caller's (typically standardized) units.
    /// Per-iteration train NLL is recorded in train_nll_curve(); if
    /// validation rows are supplied and patience > 0, fitting stops once
    /// validation NLL fails to improve for `patience` stages.
    static NgboostModel fit(const std::vector<FeatureRow>& x, const std::vector<double>& y,
                            const NgboostConfig& cfg,
                            const std::vector<FeatureRow>& x_val = {},
                            const std::vector<double>& y_val = {});

    GaussianPrediction predict(const FeatureRow& x) const;

    double initial_mu() const { return mu0_; }
    double initial_log_sigma() const { return log_sigma0_; }
    const std::vector<Stage>& stages() const { return stages_; }
    std::vector<Stage>& stages() { return stages_; }
    const std::vector<double>& train_nll_curve() const { return train_nll_; }
    const NgboostConfig& config() const { return cfg_; }

    void set_initial(double mu0, double log_sigma0) { mu0_ = mu0; log_sigma0_ = log_sigma0; }
    void set_config(const NgboostConfig& cfg) { cfg_ = cfg; }

private:
    NgboostConfig cfg_;
    double mu0_ = 0.0;
    double log_sigma0_ = 0.0;
    std::vector<Stage> stages_;
    std::vector<double> train_nll_;
};

/// Mean Gaussian NLL of predictions (mu[i], exp(log_sigma[i])) vs y.
double gaussian_nll(const std::vector<double>& mu, const std::vector<double>& log_sigma,
                    const std::vector<double>& y);

}  // namespace pecopt
