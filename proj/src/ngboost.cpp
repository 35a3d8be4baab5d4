#include "pecopt/ngboost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pecopt {

NaturalGradient natural_gradient_gaussian(double y, double mu, double log_sigma) {
    if (!std::isfinite(log_sigma)) {
        throw std::invalid_argument("natural_gradient_gaussian: log_sigma must be finite");
    }
    const double sigma = std::exp(log_sigma);
    const double r = (y - mu) / sigma;
    return {mu - y, 0.5 * (1.0 - r * r)};
}

double gaussian_nll(const std::vector<double>& mu, const std::vector<double>& log_sigma,
                    const std::vector<double>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double sigma = std::exp(log_sigma[i]);
        const double z = (y[i] - mu[i]) / sigma;
        total += log_sigma[i] + 0.5 * z * z;
    }
    return total / static_cast<double>(y.size()) + 0.5 * std::log(2.0 * M_PI);
}

namespace {

// NLL with the model's sigma floor applied, as used during prediction.
double floored_nll(const std::vector<double>& mu, const std::vector<double>& log_sigma,
                   const std::vector<double>& y, double floor) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double sigma = std::max(std::exp(log_sigma[i]), floor);
        const double z = (y[i] - mu[i]) / sigma;
        total += std::log(sigma) + 0.5 * z * z;
    }
    return total / static_cast<double>(y.size()) + 0.5 * std::log(2.0 * M_PI);
}

}  // namespace

NgboostModel NgboostModel::fit(const std::vector<FeatureRow>& x, const std::vector<double>& y,
                               const NgboostConfig& cfg, const std::vector<FeatureRow>& x_val,
                               const std::vector<double>& y_val) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("NgboostModel::fit: feature/target length mismatch");
    }
    if (x.size() < 10) {
        throw std::invalid_argument("NgboostModel::fit: need at least 10 training rows");
    }

    NgboostModel model;
    model.cfg_ = cfg;

    const std::size_t n = x.size();
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    model.mu0_ = mean;
    model.log_sigma0_ = std::log(std::max(std::sqrt(var), cfg.sigma_floor));

    std::vector<double> mu(n, model.mu0_), log_sigma(n, model.log_sigma0_);
    std::vector<double> mu_val(x_val.size(), model.mu0_);
    std::vector<double> ls_val(x_val.size(), model.log_sigma0_);

    const std::size_t sub_n = std::max<std::size_t>(
        2 * static_cast<std::size_t>(cfg.min_leaf),
        static_cast<std::size_t>(cfg.subsample * static_cast<double>(n)));
    std::vector<int> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    const TreeConfig tree_cfg{cfg.max_depth, cfg.min_leaf};
    std::vector<double> grad_mu(n), grad_ls(n);
    std::vector<double> tree_mu_pred(n), tree_ls_pred(n);
    std::vector<double> cand_mu(n), cand_ls(n);

    double best_val_nll = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(iter)));

        std::vector<int> rows = all_rows;
        if (sub_n < n) {
            rng.shuffle(rows);
            rows.resize(sub_n);
        }

        for (int r : rows) {
            const auto g = natural_gradient_gaussian(y[r], mu[r], log_sigma[r]);
            grad_mu[r] = g.d_mu;
            grad_ls[r] = g.d_log_sigma;
        }

        Stage stage;
        stage.mu_tree = RegressionTree::fit(x, grad_mu, rows, tree_cfg, rng);
        stage.log_sigma_tree = RegressionTree::fit(x, grad_ls, rows, tree_cfg, rng);

        for (std::size_t i = 0; i < n; ++i) {
            tree_mu_pred[i] = stage.mu_tree.predict(x[i]);
            tree_ls_pred[i] = stage.log_sigma_tree.predict(x[i]);
        }

        // Line search on the stage scale over the full training set;
        // scale 0 (no-op) is always admissible, so the recorded NLL
        // curve is non-increasing.
        static const double kScales[] = {4.0, 2.0, 1.0, 0.5, 0.25, 0.125, 0.0625};
        double best_scale = 0.0;
        double best_nll = floored_nll(mu, log_sigma, y, cfg.sigma_floor);
        for (double s : kScales) {
            const double step = cfg.learning_rate * s;
            for (std::size_t i = 0; i < n; ++i) {
                cand_mu[i] = mu[i] - step * tree_mu_pred[i];
                cand_ls[i] = log_sigma[i] - step * tree_ls_pred[i];
            }
            const double nll = floored_nll(cand_mu, cand_ls, y, cfg.sigma_floor);
            if (nll < best_nll) {
                best_nll = nll;
                best_scale = s;
            }
        }

        stage.scale = best_scale;
        if (best_scale > 0.0) {
            const double step = cfg.learning_rate * best_scale;
            for (std::size_t i = 0; i < n; ++i) {
                mu[i] -= step * tree_mu_pred[i];
                log_sigma[i] -= step * tree_ls_pred[i];
            }
            for (std::size_t i = 0; i < x_val.size(); ++i) {
                mu_val[i] -= step * stage.mu_tree.predict(x_val[i]);
                ls_val[i] -= step * stage.log_sigma_tree.predict(x_val[i]);
            }
        }
        model.stages_.push_back(std::move(stage));
        model.train_nll_.push_back(best_nll);

        if (cfg.early_stop_patience > 0 && !x_val.empty()) {
            const double val_nll = floored_nll(mu_val, ls_val, y_val, cfg.sigma_floor);
            if (val_nll < best_val_nll - 1e-9) {
                best_val_nll = val_nll;
                since_best = 0;
            } else if (++since_best >= cfg.early_stop_patience) {
                break;
            }
        }
    }
    return model;
}

GaussianPrediction NgboostModel::predict(const FeatureRow& x) const {
    double mu = mu0_;
    double ls = log_sigma0_;
    for (const auto& stage : stages_) {
        if (stage.scale == 0.0) continue;
        const double step = cfg_.learning_rate * stage.scale;
        mu -= step * stage.mu_tree.predict(x);
        ls -= step * stage.log_sigma_tree.predict(x);
    }
    return {mu, std::max(std::exp(ls), cfg_.sigma_floor)};
}

}  // namespace pecopt
