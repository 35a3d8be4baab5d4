#include "pecopt/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pecopt/rng.hpp"

namespace pecopt {

namespace {

double sq_dist(const FeatureRow& a, const FeatureRow& b) {
    double s = 0.0;
    for (int j = 0; j < kNumDesignParams; ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

double rbf(double sqd, const GprKernelParams& k) {
    return k.signal_var * std::exp(-0.5 * sqd / (k.lengthscale * k.lengthscale));
}

/// In-place lower Cholesky of a row-major symmetric matrix; returns false
/// on a non-positive pivot.
bool cholesky_inplace(std::vector<double>& a, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double* rowj = a.data() + j * n;
        double d = rowj[j];
        for (std::size_t k = 0; k < j; ++k) d -= rowj[k] * rowj[k];
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        rowj[j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double* rowi = a.data() + i * n;
            double s = rowi[j];
            for (std::size_t k = 0; k < j; ++k) s -= rowi[k] * rowj[k];
            rowi[j] = s / ljj;
        }
    }
    // zero the strict upper triangle for cleanliness
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
    }
    return true;
}

void solve_lower(const std::vector<double>& l, std::size_t n, std::vector<double>& b) {
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        const double* row = l.data() + i * n;
        for (std::size_t k = 0; k < i; ++k) s -= row[k] * b[k];
        b[i] = s / row[i];
    }
}

void solve_upper_transposed(const std::vector<double>& l, std::size_t n, std::vector<double>& b) {
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * b[k];
        b[i] = s / l[i * n + i];
    }
}

}  // namespace

GprModel GprModel::fit(const std::vector<FeatureRow>& x, const std::vector<double>& y,
                       const GprKernelParams& kernel, const GprFitConfig& cfg) {
    if (x.size() != y.size() || x.empty()) {
        throw std::invalid_argument("GprModel::fit: bad training data");
    }

    GprModel model;
    model.kernel_ = kernel;

    std::vector<double> yy;
    if (x.size() > static_cast<std::size_t>(cfg.subsample_cap)) {
        std::vector<int> idx(x.size());
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng(derive_seed(cfg.seed, 0x69b5));
        rng.shuffle(idx);
        idx.resize(static_cast<std::size_t>(cfg.subsample_cap));
        model.x_.reserve(idx.size());
        yy.reserve(idx.size());
        for (int i : idx) {
            model.x_.push_back(x[static_cast<std::size_t>(i)]);
            yy.push_back(y[static_cast<std::size_t>(i)]);
        }
    } else {
        model.x_ = x;
        yy = y;
    }

    const std::size_t n = model.x_.size();
    std::vector<double> base(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        base[i * n + i] = kernel.signal_var;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = rbf(sq_dist(model.x_[i], model.x_[j]), kernel);
            base[i * n + j] = v;
            base[j * n + i] = v;
        }
    }

    bool ok = false;
    for (double jitter = cfg.jitter_start; jitter <= cfg.jitter_max * (1.0 + 1e-12);
         jitter *= 10.0) {
        model.chol_ = base;
        for (std::size_t i = 0; i < n; ++i) {
            model.chol_[i * n + i] += kernel.noise_var + jitter;
        }
        if (cholesky_inplace(model.chol_, n)) {
            ok = true;
            break;
        }
    }
    if (!ok) {
        throw std::runtime_error("GprModel::fit: Cholesky failed after jitter escalation");
    }

    model.y_ = yy;
    model.alpha_ = yy;
    solve_lower(model.chol_, n, model.alpha_);

    // log marginal likelihood uses ||L^-1 y||^2 = y^T K^-1 y
    double quad = 0.0, logdet = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        quad += model.alpha_[i] * model.alpha_[i];
        logdet += std::log(model.chol_[i * n + i]);
    }
    model.lml_ = -0.5 * quad - logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);

    solve_upper_transposed(model.chol_, n, model.alpha_);
    return model;
}

GprModel GprModel::fit_with_grid_search(const std::vector<FeatureRow>& x,
                                        const std::vector<double>& y, const GprFitConfig& cfg) {
    static const double kLengthscales[] = {1.0, 2.0, 4.0, 8.0};
    static const double kSignalVars[] = {0.5, 1.0, 2.0};
    static const double kNoiseVars[] = {1e-6, 1e-4, 1e-2};

    GprKernelParams best;
    double best_lml = -std::numeric_limits<double>::infinity();
    for (double ls : kLengthscales) {
        for (double sv : kSignalVars) {
            for (double nv : kNoiseVars) {
                const GprKernelParams cand{sv, ls, nv};
                const GprModel m = fit(x, y, cand, cfg);
                if (m.log_marginal_likelihood() > best_lml) {
                    best_lml = m.log_marginal_likelihood();
                    best = cand;
                }
            }
        }
    }
    return fit(x, y, best, cfg);
}

GaussianPrediction GprModel::predict(const FeatureRow& q) const {
    const std::size_t n = x_.size();
    std::vector<double> kstar(n);
    for (std::size_t i = 0; i < n; ++i) {
        kstar[i] = rbf(sq_dist(x_[i], q), kernel_);
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += kstar[i] * alpha_[i];

    std::vector<double> v = kstar;
    solve_lower(chol_, n, v);
    double reduction = 0.0;
    for (std::size_t i = 0; i < n; ++i) reduction += v[i] * v[i];
    const double var = std::max(kernel_.signal_var - reduction, 0.0);
    return {mean, std::sqrt(var)};
}

}  // namespace pecopt
