#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include "pecopt/gpr.hpp"
#include "pecopt/metrics.hpp"
#include "pecopt/ngboost.hpp"
#include "pecopt/regressor.hpp"

using namespace pecopt;

namespace {

FeatureRow row_with_x0(double x0) {
    FeatureRow r{};
    r[0] = x0;
    return r;
}

// 1-D toy y = x + noise embedded in the 9-D feature space.
void make_linear_toy(int n, double noise_std, std::uint64_t seed,
                     std::vector<FeatureRow>& x, std::vector<double>& y) {
    Rng rng(seed);
    x.resize(n);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v = rng.uniform(-2.0, 2.0);
        x[i] = row_with_x0(v);
        for (int j = 1; j < kNumDesignParams; ++j) x[i][j] = rng.uniform(-1.0, 1.0);
        y[i] = v + rng.normal(0.0, noise_std);
    }
}

}  // namespace

TEST_CASE("gaussian natural gradient closed form") {
    SUBCASE("hand cases") {
        auto g = natural_gradient_gaussian(0.0, 1.0, 0.0);
        CHECK(g.d_mu == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g.d_log_sigma == doctest::Approx(0.0).epsilon(1e-12));

        g = natural_gradient_gaussian(2.5, 2.5, -0.7);
        CHECK(g.d_mu == 0.0);
        CHECK(g.d_log_sigma == doctest::Approx(0.5).epsilon(1e-12));

        g = natural_gradient_gaussian(1.0, 0.0, 0.0);  // y = mu + sigma
        CHECK(g.d_mu == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(g.d_log_sigma == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("equals inverse Fisher times the finite-difference NLL gradient") {
        Rng rng(55);
        auto nll = [](double y, double mu, double log_sigma) {
            const double sigma = std::exp(log_sigma);
            const double z = (y - mu) / sigma;
            return log_sigma + 0.5 * z * z;
        };
        const double h = 1e-6;
        for (int t = 0; t < 100; ++t) {
            const double y = rng.uniform(-3.0, 3.0);
            const double mu = rng.uniform(-3.0, 3.0);
            const double ls = rng.uniform(-1.5, 1.5);
            const double sigma = std::exp(ls);

            const double d_mu_fd = (nll(y, mu + h, ls) - nll(y, mu - h, ls)) / (2.0 * h);
            const double d_ls_fd = (nll(y, mu, ls + h) - nll(y, mu, ls - h)) / (2.0 * h);
            // inverse Fisher in (mu, log sigma) is diag(sigma^2, 1/2)
            const double nat_mu = sigma * sigma * d_mu_fd;
            const double nat_ls = 0.5 * d_ls_fd;

            const auto g = natural_gradient_gaussian(y, mu, ls);
            CHECK(std::abs(g.d_mu - nat_mu) < 1e-5);
            CHECK(std::abs(g.d_log_sigma - nat_ls) < 1e-5);
        }
    }

    CHECK_THROWS_AS(natural_gradient_gaussian(0.0, 0.0, std::nan("")), std::invalid_argument);
}

TEST_CASE("regression tree splits and predicts") {
    // y depends only on feature 0 with a step at 0
    Rng rng(9);
    std::vector<FeatureRow> x(200);
    std::vector<double> y(200);
    std::vector<int> rows(200);
    for (int i = 0; i < 200; ++i) {
        x[i] = row_with_x0(rng.uniform(-1.0, 1.0));
        for (int j = 1; j < kNumDesignParams; ++j) x[i][j] = rng.uniform(-1.0, 1.0);
        y[i] = x[i][0] < 0.0 ? -1.0 : 1.0;
        rows[i] = i;
    }
    TreeConfig cfg{4, 5};
    Rng tree_rng(77);
    const auto tree = RegressionTree::fit(x, y, rows, cfg, tree_rng);
    CHECK(tree.depth() <= cfg.max_depth + 1);

    int correct = 0;
    for (int i = 0; i < 200; ++i) {
        if (std::abs(tree.predict(x[i]) - y[i]) < 0.5) ++correct;
    }
    CHECK(correct >= 190);

    CHECK_THROWS_AS(RegressionTree::fit(x, y, {}, cfg, tree_rng), std::invalid_argument);
}

TEST_CASE("ngboost fitting") {
    SUBCASE("constant target collapses sigma to the floor") {
        std::vector<FeatureRow> x(50);
        std::vector<double> y(50, 3.7);
        Rng rng(1);
        for (auto& r : x) {
            for (auto& v : r) v = rng.uniform(-1.0, 1.0);
        }
        NgboostConfig cfg;
        cfg.iterations = 50;
        cfg.seed = 5;
        const auto model = NgboostModel::fit(x, y, cfg);
        const auto p = model.predict(x[0]);
        CHECK(p.mean == doctest::Approx(3.7).epsilon(1e-9));
        CHECK(p.stddev <= cfg.sigma_floor * 10.0);
    }

    SUBCASE("zero iterations predict the marginal MLE") {
        std::vector<FeatureRow> x(20);
        std::vector<double> y(20);
        Rng rng(2);
        for (int i = 0; i < 20; ++i) {
            for (auto& v : x[i]) v = rng.uniform(-1.0, 1.0);
            y[i] = rng.uniform(0.0, 10.0);
        }
        NgboostConfig cfg;
        cfg.iterations = 0;
        const auto model = NgboostModel::fit(x, y, cfg);
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 20.0;
        double var = 0.0;
        for (double v : y) var += (v - mean) * (v - mean);
        var /= 20.0;
        const auto p = model.predict(x[3]);
        CHECK(p.mean == doctest::Approx(mean).epsilon(1e-12));
        CHECK(p.stddev == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
    }

    SUBCASE("linear toy recovers the signal with calibrated intervals") {
        std::vector<FeatureRow> x, xv, xt;
        std::vector<double> y, yv, yt;
        make_linear_toy(2000, 0.1, 33, x, y);
        make_linear_toy(300, 0.1, 35, xv, yv);
        make_linear_toy(500, 0.1, 34, xt, yt);

        NgboostConfig cfg;  // default 500 iterations at lr 0.01
        cfg.seed = 7;
        cfg.early_stop_patience = 20;  // validation NLL plateau
        const auto model = NgboostModel::fit(x, y, cfg, xv, yv);

        // train NLL never increases (within tolerance) at small lr
        const auto& curve = model.train_nll_curve();
        REQUIRE(curve.size() >= 10);
        for (std::size_t i = 1; i < curve.size(); ++i) {
            CHECK(curve[i] <= curve[i - 1] + 1e-6);
        }

        std::vector<GaussianPrediction> preds(xt.size());
        std::vector<double> mus(xt.size());
        for (std::size_t i = 0; i < xt.size(); ++i) {
            preds[i] = model.predict(xt[i]);
            mus[i] = preds[i].mean;
        }
        const auto pm = pointwise_metrics(yt, mus);
        CHECK(pm.rmse <= 0.15);
        const auto prm = probabilistic_metrics(preds, yt, 0.95);
        CHECK(prm.picp >= 0.90);
        CHECK(prm.picp <= 0.98);
    }

    SUBCASE("prediction replays the stored stage recurrence") {
        std::vector<FeatureRow> x;
        std::vector<double> y;
        make_linear_toy(200, 0.2, 44, x, y);
        NgboostConfig cfg;
        cfg.iterations = 20;
        cfg.seed = 3;
        const auto model = NgboostModel::fit(x, y, cfg);

        const FeatureRow q = row_with_x0(0.5);
        double mu = model.initial_mu();
        double ls = model.initial_log_sigma();
        for (const auto& st : model.stages()) {
            if (st.scale == 0.0) continue;
            mu -= cfg.learning_rate * st.scale * st.mu_tree.predict(q);
            ls -= cfg.learning_rate * st.scale * st.log_sigma_tree.predict(q);
        }
        const auto p = model.predict(q);
        CHECK(p.mean == mu);
        CHECK(p.stddev == std::max(std::exp(ls), cfg.sigma_floor));
        CHECK(p.stddev >= cfg.sigma_floor);
    }

    SUBCASE("too few rows is a domain error") {
        std::vector<FeatureRow> x(5);
        std::vector<double> y(5, 1.0);
        CHECK_THROWS_AS(NgboostModel::fit(x, y, {}), std::invalid_argument);
    }
}

TEST_CASE("gpr exact posterior") {
    SUBCASE("single training point interpolates") {
        const std::vector<FeatureRow> x = {row_with_x0(0.0)};
        const std::vector<double> y = {1.7};
        const GprKernelParams kernel{1.0, 1.0, 1e-8};
        const auto m = GprModel::fit(x, y, kernel);
        const auto p = m.predict(x[0]);
        CHECK(p.mean == doctest::Approx(1.7).epsilon(1e-6));
        CHECK(p.stddev * p.stddev < 1e-6);
    }

    SUBCASE("far from data the prior takes over") {
        std::vector<FeatureRow> x;
        std::vector<double> y;
        Rng rng(21);
        for (int i = 0; i < 30; ++i) {
            FeatureRow r{};
            for (auto& v : r) v = rng.uniform(-1.0, 1.0);
            x.push_back(r);
            y.push_back(rng.uniform(-2.0, 2.0));
        }
        const GprKernelParams kernel{1.5, 0.8, 1e-6};
        const auto m = GprModel::fit(x, y, kernel);
        FeatureRow q{};
        q.fill(50.0);  // distance >> lengthscale
        const auto p = m.predict(q);
        CHECK(std::abs(p.mean) < 1e-9);
        CHECK(p.stddev * p.stddev == doctest::Approx(1.5).epsilon(1e-9));
    }

    SUBCASE("matches the dense-inverse oracle on 50 points") {
        Rng rng(77);
        const int n = 50;
        std::vector<FeatureRow> x(n);
        std::vector<double> y(n);
        for (int i = 0; i < n; ++i) {
            for (auto& v : x[i]) v = rng.uniform(-2.0, 2.0);
            y[i] = rng.normal(0.0, 1.0);
        }
        const GprKernelParams kernel{1.3, 1.7, 0.01};
        GprFitConfig fit_cfg;
        const auto m = GprModel::fit(x, y, kernel, fit_cfg);

        // brute-force route: Gauss-Jordan inverse of K + (noise+jitter) I
        auto k_fn = [&](const FeatureRow& a, const FeatureRow& b) {
            double s = 0.0;
            for (int j = 0; j < kNumDesignParams; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
            return kernel.signal_var * std::exp(-0.5 * s / (kernel.lengthscale * kernel.lengthscale));
        };
        std::vector<std::vector<double>> a(n, std::vector<double>(2 * n, 0.0));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) a[i][j] = k_fn(x[i], x[j]);
            a[i][i] += kernel.noise_var + fit_cfg.jitter_start;
            a[i][n + i] = 1.0;
        }
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r) {
                if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
            }
            std::swap(a[piv], a[col]);
            const double d = a[col][col];
            for (int c = 0; c < 2 * n; ++c) a[col][c] /= d;
            for (int r = 0; r < n; ++r) {
                if (r == col) continue;
                const double f = a[r][col];
                for (int c = 0; c < 2 * n; ++c) a[r][c] -= f * a[col][c];
            }
        }

        for (int t = 0; t < 20; ++t) {
            FeatureRow q{};
            for (auto& v : q) v = rng.uniform(-2.0, 2.0);
            std::vector<double> kstar(n);
            for (int i = 0; i < n; ++i) kstar[i] = k_fn(x[i], q);

            double mean = 0.0, reduce = 0.0;
            for (int i = 0; i < n; ++i) {
                double kinv_y = 0.0, kinv_k = 0.0;
                for (int j = 0; j < n; ++j) {
                    kinv_y += a[i][n + j] * y[j];
                    kinv_k += a[i][n + j] * kstar[j];
                }
                mean += kstar[i] * kinv_y;
                reduce += kstar[i] * kinv_k;
            }
            const double var = std::max(kernel.signal_var - reduce, 0.0);

            const auto p = m.predict(q);
            CHECK(std::abs(p.mean - mean) < 1e-8);
            CHECK(std::abs(p.stddev * p.stddev - var) < 1e-8);
        }
    }

    SUBCASE("posterior variance bounded by the prior") {
        Rng rng(5);
        std::vector<FeatureRow> x(40);
        std::vector<double> y(40);
        for (int i = 0; i < 40; ++i) {
            for (auto& v : x[i]) v = rng.uniform(-2.0, 2.0);
            y[i] = rng.normal(0.0, 1.0);
        }
        const GprKernelParams kernel{2.0, 1.0, 1e-4};
        const auto m = GprModel::fit(x, y, kernel);
        for (int t = 0; t < 200; ++t) {
            FeatureRow q{};
            for (auto& v : q) v = rng.uniform(-4.0, 4.0);
            const auto p = m.predict(q);
            CHECK(p.stddev * p.stddev >= 0.0);
            CHECK(p.stddev * p.stddev <= kernel.signal_var + kernel.noise_var + 1e-9);
        }
    }

    SUBCASE("subsample cap keeps the training size bounded") {
        Rng rng(6);
        std::vector<FeatureRow> x(300);
        std::vector<double> y(300);
        for (int i = 0; i < 300; ++i) {
            for (auto& v : x[i]) v = rng.uniform(-1.0, 1.0);
            y[i] = rng.normal(0.0, 1.0);
        }
        GprFitConfig cfg;
        cfg.subsample_cap = 100;
        const auto m = GprModel::fit(x, y, {}, cfg);
        CHECK(m.training_size() == 100);
    }
}

TEST_CASE("mc dropout prediction") {
    NetworkSpec spec;
    spec.input_size = 9;
    spec.layers = {{16, Activation::relu, 0.1}, {2, Activation::identity, 0.0}};
    spec.loss = LossKind::squared_error;
    const Network net(spec, 88);
    const std::vector<double> x(9, 0.5);

    SUBCASE("zero dropout gives a deterministic answer") {
        NetworkSpec dspec = spec;
        dspec.layers[0].dropout = 0.0;
        const Network dnet(dspec, 88);
        const auto preds = mc_predict(dnet, x, 50, 1);
        const auto ref = dnet.forward(x);
        CHECK(preds[0].stddev == 0.0);
        CHECK(preds[1].stddev == 0.0);
        CHECK(preds[0].mean == doctest::Approx(ref[0]).epsilon(1e-12));
    }

    SUBCASE("fixed seed reproduces (mean, std)") {
        const auto a = mc_predict(net, x, 100, 42);
        const auto b = mc_predict(net, x, 100, 42);
        CHECK(a[0].mean == b[0].mean);
        CHECK(a[0].stddev == b[0].stddev);
        CHECK(a[1].mean == b[1].mean);
        CHECK(a[1].stddev == b[1].stddev);
    }

    SUBCASE("std estimate stabilizes with pass count") {
        const auto coarse = mc_predict(net, x, 10000, 9);
        const auto fine = mc_predict(net, x, 100000, 9);
        REQUIRE(fine[0].stddev > 0.0);
        CHECK(std::abs(coarse[0].stddev - fine[0].stddev) / fine[0].stddev < 0.05);
    }

    CHECK_THROWS_AS(mc_predict(net, x, 1, 0), std::invalid_argument);
}

TEST_CASE("regressor wrappers round-trip through their files") {
    const auto bounds = ParameterBounds::defaults();
    const Dataset rows = generate_dataset(400, bounds, 52);
    const auto tmp = std::filesystem::temp_directory_path();

    SUBCASE("ngboost") {
        NgboostConfig cfg;
        cfg.iterations = 30;
        cfg.seed = 4;
        const auto reg = NgboostRegressor::train(rows, cfg);
        const auto path = (tmp / "pecopt_ngb.bin").string();
        reg.save(path);
        const auto loaded = NgboostRegressor::load(path);
        const auto d = rows[7].x;
        const auto a = reg.predict(d);
        const auto b = loaded.predict(d);
        CHECK(a.efficiency.mean == b.efficiency.mean);
        CHECK(a.efficiency.stddev == b.efficiency.stddev);
        CHECK(a.temperature.mean == b.temperature.mean);
        CHECK(a.temperature.stddev == b.temperature.stddev);
        CHECK(load_regressor(path)->kind() == "ngboost");
        std::filesystem::remove(path);
    }

    SUBCASE("gpr") {
        GprRegressorConfig cfg;
        cfg.grid_search = false;
        cfg.kernel = {1.0, 2.0, 1e-4};
        cfg.fit.subsample_cap = 150;
        const auto reg = GprRegressor::train(rows, cfg);
        const auto path = (tmp / "pecopt_gpr.bin").string();
        reg.save(path);
        const auto loaded = GprRegressor::load(path);
        const auto d = rows[3].x;
        const auto a = reg.predict(d);
        const auto b = loaded.predict(d);
        CHECK(a.efficiency.mean == b.efficiency.mean);
        CHECK(a.temperature.stddev == b.temperature.stddev);
        CHECK(load_regressor(path)->kind() == "gpr");
        std::filesystem::remove(path);
    }

    SUBCASE("mcdropout") {
        McDropoutConfig cfg;
        cfg.epochs = 5;
        cfg.passes = 40;
        cfg.seed = 11;
        const auto reg = McDropoutRegressor::train(rows, cfg);
        const auto path = (tmp / "pecopt_mcd.bin").string();
        reg.save(path);
        const auto loaded = McDropoutRegressor::load(path);
        const auto d = rows[9].x;
        const auto a = reg.predict(d);
        const auto b = loaded.predict(d);
        CHECK(a.efficiency.mean == b.efficiency.mean);
        CHECK(a.efficiency.stddev == b.efficiency.stddev);
        // repeated queries of one design agree (keyed dropout streams)
        const auto c = loaded.predict(d);
        CHECK(b.efficiency.mean == c.efficiency.mean);
        CHECK(load_regressor(path)->kind() == "mcdropout");
        std::filesystem::remove(path);
    }
}
