#include "pecopt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pecopt/metrics.hpp"

namespace pecopt {

using ordered_json = nlohmann::ordered_json;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

void write_json_file(const std::string& path, const ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

void check_keys(const ordered_json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw std::invalid_argument("config: unknown key \"" + key + "\" in " + where);
        }
    }
}

Algorithm algorithm_from_name(const std::string& name) {
    for (Algorithm a : {Algorithm::ga, Algorithm::pso, Algorithm::sa, Algorithm::tabu,
                        Algorithm::shc, Algorithm::random_search}) {
        if (algorithm_name(a) == name) return a;
    }
    throw std::invalid_argument("config: unknown algorithm \"" + name + "\"");
}

RegressorKind regressor_kind_from_name(const std::string& name) {
    if (name == "ngboost") return RegressorKind::ngboost;
    if (name == "gpr") return RegressorKind::gpr;
    if (name == "mcdropout") return RegressorKind::mcdropout;
    throw std::invalid_argument("config: unknown regressor kind \"" + name + "\"");
}

std::string regressor_kind_name(RegressorKind k) {
    switch (k) {
        case RegressorKind::ngboost: return "ngboost";
        case RegressorKind::gpr: return "gpr";
        case RegressorKind::mcdropout: return "mcdropout";
    }
    return "?";
}

// Stage seeds all derive from the master seed so one --seed flag pins the
// whole pipeline.
void apply_master_seed(PipelineConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    cfg.split.seed = derive_seed(seed, 101);
    cfg.classifier.seed = derive_seed(seed, 102);
    cfg.logistic.seed = derive_seed(seed, 103);
    cfg.ngboost.seed = derive_seed(seed, 104);
    cfg.gpr.fit.seed = derive_seed(seed, 105);
    cfg.mcdropout.seed = derive_seed(seed, 106);
    cfg.fitness.seed = derive_seed(seed, 107);
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }

    PipelineConfig cfg;
    check_keys(j,
               {"version", "out_dir", "seed", "dataset", "split", "classifier", "logistic",
                "regressor", "fitness", "optimize"},
               "top level");

    if (j.contains("version") && j["version"].get<int>() != cfg.version) {
        throw std::invalid_argument("config: unsupported version");
    }
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    std::uint64_t master = cfg.seed;
    if (j.contains("seed")) master = j["seed"].get<std::uint64_t>();

    if (j.contains("dataset")) {
        const auto& d = j["dataset"];
        check_keys(d, {"n", "bounds"}, "dataset");
        if (d.contains("n")) cfg.dataset_n = d["n"].get<std::size_t>();
        if (d.contains("bounds")) {
            const auto& b = d["bounds"];
            check_keys(b, {"lower", "upper"}, "dataset.bounds");
            const auto lower = b.at("lower").get<std::vector<double>>();
            const auto upper = b.at("upper").get<std::vector<double>>();
            if (lower.size() != kNumDesignParams || upper.size() != kNumDesignParams) {
                throw std::invalid_argument("config: bounds need exactly 9 entries");
            }
            std::copy(lower.begin(), lower.end(), cfg.bounds.lower.begin());
            std::copy(upper.begin(), upper.end(), cfg.bounds.upper.begin());
        }
    }

    if (j.contains("split")) {
        const auto& s = j["split"];
        check_keys(s, {"test_fraction", "kfold"}, "split");
        if (s.contains("test_fraction")) cfg.split.test_fraction = s["test_fraction"].get<double>();
        if (s.contains("kfold")) cfg.split.kfold = s["kfold"].get<int>();
    }

    if (j.contains("classifier")) {
        const auto& c = j["classifier"];
        check_keys(c, {"epochs", "learning_rate", "hidden", "batch_size", "val_fraction"},
                   "classifier");
        if (c.contains("epochs")) cfg.classifier.epochs = c["epochs"].get<int>();
        if (c.contains("learning_rate"))
            cfg.classifier.learning_rate = c["learning_rate"].get<double>();
        if (c.contains("hidden")) cfg.classifier.hidden = c["hidden"].get<std::vector<int>>();
        if (c.contains("batch_size")) cfg.classifier.batch_size = c["batch_size"].get<int>();
        if (c.contains("val_fraction"))
            cfg.classifier.val_fraction = c["val_fraction"].get<double>();
    }

    if (j.contains("logistic")) {
        const auto& c = j["logistic"];
        check_keys(c, {"epochs", "learning_rate"}, "logistic");
        if (c.contains("epochs")) cfg.logistic.epochs = c["epochs"].get<int>();
        if (c.contains("learning_rate"))
            cfg.logistic.learning_rate = c["learning_rate"].get<double>();
    }

    if (j.contains("regressor")) {
        const auto& r = j["regressor"];
        check_keys(r, {"kind", "ngboost", "gpr", "mcdropout"}, "regressor");
        if (r.contains("kind"))
            cfg.regressor_kind = regressor_kind_from_name(r["kind"].get<std::string>());
        if (r.contains("ngboost")) {
            const auto& n = r["ngboost"];
            check_keys(n,
                       {"iterations", "learning_rate", "max_depth", "min_leaf", "subsample",
                        "sigma_floor", "early_stop_patience"},
                       "regressor.ngboost");
            if (n.contains("iterations")) cfg.ngboost.iterations = n["iterations"].get<int>();
            if (n.contains("learning_rate"))
                cfg.ngboost.learning_rate = n["learning_rate"].get<double>();
            if (n.contains("max_depth")) cfg.ngboost.max_depth = n["max_depth"].get<int>();
            if (n.contains("min_leaf")) cfg.ngboost.min_leaf = n["min_leaf"].get<int>();
            if (n.contains("subsample")) cfg.ngboost.subsample = n["subsample"].get<double>();
            if (n.contains("sigma_floor")) cfg.ngboost.sigma_floor = n["sigma_floor"].get<double>();
            if (n.contains("early_stop_patience"))
                cfg.ngboost.early_stop_patience = n["early_stop_patience"].get<int>();
        }
        if (r.contains("gpr")) {
            const auto& g = r["gpr"];
            check_keys(g, {"subsample_cap", "grid_search", "signal_var", "lengthscale",
                           "noise_var"},
                       "regressor.gpr");
            if (g.contains("subsample_cap"))
                cfg.gpr.fit.subsample_cap = g["subsample_cap"].get<int>();
            if (g.contains("grid_search")) cfg.gpr.grid_search = g["grid_search"].get<bool>();
            if (g.contains("signal_var")) cfg.gpr.kernel.signal_var = g["signal_var"].get<double>();
            if (g.contains("lengthscale"))
                cfg.gpr.kernel.lengthscale = g["lengthscale"].get<double>();
            if (g.contains("noise_var")) cfg.gpr.kernel.noise_var = g["noise_var"].get<double>();
        }
        if (r.contains("mcdropout")) {
            const auto& m = r["mcdropout"];
            check_keys(m, {"epochs", "learning_rate", "hidden", "dropout", "batch_size", "passes"},
                       "regressor.mcdropout");
            if (m.contains("epochs")) cfg.mcdropout.epochs = m["epochs"].get<int>();
            if (m.contains("learning_rate"))
                cfg.mcdropout.learning_rate = m["learning_rate"].get<double>();
            if (m.contains("hidden")) cfg.mcdropout.hidden = m["hidden"].get<std::vector<int>>();
            if (m.contains("dropout")) cfg.mcdropout.dropout = m["dropout"].get<double>();
            if (m.contains("batch_size")) cfg.mcdropout.batch_size = m["batch_size"].get<int>();
            if (m.contains("passes")) cfg.mcdropout.passes = m["passes"].get<int>();
        }
    }

    if (j.contains("fitness")) {
        const auto& f = j["fitness"];
        check_keys(f,
                   {"goal_temperature", "penalty_factor", "interval_level", "mode", "penalty",
                    "objective"},
                   "fitness");
        if (f.contains("goal_temperature"))
            cfg.fitness.goal_temperature = f["goal_temperature"].get<double>();
        if (f.contains("penalty_factor"))
            cfg.fitness.penalty_factor = f["penalty_factor"].get<double>();
        if (f.contains("interval_level"))
            cfg.fitness.interval_level = f["interval_level"].get<double>();
        if (f.contains("mode")) {
            const auto mode = f["mode"].get<std::string>();
            if (mode == "stochastic") cfg.fitness.mode = FitnessMode::stochastic;
            else if (mode == "deterministic") cfg.fitness.mode = FitnessMode::deterministic;
            else throw std::invalid_argument("config: fitness.mode must be stochastic|deterministic");
        }
        if (f.contains("penalty")) {
            const auto p = f["penalty"].get<std::string>();
            if (p == "soft") cfg.fitness.penalty = PenaltyKind::soft;
            else if (p == "hard") cfg.fitness.penalty = PenaltyKind::hard;
            else throw std::invalid_argument("config: fitness.penalty must be soft|hard");
        }
        if (f.contains("objective")) {
            const auto o = f["objective"].get<std::string>();
            if (o == "multi") cfg.fitness.objective = ObjectiveKind::multi;
            else if (o == "efficiency") cfg.fitness.objective = ObjectiveKind::efficiency_only;
            else if (o == "temperature") cfg.fitness.objective = ObjectiveKind::temperature_only;
            else throw std::invalid_argument(
                "config: fitness.objective must be multi|efficiency|temperature");
        }
    }

    if (j.contains("optimize")) {
        const auto& o = j["optimize"];
        check_keys(o, {"algorithms", "budget_evals", "seeds"}, "optimize");
        if (o.contains("algorithms")) {
            cfg.algorithms.clear();
            for (const auto& name : o["algorithms"]) {
                cfg.algorithms.push_back(algorithm_from_name(name.get<std::string>()));
            }
        }
        if (o.contains("budget_evals")) cfg.budget_evals = o["budget_evals"].get<long>();
        if (o.contains("seeds"))
            cfg.optimizer_seeds = o["seeds"].get<std::vector<std::uint64_t>>();
    }

    apply_master_seed(cfg, master);
    cfg.validate();
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("config file not found: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string PipelineConfig::to_json_text() const {
    ordered_json j;
    j["version"] = version;
    j["out_dir"] = out_dir;
    j["seed"] = seed;
    j["dataset"] = {{"n", dataset_n},
                    {"bounds",
                     {{"lower", std::vector<double>(bounds.lower.begin(), bounds.lower.end())},
                      {"upper", std::vector<double>(bounds.upper.begin(), bounds.upper.end())}}}};
    j["split"] = {{"test_fraction", split.test_fraction}, {"kfold", split.kfold}};
    j["classifier"] = {{"epochs", classifier.epochs},
                       {"learning_rate", classifier.learning_rate},
                       {"hidden", classifier.hidden},
                       {"batch_size", classifier.batch_size},
                       {"val_fraction", classifier.val_fraction}};
    j["logistic"] = {{"epochs", logistic.epochs}, {"learning_rate", logistic.learning_rate}};
    j["regressor"] = {{"kind", regressor_kind_name(regressor_kind)},
                      {"ngboost",
                       {{"iterations", ngboost.iterations},
                        {"learning_rate", ngboost.learning_rate},
                        {"max_depth", ngboost.max_depth},
                        {"min_leaf", ngboost.min_leaf},
                        {"subsample", ngboost.subsample},
                        {"sigma_floor", ngboost.sigma_floor},
                        {"early_stop_patience", ngboost.early_stop_patience}}},
                      {"gpr",
                       {{"subsample_cap", gpr.fit.subsample_cap},
                        {"grid_search", gpr.grid_search},
                        {"signal_var", gpr.kernel.signal_var},
                        {"lengthscale", gpr.kernel.lengthscale},
                        {"noise_var", gpr.kernel.noise_var}}},
                      {"mcdropout",
                       {{"epochs", mcdropout.epochs},
                        {"learning_rate", mcdropout.learning_rate},
                        {"hidden", mcdropout.hidden},
                        {"dropout", mcdropout.dropout},
                        {"batch_size", mcdropout.batch_size},
                        {"passes", mcdropout.passes}}}};
    j["fitness"] = {{"goal_temperature", fitness.goal_temperature},
                    {"penalty_factor", fitness.penalty_factor},
                    {"interval_level", fitness.interval_level},
                    {"mode", fitness.mode == FitnessMode::stochastic ? "stochastic"
                                                                     : "deterministic"},
                    {"penalty", fitness.penalty == PenaltyKind::soft ? "soft" : "hard"},
                    {"objective", fitness.objective == ObjectiveKind::multi ? "multi"
                                  : fitness.objective == ObjectiveKind::efficiency_only
                                      ? "efficiency"
                                      : "temperature"}};
    std::vector<std::string> alg_names;
    for (Algorithm a : algorithms) alg_names.push_back(algorithm_name(a));
    j["optimize"] = {{"algorithms", alg_names},
                     {"budget_evals", budget_evals},
                     {"seeds", optimizer_seeds}};
    return j.dump(2) + "\n";
}

void PipelineConfig::validate() const {
    if (dataset_n < 1) {
        throw std::invalid_argument("config: dataset.n must be >= 1");
    }
    bounds.validate();
    if (!(split.test_fraction > 0.0 && split.test_fraction < 1.0)) {
        throw std::invalid_argument("config: split.test_fraction must lie in (0,1)");
    }
    if (split.kfold < 2) {
        throw std::invalid_argument("config: split.kfold must be >= 2");
    }
    if (classifier.epochs < 1 || logistic.epochs < 1) {
        throw std::invalid_argument("config: epochs must be >= 1");
    }
    fitness.validate();
    if (algorithms.empty()) {
        throw std::invalid_argument("config: optimize.algorithms must not be empty");
    }
    if (optimizer_seeds.empty()) {
        throw std::invalid_argument("config: optimize.seeds must not be empty");
    }
}

// --- generate -------------------------------------------------------------

void cmd_generate(const PipelineConfig& cfg) {
    cfg.validate();
    const Dataset rows = generate_dataset(cfg.dataset_n, cfg.bounds, cfg.seed, cfg.device);

    ensure_dir(cfg.out_dir);
    save_csv(cfg.dataset_csv(), rows);

    long feasible = 0;
    std::array<double, kNumColumns> mn{}, mx{}, mean{}, m2{};
    mn.fill(std::numeric_limits<double>::infinity());
    mx.fill(-std::numeric_limits<double>::infinity());
    double count = 0.0;
    for (const auto& r : rows) {
        if (r.feasible) ++feasible;
        const auto c = r.columns();
        count += 1.0;
        for (int k = 0; k < kNumColumns; ++k) {
            mn[k] = std::min(mn[k], c[k]);
            mx[k] = std::max(mx[k], c[k]);
            const double d = c[k] - mean[k];
            mean[k] += d / count;
            m2[k] += d * (c[k] - mean[k]);
        }
    }

    static const char* kColNames[kNumColumns] = {"x1", "x2", "x3", "x4", "x5", "x6",
                                                 "x7", "x8", "x9", "y1", "y2"};
    ordered_json stats;
    for (int k = 0; k < kNumColumns; ++k) {
        stats[kColNames[k]] = {{"min", mn[k]},
                               {"max", mx[k]},
                               {"mean", mean[k]},
                               {"std", std::sqrt(m2[k] / count)}};
    }
    ordered_json j;
    j["rows"] = rows.size();
    j["feasible"] = feasible;
    j["feasible_fraction"] = static_cast<double>(feasible) / static_cast<double>(rows.size());
    j["columns"] = stats;
    write_json_file(cfg.out_dir + "/dataset_summary.json", j);
}

// --- train ------------------------------------------------------------------

namespace {

Dataset load_dataset_or_fail(const PipelineConfig& cfg) {
    if (!std::filesystem::exists(cfg.dataset_csv())) {
        throw std::runtime_error("dataset not found at " + cfg.dataset_csv() +
                                 " (run the generate command first)");
    }
    return load_csv(cfg.dataset_csv());
}

std::pair<Dataset, Dataset> split_dataset(const PipelineConfig& cfg, const Dataset& rows) {
    const auto [train_idx, test_idx] =
        train_test_split(rows.size(), cfg.split.test_fraction, cfg.split.seed);
    return {select_rows(rows, train_idx), select_rows(rows, test_idx)};
}

void write_epoch_curve_csv(const std::string& path, const std::vector<EpochStats>& hist) {
    std::string buf = "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
    char line[256];
    for (std::size_t e = 0; e < hist.size(); ++e) {
        std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g\n", e + 1,
                      hist[e].train_loss, hist[e].train_accuracy, hist[e].val_loss,
                      hist[e].val_accuracy);
        buf += line;
    }
    write_text_file(path, buf);
}

}  // namespace

void cmd_train(const PipelineConfig& cfg) {
    cfg.validate();
    const Dataset rows = load_dataset_or_fail(cfg);
    const auto [train_rows, test_rows] = split_dataset(cfg, rows);

    ensure_dir(cfg.models_dir());
    ensure_dir(cfg.curves_dir());

    const auto clf = FeasibilityClassifier::train(train_rows, cfg.classifier);
    clf.save(cfg.classifier_path());
    write_epoch_curve_csv(cfg.curves_dir() + "/classifier_curve.csv", clf.history());

    const auto logit = FeasibilityClassifier::train_logistic(train_rows, cfg.logistic);
    logit.save(cfg.logistic_path());
    write_epoch_curve_csv(cfg.curves_dir() + "/logistic_curve.csv", logit.history());

    switch (cfg.regressor_kind) {
        case RegressorKind::ngboost: {
            const auto reg = NgboostRegressor::train(train_rows, cfg.ngboost);
            reg.save(cfg.regressor_path());
            const auto& eff = reg.efficiency_model().train_nll_curve();
            const auto& temp = reg.temperature_model().train_nll_curve();
            std::string buf = "iteration,efficiency_train_nll,temperature_train_nll\n";
            char line[128];
            const std::size_t n = std::min(eff.size(), temp.size());
            for (std::size_t i = 0; i < n; ++i) {
                std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", i + 1, eff[i], temp[i]);
                buf += line;
            }
            write_text_file(cfg.curves_dir() + "/ngboost_curve.csv", buf);
            break;
        }
        case RegressorKind::gpr: {
            const auto reg = GprRegressor::train(train_rows, cfg.gpr);
            reg.save(cfg.regressor_path());
            break;
        }
        case RegressorKind::mcdropout: {
            const auto reg = McDropoutRegressor::train(train_rows, cfg.mcdropout);
            reg.save(cfg.regressor_path());
            break;
        }
    }
}

// --- evaluate -----------------------------------------------------------------

namespace {

ordered_json classification_report_json(const ClassificationReport& r) {
    ordered_json j;
    j["bce"] = r.bce;
    j["accuracy"] = r.accuracy;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["auc_pr"] = r.auc_pr;
    j["confusion"] = {{"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn}};
    return j;
}

ClassificationReport score_classifier(const FeasibilityClassifier& clf, const Dataset& rows) {
    std::vector<double> probs(rows.size());
    std::vector<int> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        probs[i] = clf.predict_proba(rows[i].x);
        labels[i] = rows[i].feasible ? 1 : 0;
    }
    return classification_metrics(probs, labels);
}

ordered_json regression_target_json(const PointwiseMetrics& pm, const ProbabilisticMetrics& prm) {
    ordered_json j;
    j["rmse"] = pm.rmse;
    j["mae"] = pm.mae;
    j["mape"] = pm.mape;
    j["mape_skipped"] = pm.mape_skipped;
    j["r2"] = pm.r2;
    j["picp"] = prm.picp;
    j["mpiw"] = prm.mpiw;
    j["crps"] = prm.crps;
    j["nll"] = prm.nll;
    return j;
}

void write_calibration_csv(const std::string& path, const CalibrationCurve& c) {
    std::string buf = "nominal,observed\n";
    char line[80];
    for (std::size_t i = 0; i < c.nominal.size(); ++i) {
        std::snprintf(line, sizeof(line), "%.17g,%.17g\n", c.nominal[i], c.observed[i]);
        buf += line;
    }
    write_text_file(path, buf);
}

void write_hiw_csv(const std::string& path, const WidthHistogram& h) {
    std::string buf = "bin_lower,bin_upper,count\n";
    char line[100];
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%ld\n", h.edges[b], h.edges[b + 1],
                      h.counts[b]);
        buf += line;
    }
    write_text_file(path, buf);
}

}  // namespace

void cmd_evaluate(const PipelineConfig& cfg) {
    cfg.validate();
    const Dataset rows = load_dataset_or_fail(cfg);
    const auto [train_rows, test_rows] = split_dataset(cfg, rows);

    if (!std::filesystem::exists(cfg.classifier_path()) ||
        !std::filesystem::exists(cfg.regressor_path())) {
        throw std::runtime_error("models not found under " + cfg.models_dir() +
                                 " (run the train command first)");
    }

    ensure_dir(cfg.reports_dir());

    const auto clf = FeasibilityClassifier::load(cfg.classifier_path());
    write_json_file(cfg.reports_dir() + "/classification_report.json",
                    classification_report_json(score_classifier(clf, test_rows)));

    if (std::filesystem::exists(cfg.logistic_path())) {
        const auto logit = FeasibilityClassifier::load(cfg.logistic_path());
        write_json_file(cfg.reports_dir() + "/logistic_report.json",
                        classification_report_json(score_classifier(logit, test_rows)));
    }

    {
        ClassifierConfig cv_cfg = cfg.classifier;
        cv_cfg.seed = derive_seed(cfg.seed, 110);
        const CvReport cv = cross_validate(rows, cfg.split.kfold, cv_cfg);
        ordered_json folds = ordered_json::array();
        for (std::size_t f = 0; f < cv.folds.size(); ++f) {
            folds.push_back({{"fold", f + 1},
                             {"bce", cv.folds[f].bce},
                             {"accuracy", cv.folds[f].accuracy}});
        }
        ordered_json j;
        j["folds"] = folds;
        j["avg"] = {{"bce", cv.mean.bce}, {"accuracy", cv.mean.accuracy}};
        j["best"] = {{"bce", cv.best.bce}, {"accuracy", cv.best.accuracy}};
        write_json_file(cfg.reports_dir() + "/classification_cv.json", j);
    }

    // regression metrics on the feasible held-out rows (the regressor is
    // trained on feasible designs only)
    const auto reg = load_regressor(cfg.regressor_path());
    const Dataset feas_test = feasible_rows(test_rows);
    if (feas_test.size() >= 2) {
        std::vector<GaussianPrediction> pred_eff(feas_test.size()), pred_temp(feas_test.size());
        std::vector<double> y_eff(feas_test.size()), y_temp(feas_test.size());
        std::vector<double> mu_eff(feas_test.size()), mu_temp(feas_test.size());
        for (std::size_t i = 0; i < feas_test.size(); ++i) {
            const auto p = reg->predict(feas_test[i].x);
            pred_eff[i] = p.efficiency;
            pred_temp[i] = p.temperature;
            mu_eff[i] = p.efficiency.mean;
            mu_temp[i] = p.temperature.mean;
            y_eff[i] = feas_test[i].efficiency;
            y_temp[i] = feas_test[i].temperature;
        }
        const auto pm_eff = pointwise_metrics(y_eff, mu_eff);
        const auto pm_temp = pointwise_metrics(y_temp, mu_temp);
        const auto pr_eff = probabilistic_metrics(pred_eff, y_eff, cfg.fitness.interval_level);
        const auto pr_temp = probabilistic_metrics(pred_temp, y_temp, cfg.fitness.interval_level);

        ordered_json j;
        j["model"] = reg->kind();
        j["test_rows"] = feas_test.size();
        j["efficiency"] = regression_target_json(pm_eff, pr_eff);
        j["temperature"] = regression_target_json(pm_temp, pr_temp);
        j["nll_mean"] = 0.5 * (pr_eff.nll + pr_temp.nll);
        write_json_file(cfg.reports_dir() + "/regression_report.json", j);

        std::vector<double> grid;
        for (int g = 1; g <= 19; ++g) grid.push_back(0.05 * g);
        grid.push_back(0.99);
        write_calibration_csv(cfg.reports_dir() + "/calibration_efficiency.csv",
                              calibration_curve(pred_eff, y_eff, grid));
        write_calibration_csv(cfg.reports_dir() + "/calibration_temperature.csv",
                              calibration_curve(pred_temp, y_temp, grid));
        write_hiw_csv(cfg.reports_dir() + "/hiw_efficiency.csv",
                      interval_width_histogram(pred_eff, cfg.fitness.interval_level, 30));
        write_hiw_csv(cfg.reports_dir() + "/hiw_temperature.csv",
                      interval_width_histogram(pred_temp, cfg.fitness.interval_level, 30));
    }
}

// --- optimize --------------------------------------------------------------------

void cmd_optimize(const PipelineConfig& cfg) {
    cfg.validate();
    if (!std::filesystem::exists(cfg.classifier_path()) ||
        !std::filesystem::exists(cfg.regressor_path())) {
        throw std::runtime_error("models not found under " + cfg.models_dir() +
                                 " (run the train command first)");
    }
    const auto clf = FeasibilityClassifier::load(cfg.classifier_path());
    const auto reg = load_regressor(cfg.regressor_path());

    const FitnessContext ctx(&clf, reg.get(), cfg.bounds, cfg.fitness);
    const ObjectiveFn objective = make_surrogate_objective(ctx);

    std::vector<OptimizerConfig> configs;
    for (Algorithm a : cfg.algorithms) {
        OptimizerConfig oc;
        oc.kind = a;
        oc.budget_evals = cfg.budget_evals;
        configs.push_back(oc);
    }
    const ComparisonReport report =
        run_comparison(objective, cfg.bounds, configs, cfg.optimizer_seeds);

    ensure_dir(cfg.optimize_dir());
    ensure_dir(cfg.optimize_dir() + "/traces");

    ordered_json rows_json = ordered_json::array();
    for (const auto& row : report.rows) {
        rows_json.push_back({{"algorithm", row.algorithm},
                             {"median_best_fitness", row.median_best_fitness},
                             {"best_best_fitness", row.best_best_fitness},
                             {"median_eff_mu", row.median_eff_mu},
                             {"median_temp_mu", row.median_temp_mu},
                             {"evaluations", row.evaluations},
                             {"median_wall_seconds", row.median_wall_seconds}});
    }
    ordered_json runs_json = ordered_json::array();
    const OptimizationResult* best_run = nullptr;
    for (const auto& algo_runs : report.runs) {
        for (const auto& r : algo_runs) {
            runs_json.push_back({{"algorithm", r.algorithm},
                                 {"seed", r.seed},
                                 {"best_fitness", r.best_fitness},
                                 {"best_eff_mu", r.best_eff_mu},
                                 {"best_temp_mu", r.best_temp_mu},
                                 {"evaluations", r.evaluations},
                                 {"wall_seconds", r.wall_seconds},
                                 {"design", std::vector<double>(r.best_genes.begin(),
                                                                r.best_genes.end())}});
            if (best_run == nullptr || r.best_fitness < best_run->best_fitness) {
                best_run = &r;
            }
            write_trace_csv(cfg.optimize_dir() + "/traces/" + r.algorithm + "_seed" +
                                std::to_string(r.seed) + ".csv",
                            r);
        }
    }
    ordered_json cmp;
    cmp["budget_evals"] = cfg.budget_evals;
    cmp["seeds"] = cfg.optimizer_seeds;
    cmp["rows"] = rows_json;
    cmp["runs"] = runs_json;
    write_json_file(cfg.optimize_dir() + "/comparison.json", cmp);

    // close the loop: re-simulate the winner through the ground-truth model
    const DesignPoint best_design = DesignPoint::from_array(best_run->best_genes);
    const FitnessValue fv = ctx.evaluate(best_design);
    const SimulationResult sim = evaluate_design(best_design, cfg.bounds, cfg.device);

    ordered_json bj;
    bj["algorithm"] = best_run->algorithm;
    bj["seed"] = best_run->seed;
    bj["fitness"] = best_run->best_fitness;
    {
        static const char* kXNames[kNumDesignParams] = {"x1", "x2", "x3", "x4", "x5",
                                                        "x6", "x7", "x8", "x9"};
        ordered_json d;
        const auto genes = best_design.as_array();
        for (int i = 0; i < kNumDesignParams; ++i) d[kXNames[i]] = genes[i];
        bj["design"] = d;
    }
    bj["predicted"] = {{"efficiency",
                        {{"mean", fv.predictions.efficiency.mean},
                         {"std", fv.predictions.efficiency.stddev}}},
                       {"temperature",
                        {{"mean", fv.predictions.temperature.mean},
                         {"std", fv.predictions.temperature.stddev}}}};
    bj["classifier"] = {{"p_feasible", 1.0 - fv.p_infeasible},
                        {"p_infeasible", fv.p_infeasible}};
    bj["simulated"] = {{"efficiency", sim.efficiency},
                       {"temperature", sim.temperature},
                       {"converged", sim.converged}};
    bj["feasible_by_rule"] = label_feasibility(sim.efficiency, sim.temperature);
    write_json_file(cfg.optimize_dir() + "/best_design.json", bj);
}

// --- report ---------------------------------------------------------------------

namespace {

ordered_json read_json_if_exists(const std::string& path) {
    if (!std::filesystem::exists(path)) return ordered_json();
    std::ifstream in(path);
    ordered_json j;
    in >> j;
    return j;
}

}  // namespace

void cmd_report(const PipelineConfig& cfg, std::ostream& os) {
    const auto summary = read_json_if_exists(cfg.out_dir + "/dataset_summary.json");
    if (!summary.is_null()) {
        os << "dataset: " << summary["rows"] << " rows, feasible fraction "
           << summary["feasible_fraction"] << "\n";
    }
    const auto clf = read_json_if_exists(cfg.reports_dir() + "/classification_report.json");
    if (!clf.is_null()) {
        os << "classifier (test): accuracy " << clf["accuracy"] << ", bce " << clf["bce"]
           << ", f1 " << clf["f1"] << ", auc_pr " << clf["auc_pr"] << "\n";
    }
    const auto logit = read_json_if_exists(cfg.reports_dir() + "/logistic_report.json");
    if (!logit.is_null()) {
        os << "logistic  (test): accuracy " << logit["accuracy"] << ", bce " << logit["bce"]
           << "\n";
    }
    const auto cv = read_json_if_exists(cfg.reports_dir() + "/classification_cv.json");
    if (!cv.is_null()) {
        os << "classifier " << cv["folds"].size() << "-fold CV: avg accuracy "
           << cv["avg"]["accuracy"] << ", avg bce " << cv["avg"]["bce"] << "\n";
    }
    const auto rr = read_json_if_exists(cfg.reports_dir() + "/regression_report.json");
    if (!rr.is_null()) {
        os << "regressor (" << rr["model"].get<std::string>() << "):\n";
        for (const char* target : {"efficiency", "temperature"}) {
            const auto& t = rr[target];
            os << "  " << target << ": rmse " << t["rmse"] << ", r2 " << t["r2"] << ", picp "
               << t["picp"] << ", mpiw " << t["mpiw"] << ", crps " << t["crps"] << "\n";
        }
    }
    const auto cmp = read_json_if_exists(cfg.optimize_dir() + "/comparison.json");
    if (!cmp.is_null()) {
        os << "optimization (" << cmp["seeds"].size() << " seeds, budget "
           << cmp["budget_evals"] << " evals):\n";
        for (const auto& row : cmp["rows"]) {
            os << "  " << row["algorithm"].get<std::string>() << ": median fitness "
               << row["median_best_fitness"] << ", best " << row["best_best_fitness"]
               << ", median eff " << row["median_eff_mu"] << ", median temp "
               << row["median_temp_mu"] << "\n";
        }
    }
    const auto best = read_json_if_exists(cfg.optimize_dir() + "/best_design.json");
    if (!best.is_null()) {
        os << "best design (" << best["algorithm"].get<std::string>() << ", seed "
           << best["seed"] << "): fitness " << best["fitness"] << ", predicted eff "
           << best["predicted"]["efficiency"]["mean"] << ", simulated eff "
           << best["simulated"]["efficiency"] << ", simulated temp "
           << best["simulated"]["temperature"] << ", feasible "
           << (best["feasible_by_rule"].get<bool>() ? "yes" : "no") << "\n";
    }
}

}  // namespace pecopt
