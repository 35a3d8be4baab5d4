#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pecopt/classifier.hpp"
#include "pecopt/fitness.hpp"
#include "pecopt/optimizers.hpp"
#include "pecopt/regressor.hpp"

namespace pecopt {

enum class RegressorKind { ngboost, gpr, mcdropout };

/// One configuration drives the whole pipeline; defaults mirror the
/// documented experimental settings (150-epoch classifier at lr 0.001,
/// 500 boosting iterations, the Table-style optimizer hyperparameters).
struct PipelineConfig {
    int version = 1;
    std::string out_dir = "out";
    std::uint64_t seed = 42;

    std::size_t dataset_n = 30000;
    ParameterBounds bounds = ParameterBounds::defaults();
    DeviceConstants device;

    SplitSpec split;  // test fraction, k folds; seed is the run seed

    ClassifierConfig classifier;
    LogisticConfig logistic;

    RegressorKind regressor_kind = RegressorKind::ngboost;
    NgboostConfig ngboost;
    GprRegressorConfig gpr;
    McDropoutConfig mcdropout;

    FitnessConfig fitness;

    std::vector<Algorithm> algorithms = {Algorithm::ga, Algorithm::pso, Algorithm::sa,
                                         Algorithm::tabu, Algorithm::shc};
    long budget_evals = 2000;  // equal-evaluation-budget comparison mode
    std::vector<std::uint64_t> optimizer_seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    /// Parse from JSON text; absent keys keep their defaults, unknown
    /// keys are rejected, version must match.
    static PipelineConfig from_json_text(const std::string& text);
    static PipelineConfig load(const std::string& path);
    std::string to_json_text() const;

    void validate() const;

    // derived paths
    std::string dataset_csv() const { return out_dir + "/dataset.csv"; }
    std::string models_dir() const { return out_dir + "/models"; }
    std::string reports_dir() const { return out_dir + "/reports"; }
    std::string curves_dir() const { return out_dir + "/curves"; }
    std::string optimize_dir() const { return out_dir + "/optimize"; }
    std::string classifier_path() const { return models_dir() + "/classifier.bin"; }
    std::string logistic_path() const { return models_dir() + "/logistic.bin"; }
    std::string regressor_path() const { return models_dir() + "/regressor.bin"; }
};

/// generate: dataset CSV plus a summary JSON (row count, feasible
/// fraction, per-column stats).
void cmd_generate(const PipelineConfig& cfg);

/// train: fit classifier, logistic baseline and the configured regressor
/// on the training split; write model files and learning-curve CSVs.
void cmd_train(const PipelineConfig& cfg);

/// evaluate: held-out metric reports (classification, regression),
/// 5-fold CV table, calibration and interval-width CSVs.
void cmd_evaluate(const PipelineConfig& cfg);

/// optimize: run the configured algorithms over the surrogate fitness,
/// write the comparison table, per-run traces and the best-design report
/// (including a ground-truth re-simulation of the winner).
void cmd_optimize(const PipelineConfig& cfg);

/// report: consolidated human-readable summary of everything in out_dir.
void cmd_report(const PipelineConfig& cfg, std::ostream& os);

}  // namespace pecopt
