#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pecopt/dataset.hpp"
#include "pecopt/neural.hpp"

namespace pecopt {

struct ClassifierConfig {
    int epochs = 150;
    double learning_rate = 0.001;
    std::vector<int> hidden = {64, 32};
    int batch_size = 128;
    double val_fraction = 0.1;  // carved from the training rows for curves
    std::uint64_t seed = 0;
};

struct LogisticConfig {
    int epochs = 300;
    double learning_rate = 0.05;  // full-batch gradient descent on BCE
    std::uint64_t seed = 0;
};

/// Anything that scores a design's probability of being feasible.
class FeasibilityModel {
public:
    virtual ~FeasibilityModel() = default;
    virtual double predict_proba(const DesignPoint& d) const = 0;
};

/// Feasibility classifier over the nine design parameters. Inputs are
/// taken in physical units; the model applies its own scaler (fitted on
/// its training split) internally. Label convention: 1 = feasible.
class FeasibilityClassifier final : public FeasibilityModel {
public:
    enum class Kind { ann, logistic };

    /// ANN path: 9 -> hidden -> 1 sigmoid, BCE loss, Adam.
    static FeasibilityClassifier train(const Dataset& train_rows, const ClassifierConfig& cfg);

    /// Logistic-regression baseline, full-batch gradient descent on BCE.
    static FeasibilityClassifier train_logistic(const Dataset& train_rows,
                                                const LogisticConfig& cfg);

    /// Probability of the FEASIBLE class, in [0,1].
    double predict_proba(const DesignPoint& d) const override;

    /// Hard label at threshold 0.5.
    bool predict(const DesignPoint& d) const { return predict_proba(d) >= 0.5; }

    Kind kind() const { return kind_; }
    const ScalerParams& scaler() const { return scaler_; }
    const std::vector<EpochStats>& history() const { return history_; }

    void save(const std::string& path) const;
    static FeasibilityClassifier load(const std::string& path);

private:
    Kind kind_ = Kind::ann;
    Network net_;                       // ann
    std::vector<double> logit_weights_; // logistic: w[0..8], bias at [9]
    ScalerParams scaler_;
    std::vector<EpochStats> history_;
};

/// One cross-validation fold result (Table-2 shaped report).
struct FoldScore {
    double bce = 0.0;
    double accuracy = 0.0;
};

struct CvReport {
    std::vector<FoldScore> folds;
    FoldScore mean;  // arithmetic mean over folds
    FoldScore best;  // min BCE, max accuracy over folds
};

/// k-fold cross-validation of the ANN classifier; each fold fits its own
/// scaler on the fold's training rows.
CvReport cross_validate(const Dataset& rows, int k, const ClassifierConfig& cfg);

}  // namespace pecopt
