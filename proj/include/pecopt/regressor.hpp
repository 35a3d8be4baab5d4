#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pecopt/dataset.hpp"
#include "pecopt/gaussian.hpp"
#include "pecopt/gpr.hpp"
#include "pecopt/neural.hpp"
#include "pecopt/ngboost.hpp"

namespace pecopt {

struct TargetPredictions {
    GaussianPrediction efficiency;   // dimensionless
    GaussianPrediction temperature;  // degC
};

/// Probabilistic surrogate mapping a design (physical units) to Gaussian
/// predictive distributions for efficiency and temperature (physical
/// units). Implementations train in standardized space on feasible rows
/// only and inverse-transform predictions on the way out.
class SurrogateRegressor {
public:
    virtual ~SurrogateRegressor() = default;
    virtual TargetPredictions predict(const DesignPoint& d) const = 0;
    virtual std::string kind() const = 0;
    virtual void save(const std::string& path) const = 0;
};

/// Monte Carlo dropout prediction: empirical mean and (population) std of
/// `passes` stochastic forward passes. Network inputs are taken as-is;
/// one prediction per network output.
std::vector<GaussianPrediction> mc_predict(const Network& net, std::span<const double> input,
                                           int passes, std::uint64_t seed);

// --- NGBoost -----------------------------------------------------------------

class NgboostRegressor final : public SurrogateRegressor {
public:
    /// Trains one model per target on the feasible subset of `rows`.
    /// An optional validation fraction supports early stopping.
    static NgboostRegressor train(const Dataset& rows, const NgboostConfig& cfg);

    TargetPredictions predict(const DesignPoint& d) const override;
    std::string kind() const override { return "ngboost"; }
    void save(const std::string& path) const override;
    static NgboostRegressor load(const std::string& path);

    const NgboostModel& efficiency_model() const { return eff_; }
    const NgboostModel& temperature_model() const { return temp_; }
    const ScalerParams& scaler() const { return scaler_; }

private:
    NgboostModel eff_, temp_;
    ScalerParams scaler_;
};

// --- GPR ---------------------------------------------------------------------

struct GprRegressorConfig {
    GprFitConfig fit;
    bool grid_search = true;
    GprKernelParams kernel;  // used when grid_search is false
};

class GprRegressor final : public SurrogateRegressor {
public:
    static GprRegressor train(const Dataset& rows, const GprRegressorConfig& cfg);

    TargetPredictions predict(const DesignPoint& d) const override;
    std::string kind() const override { return "gpr"; }
    void save(const std::string& path) const override;
    static GprRegressor load(const std::string& path);

    const GprModel& efficiency_model() const { return eff_; }
    const GprModel& temperature_model() const { return temp_; }

private:
    GprModel eff_, temp_;
    ScalerParams scaler_;
};

// --- MC dropout --------------------------------------------------------------

struct McDropoutConfig {
    int epochs = 100;
    double learning_rate = 0.001;
    std::vector<int> hidden = {64, 32};
    double dropout = 0.1;
    int batch_size = 128;
    int passes = 100;
    std::uint64_t seed = 0;
};

class McDropoutRegressor final : public SurrogateRegressor {
public:
    static McDropoutRegressor train(const Dataset& rows, const McDropoutConfig& cfg);

    TargetPredictions predict(const DesignPoint& d) const override;
    std::string kind() const override { return "mcdropout"; }
    void save(const std::string& path) const override;
    static McDropoutRegressor load(const std::string& path);

    const Network& network() const { return net_; }
    int passes() const { return passes_; }

private:
    Network net_;
    ScalerParams scaler_;
    int passes_ = 100;
    std::uint64_t seed_ = 0;
};

/// Load any regressor file by sniffing its magic.
std::unique_ptr<SurrogateRegressor> load_regressor(const std::string& path);

}  // namespace pecopt
