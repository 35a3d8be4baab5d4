#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pecopt/classifier.hpp"
#include "pecopt/optimizers.hpp"
#include "pecopt/regressor.hpp"

namespace pecopt {

enum class FitnessMode { stochastic, deterministic };
enum class PenaltyKind { soft, hard };
enum class ObjectiveKind { multi, efficiency_only, temperature_only };

struct FitnessConfig {
    double goal_temperature = 28.0;  // degC, within [0, 125]
    double penalty_factor = 5.0;     // PF
    double interval_level = 0.95;
    FitnessMode mode = FitnessMode::stochastic;
    PenaltyKind penalty = PenaltyKind::soft;
    ObjectiveKind objective = ObjectiveKind::multi;
    std::uint64_t seed = 0;

    void validate() const;
};

struct FitnessValue {
    double total = 0.0;
    double efficiency_term = 0.0;   // (100 - Y1)^2
    double temperature_term = 0.0;  // (t - Y2)^2
    double penalty_term = 0.0;      // PF * P(infeasible) (soft) or step (hard)
    double y1_percent = 0.0;        // sampled efficiency, percent
    double y2_celsius = 0.0;        // sampled temperature
    double p_infeasible = 0.0;      // classifier confidence used
    TargetPredictions predictions;  // physical-unit (mu, sigma) per target
};

/// Multi-objective fitness with soft penalty: the classifier supplies the
/// infeasibility confidence P, the regressor a 95 % interval per target;
/// stochastic mode draws Y1, Y2 uniformly within their bounds (the
/// efficiency draw is scaled to percent and clamped to [0,100]),
/// deterministic mode uses the means. F = (100-Y1)^2 + (t-Y2)^2 + PF*P.
/// Draws are keyed by (seed, candidate hash), so re-evaluating a
/// candidate within one run returns the same value.
class FitnessContext {
public:
    FitnessContext(const FeasibilityModel* classifier, const SurrogateRegressor* regressor,
                   ParameterBounds bounds, FitnessConfig cfg);

    FitnessValue evaluate(const DesignPoint& candidate) const;

    /// Element-wise evaluate with per-candidate derived streams; the
    /// result order matches the input order.
    std::vector<FitnessValue> evaluate_batch(std::span<const DesignPoint> candidates) const;

    const FitnessConfig& config() const { return cfg_; }
    const ParameterBounds& bounds() const { return bounds_; }

private:
    const FeasibilityModel* classifier_;
    const SurrogateRegressor* regressor_;
    ParameterBounds bounds_;
    FitnessConfig cfg_;
};

/// Adapt a fitness context to the optimizer objective signature; the
/// returned samples carry the predicted mean efficiency/temperature for
/// trace output. The context must outlive the objective.
ObjectiveFn make_surrogate_objective(const FitnessContext& ctx);

}  // namespace pecopt
