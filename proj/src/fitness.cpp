#include "pecopt/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pecopt {

void FitnessConfig::validate() const {
    if (!(penalty_factor >= 0.0)) {
        throw std::invalid_argument("FitnessConfig: penalty_factor must be >= 0");
    }
    if (!(interval_level > 0.0 && interval_level < 1.0)) {
        throw std::invalid_argument("FitnessConfig: interval_level must lie in (0,1)");
    }
    if (!(goal_temperature >= 0.0 && goal_temperature <= 125.0)) {
        throw std::invalid_argument("FitnessConfig: goal_temperature must lie in [0,125] degC");
    }
}

FitnessContext::FitnessContext(const FeasibilityModel* classifier,
                               const SurrogateRegressor* regressor, ParameterBounds bounds,
                               FitnessConfig cfg)
    : classifier_(classifier), regressor_(regressor), bounds_(std::move(bounds)),
      cfg_(cfg) {
    cfg_.validate();
    bounds_.validate();
    if (classifier_ == nullptr || regressor_ == nullptr) {
        throw std::invalid_argument("FitnessContext: classifier and regressor required");
    }
}

FitnessValue FitnessContext::evaluate(const DesignPoint& candidate) const {
    if (!bounds_.contains(candidate)) {
        throw std::invalid_argument("evaluate_fitness: candidate outside parameter bounds");
    }

    FitnessValue fv;
    fv.p_infeasible = 1.0 - classifier_->predict_proba(candidate);
    fv.predictions = regressor_->predict(candidate);

    double y1, y2;
    if (cfg_.mode == FitnessMode::deterministic) {
        y1 = fv.predictions.efficiency.mean;
        y2 = fv.predictions.temperature.mean;
    } else {
        const auto genes = candidate.as_array();
        Rng rng(derive_seed(cfg_.seed,
                            hash_doubles(std::span<const double>(genes.data(), genes.size()))));
        const auto iv_eff = prediction_interval(fv.predictions.efficiency, cfg_.interval_level);
        const auto iv_temp = prediction_interval(fv.predictions.temperature, cfg_.interval_level);
        y1 = rng.uniform(iv_eff.lower, iv_eff.upper);
        y2 = rng.uniform(iv_temp.lower, iv_temp.upper);
    }

    // scale efficiency to percent; it is physically bounded, temperature
    // error stays meaningful beyond limits
    fv.y1_percent = std::clamp(y1 * 100.0, 0.0, 100.0);
    fv.y2_celsius = y2;

    const double de = 100.0 - fv.y1_percent;
    const double dt = cfg_.goal_temperature - fv.y2_celsius;
    fv.efficiency_term = cfg_.objective == ObjectiveKind::temperature_only ? 0.0 : de * de;
    fv.temperature_term = cfg_.objective == ObjectiveKind::efficiency_only ? 0.0 : dt * dt;

    if (cfg_.penalty == PenaltyKind::soft) {
        fv.penalty_term = cfg_.penalty_factor * fv.p_infeasible;
    } else {
        fv.penalty_term = fv.p_infeasible > 0.5 ? cfg_.penalty_factor : 0.0;
    }

    fv.total = fv.efficiency_term + fv.temperature_term + fv.penalty_term;
    return fv;
}

std::vector<FitnessValue> FitnessContext::evaluate_batch(
    std::span<const DesignPoint> candidates) const {
    std::vector<FitnessValue> out(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        out[i] = evaluate(candidates[i]);
    }
    return out;
}

ObjectiveFn make_surrogate_objective(const FitnessContext& ctx) {
    return [&ctx](const GeneVector& genes) {
        const FitnessValue fv = ctx.evaluate(DesignPoint::from_array(genes));
        return ObjectiveValue{fv.total, fv.predictions.efficiency.mean,
                              fv.predictions.temperature.mean};
    };
}

}  // namespace pecopt
