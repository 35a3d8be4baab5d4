#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "pecopt/converter.hpp"

namespace pecopt {

using GeneVector = std::array<double, kNumDesignParams>;

/// Objective sample: the scalar to minimize plus, when the objective is
/// the surrogate fitness, the predicted mean efficiency/temperature of
/// the candidate (NaN otherwise).
struct ObjectiveValue {
    double fitness = 0.0;
    double eff_mu = std::numeric_limits<double>::quiet_NaN();
    double temp_mu = std::numeric_limits<double>::quiet_NaN();
};

using ObjectiveFn = std::function<ObjectiveValue(const GeneVector&)>;

/// Project each gene into its bounds. Idempotent.
GeneVector clamp(GeneVector genes, const ParameterBounds& bounds);

/// Inverse fitness-proportional (roulette) selection weights, normalized
/// to sum 1. Falls back to 1/(f - f_min + 1 + eps) when any fitness is
/// non-positive.
std::vector<double> roulette_weights(const std::vector<double>& fitness, double eps = 1e-9);

/// Single-point recombination at cut k in [1, n-1]: children swap the
/// tails [k, n).
std::pair<GeneVector, GeneVector> single_point_crossover(const GeneVector& a, const GeneVector& b,
                                                         int k);

/// One-dimension velocity update: w*v + c1*r1*(pbest-x) + c2*r2*(gbest-x).
double pso_velocity(double v, double w, double c1, double c2, double r1, double r2,
                    double pbest_dx, double gbest_dx);

/// Boltzmann acceptance probability exp(-dE/T) for uphill moves, 1 for
/// dE <= 0.
double sa_acceptance(double delta_e, double temperature);

enum class Algorithm { ga, pso, sa, tabu, shc, random_search };

std::string algorithm_name(Algorithm a);

struct OptimizerConfig {
    Algorithm kind = Algorithm::ga;
    int iterations = 100;  // generations for GA
    std::uint64_t seed = 0;

    // GA (Table-5 defaults)
    int population = 20;
    double crossover_rate = 0.4;
    double mutation_rate = 0.3;
    double mutation_alpha_frac = 0.05;  // alpha = frac * gene range

    // PSO
    int swarm = 20;
    double inertia = 0.1;
    double cognitive = 1.0;
    double social = 0.2;

    // SA
    double t0 = 100.0;
    double cooling = 0.9;

    // shared neighborhood scale for SA/TS/SHC
    double step_frac = 0.1;  // per-gene Gaussian std = frac * range

    // Tabu search
    int tabu_len = 20;
    int neighborhood = 20;
    double tabu_radius = 0.05;  // normalized coordinates

    // SHC
    double p_worse = 0.05;

    /// When > 0, the run consumes exactly this many objective requests
    /// (cache hits included) instead of the iteration count.
    long budget_evals = 0;
};

struct IterationTrace {
    double best_fitness;  // best-so-far
    double best_eff_mu;
    double best_temp_mu;
    GeneVector best_genes;
};

struct OptimizationResult {
    std::string algorithm;
    GeneVector best_genes{};
    double best_fitness = 0.0;
    double best_eff_mu = 0.0;
    double best_temp_mu = 0.0;
    std::vector<IterationTrace> trace;  // non-increasing best_fitness
    long evaluations = 0;               // objective requests, cache hits included
    long tabu_overrides = 0;            // tabu: forced moves with no admissible neighbor
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
};

OptimizationResult ga(const ObjectiveFn& objective, const ParameterBounds& bounds,
                      const OptimizerConfig& cfg);
OptimizationResult pso(const ObjectiveFn& objective, const ParameterBounds& bounds,
                       const OptimizerConfig& cfg);
OptimizationResult sa(const ObjectiveFn& objective, const ParameterBounds& bounds,
                      const OptimizerConfig& cfg);
OptimizationResult tabu(const ObjectiveFn& objective, const ParameterBounds& bounds,
                        const OptimizerConfig& cfg);
OptimizationResult shc(const ObjectiveFn& objective, const ParameterBounds& bounds,
                       const OptimizerConfig& cfg);
OptimizationResult random_search(const ObjectiveFn& objective, const ParameterBounds& bounds,
                                 const OptimizerConfig& cfg);

OptimizationResult run_optimizer(const ObjectiveFn& objective, const ParameterBounds& bounds,
                                 const OptimizerConfig& cfg);

struct ComparisonRow {
    std::string algorithm;
    double median_best_fitness = 0.0;
    double best_best_fitness = 0.0;
    double median_eff_mu = 0.0;
    double median_temp_mu = 0.0;
    double median_wall_seconds = 0.0;
    long evaluations = 0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;                    // one per algorithm
    std::vector<std::vector<OptimizationResult>> runs;  // [algorithm][seed]
};

/// Run every config over every seed (config seeds are overridden by the
/// entries of `seeds`) and aggregate medians/bests per algorithm.
ComparisonReport run_comparison(const ObjectiveFn& objective, const ParameterBounds& bounds,
                                const std::vector<OptimizerConfig>& configs,
                                const std::vector<std::uint64_t>& seeds);

/// Per-run trace CSV: iteration,best_fitness,best_eff_mu,best_temp_mu,x1..x9.
void write_trace_csv(const std::string& path, const OptimizationResult& result);

/// Sum of squared genes; the standard sanity objective for the search
/// algorithms.
ObjectiveFn make_sphere_objective();

}  // namespace pecopt
