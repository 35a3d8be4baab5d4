#include "pecopt/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "pecopt/rng.hpp"

namespace pecopt {

GeneVector clamp(GeneVector genes, const ParameterBounds& bounds) {
    for (int i = 0; i < kNumDesignParams; ++i) {
        genes[i] = std::clamp(genes[i], bounds.lower[i], bounds.upper[i]);
    }
    return genes;
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::ga: return "ga";
        case Algorithm::pso: return "pso";
        case Algorithm::sa: return "sa";
        case Algorithm::tabu: return "tabu";
        case Algorithm::shc: return "shc";
        case Algorithm::random_search: return "random_search";
    }
    return "?";
}

std::vector<double> roulette_weights(const std::vector<double>& fitness, double eps) {
    double fmin = fitness.front();
    for (double f : fitness) fmin = std::min(fmin, f);
    std::vector<double> w(fitness.size());
    double total = 0.0;
    for (std::size_t i = 0; i < fitness.size(); ++i) {
        w[i] = fmin > 0.0 ? 1.0 / (fitness[i] + eps) : 1.0 / (fitness[i] - fmin + 1.0 + eps);
        total += w[i];
    }
    for (auto& v : w) v /= total;
    return w;
}

std::pair<GeneVector, GeneVector> single_point_crossover(const GeneVector& a, const GeneVector& b,
                                                         int k) {
    if (k < 1 || k >= kNumDesignParams) {
        throw std::invalid_argument("single_point_crossover: cut must lie in [1, n-1]");
    }
    GeneVector ca = a, cb = b;
    for (int j = k; j < kNumDesignParams; ++j) std::swap(ca[j], cb[j]);
    return {ca, cb};
}

double pso_velocity(double v, double w, double c1, double c2, double r1, double r2,
                    double pbest_dx, double gbest_dx) {
    return w * v + c1 * r1 * pbest_dx + c2 * r2 * gbest_dx;
}

double sa_acceptance(double delta_e, double temperature) {
    return delta_e <= 0.0 ? 1.0 : std::exp(-delta_e / temperature);
}

namespace {

/// Within-run fitness cache keyed by the candidate's content hash;
/// requested evaluations (cache hits included) are the budget unit.
class CachingEvaluator {
public:
    explicit CachingEvaluator(const ObjectiveFn& fn) : fn_(fn) {}

    ObjectiveValue operator()(const GeneVector& g) {
        ++requested_;
        const std::uint64_t key = hash_doubles(std::span<const double>(g.data(), g.size()));
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const ObjectiveValue v = fn_(g);
        cache_.emplace(key, v);
        return v;
    }

    long requested() const { return requested_; }

private:
    const ObjectiveFn& fn_;
    std::unordered_map<std::uint64_t, ObjectiveValue> cache_;
    long requested_ = 0;
};

GeneVector random_point(const ParameterBounds& b, Rng& rng) {
    GeneVector g;
    for (int i = 0; i < kNumDesignParams; ++i) {
        g[i] = rng.uniform(b.lower[i], b.upper[i]);
    }
    return g;
}

GeneVector gaussian_neighbor(const GeneVector& g, const ParameterBounds& b, double step_frac,
                             Rng& rng) {
    GeneVector out;
    for (int i = 0; i < kNumDesignParams; ++i) {
        out[i] = g[i] + rng.normal() * step_frac * (b.upper[i] - b.lower[i]);
    }
    return clamp(out, b);
}

struct BestTracker {
    double fitness = std::numeric_limits<double>::infinity();
    GeneVector genes{};
    ObjectiveValue value{};

    bool offer(const GeneVector& g, const ObjectiveValue& v) {
        if (v.fitness < fitness) {
            fitness = v.fitness;
            genes = g;
            value = v;
            return true;
        }
        return false;
    }
};

class RunRecorder {
public:
    explicit RunRecorder(Algorithm kind, std::uint64_t seed)
        : start_(std::chrono::steady_clock::now()) {
        result_.algorithm = algorithm_name(kind);
        result_.seed = seed;
    }

    void record_iteration(const BestTracker& best) {
        result_.trace.push_back(
            {best.fitness, best.value.eff_mu, best.value.temp_mu, best.genes});
    }

    OptimizationResult finish(const BestTracker& best, const CachingEvaluator& eval,
                              long tabu_overrides = 0) {
        result_.best_genes = best.genes;
        result_.best_fitness = best.fitness;
        result_.best_eff_mu = best.value.eff_mu;
        result_.best_temp_mu = best.value.temp_mu;
        result_.evaluations = eval.requested();
        result_.tabu_overrides = tabu_overrides;
        result_.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        return std::move(result_);
    }

private:
    OptimizationResult result_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

OptimizationResult ga(const ObjectiveFn& objective, const ParameterBounds& bounds,
                      const OptimizerConfig& cfg) {
    if (cfg.population < 2) {
        throw std::invalid_argument("ga: population must be >= 2");
    }
    bounds.validate();
    CachingEvaluator eval(objective);
    RunRecorder rec(Algorithm::ga, cfg.seed);
    Rng rng(derive_seed(cfg.seed, 0x6a));

    const int pop_n = cfg.population;
    const long generations =
        cfg.budget_evals > 0 ? std::max<long>(1, cfg.budget_evals / pop_n) : cfg.iterations;
    constexpr double kEps = 1e-9;

    std::vector<GeneVector> pop(pop_n);
    for (auto& c : pop) c = random_point(bounds, rng);

    BestTracker best;
    std::vector<ObjectiveValue> fit(pop_n);
    std::vector<double> weights(pop_n), cumulative(pop_n);

    for (long gen = 0; gen < generations; ++gen) {
        int gen_best = 0;
        for (int i = 0; i < pop_n; ++i) {
            fit[i] = eval(pop[i]);
            if (fit[i].fitness < fit[gen_best].fitness) gen_best = i;
        }
        best.offer(pop[gen_best], fit[gen_best]);
        rec.record_iteration(best);
        if (gen + 1 == generations) break;

        std::vector<double> raw_fit(pop_n);
        for (int i = 0; i < pop_n; ++i) raw_fit[i] = fit[i].fitness;
        weights = roulette_weights(raw_fit, kEps);
        double total = 0.0;
        for (int i = 0; i < pop_n; ++i) {
            total += weights[i];
            cumulative[i] = total;
        }
        auto pick = [&]() -> const GeneVector& {
            const double u = rng.uniform(0.0, total);
            const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
            const auto idx = std::min<std::size_t>(it - cumulative.begin(), pop_n - 1);
            return pop[idx];
        };

        std::vector<GeneVector> next;
        next.reserve(pop_n);
        while (static_cast<int>(next.size()) < pop_n) {
            GeneVector a = pick();
            GeneVector b = pick();
            if (rng.uniform() < cfg.crossover_rate) {
                const int k = rng.uniform_int(1, kNumDesignParams - 1);
                std::tie(a, b) = single_point_crossover(a, b, k);
            }
            for (GeneVector* child : {&a, &b}) {
                for (int j = 0; j < kNumDesignParams; ++j) {
                    if (rng.uniform() < cfg.mutation_rate) {
                        const double alpha =
                            cfg.mutation_alpha_frac * (bounds.upper[j] - bounds.lower[j]);
                        (*child)[j] += rng.bernoulli(0.5) ? alpha : -alpha;
                    }
                }
                *child = clamp(*child, bounds);
                if (static_cast<int>(next.size()) < pop_n) next.push_back(*child);
            }
        }

        // elitism: the generation best replaces a random individual
        next[static_cast<std::size_t>(rng.uniform_int(0, pop_n - 1))] = pop[gen_best];
        pop = std::move(next);
    }
    return rec.finish(best, eval);
}

OptimizationResult pso(const ObjectiveFn& objective, const ParameterBounds& bounds,
                       const OptimizerConfig& cfg) {
    if (cfg.swarm < 2) {
        throw std::invalid_argument("pso: swarm must be >= 2");
    }
    bounds.validate();
    CachingEvaluator eval(objective);
    RunRecorder rec(Algorithm::pso, cfg.seed);
    Rng rng(derive_seed(cfg.seed, 0x50));

    const int n = cfg.swarm;
    const long iters =
        cfg.budget_evals > 0 ? std::max<long>(1, cfg.budget_evals / n) : cfg.iterations;

    std::vector<GeneVector> pos(n), vel(n), pbest(n);
    std::vector<double> pbest_fit(n, std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
        pos[i] = random_point(bounds, rng);
        vel[i].fill(0.0);
    }

    BestTracker best;
    for (long it = 0; it < iters; ++it) {
        for (int i = 0; i < n; ++i) {
            const ObjectiveValue v = eval(pos[i]);
            if (v.fitness < pbest_fit[i]) {
                pbest_fit[i] = v.fitness;
                pbest[i] = pos[i];
            }
            best.offer(pos[i], v);
        }
        rec.record_iteration(best);
        if (it + 1 == iters) break;

        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < kNumDesignParams; ++j) {
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                vel[i][j] = pso_velocity(vel[i][j], cfg.inertia, cfg.cognitive, cfg.social, r1,
                                         r2, pbest[i][j] - pos[i][j],
                                         best.genes[j] - pos[i][j]);
                pos[i][j] += vel[i][j];
            }
            pos[i] = clamp(pos[i], bounds);
        }
    }
    return rec.finish(best, eval);
}

OptimizationResult sa(const ObjectiveFn& objective, const ParameterBounds& bounds,
                      const OptimizerConfig& cfg) {
    if (!(cfg.t0 > 0.0) || !(cfg.cooling > 0.0 && cfg.cooling < 1.0)) {
        throw std::invalid_argument("sa: t0 must be > 0 and cooling in (0,1)");
    }
    bounds.validate();
    CachingEvaluator eval(objective);
    RunRecorder rec(Algorithm::sa, cfg.seed);
    Rng rng(derive_seed(cfg.seed, 0x5a));

    const long iters = cfg.budget_evals > 0 ? std::max<long>(1, cfg.budget_evals - 1)
                                            : cfg.iterations;

    GeneVector current = random_point(bounds, rng);
    ObjectiveValue current_v = eval(current);
    BestTracker best;
    best.offer(current, current_v);

    double temperature = cfg.t0;
    for (long it = 0; it < iters; ++it) {
        const GeneVector cand = gaussian_neighbor(current, bounds, cfg.step_frac, rng);
        const ObjectiveValue cand_v = eval(cand);
        const double delta = cand_v.fitness - current_v.fitness;
        if (delta <= 0.0 || rng.uniform() < sa_acceptance(delta, temperature)) {
            current = cand;
            current_v = cand_v;
        }
        best.offer(cand, cand_v);
        temperature *= cfg.cooling;
        rec.record_iteration(best);
    }
    return rec.finish(best, eval);
}

OptimizationResult tabu(const ObjectiveFn& objective, const ParameterBounds& bounds,
                        const OptimizerConfig& cfg) {
    if (cfg.tabu_len < 1 || cfg.neighborhood < 1) {
        throw std::invalid_argument("tabu: tabu_len and neighborhood must be >= 1");
    }
    bounds.validate();
    CachingEvaluator eval(objective);
    RunRecorder rec(Algorithm::tabu, cfg.seed);
    Rng rng(derive_seed(cfg.seed, 0x7a));

    GeneVector current = random_point(bounds, rng);
    ObjectiveValue current_v = eval(current);
    BestTracker best;
    best.offer(current, current_v);

    std::deque<GeneVector> tabu_list;
    tabu_list.push_back(current);

    auto normalized_dist = [&](const GeneVector& a, const GeneVector& b) {
        double s = 0.0;
        for (int j = 0; j < kNumDesignParams; ++j) {
            const double d = (a[j] - b[j]) / (bounds.upper[j] - bounds.lower[j]);
            s += d * d;
        }
        return std::sqrt(s);
    };
    auto is_tabu = [&](const GeneVector& g) {
        for (const auto& t : tabu_list) {
            if (normalized_dist(g, t) < cfg.tabu_radius) return true;
        }
        return false;
    };

    long overrides = 0;
    long remaining = cfg.budget_evals > 0 ? cfg.budget_evals - 1
                                          : static_cast<long>(cfg.iterations) * cfg.neighborhood;
    while (remaining > 0) {
        const int n_neighbors = static_cast<int>(std::min<long>(cfg.neighborhood, remaining));
        remaining -= n_neighbors;

        int best_admissible = -1, best_any = -1;
        std::vector<GeneVector> cand(n_neighbors);
        std::vector<ObjectiveValue> cand_v(n_neighbors);
        for (int i = 0; i < n_neighbors; ++i) {
            cand[i] = gaussian_neighbor(current, bounds, cfg.step_frac, rng);
            cand_v[i] = eval(cand[i]);
            if (best_any < 0 || cand_v[i].fitness < cand_v[best_any].fitness) best_any = i;
            // admissible: non-tabu, or tabu but beating the global best
            // (aspiration)
            const bool admissible =
                !is_tabu(cand[i]) || cand_v[i].fitness < best.fitness;
            if (admissible &&
                (best_admissible < 0 || cand_v[i].fitness < cand_v[best_admissible].fitness)) {
                best_admissible = i;
            }
        }

        int chosen = best_admissible;
        if (chosen < 0) {
            chosen = best_any;  // every neighbor tabu and none aspirational
            ++overrides;
        }
        current = cand[chosen];
        current_v = cand_v[chosen];
        best.offer(current, current_v);

        tabu_list.push_back(current);
        while (static_cast<int>(tabu_list.size()) > cfg.tabu_len) tabu_list.pop_front();
        rec.record_iteration(best);
    }
    return rec.finish(best, eval, overrides);
}

OptimizationResult shc(const ObjectiveFn& objective, const ParameterBounds& bounds,
                       const OptimizerConfig& cfg) {
    if (cfg.iterations < 1) {
        throw std::invalid_argument("shc: iterations must be >= 1");
    }
    bounds.validate();
    CachingEvaluator eval(objective);
    RunRecorder rec(Algorithm::shc, cfg.seed);
    Rng rng(derive_seed(cfg.seed, 0x5c));

    const long iters = cfg.budget_evals > 0 ? std::max<long>(1, cfg.budget_evals - 1)
                                            : cfg.iterations;

    GeneVector current = random_point(bounds, rng);
    ObjectiveValue current_v = eval(current);
    BestTracker best;
    best.offer(current, current_v);

    for (long it = 0; it < iters; ++it) {
        const GeneVector cand = gaussian_neighbor(current, bounds, cfg.step_frac, rng);
        const ObjectiveValue cand_v = eval(cand);
        const double delta = cand_v.fitness - current_v.fitness;
        // ties count as improvements; worse moves pass with p_worse
        if (delta <= 0.0 || rng.uniform() < cfg.p_worse) {
            current = cand;
            current_v = cand_v;
        }
        best.offer(cand, cand_v);
        rec.record_iteration(best);
    }
    return rec.finish(best, eval);
}

OptimizationResult random_search(const ObjectiveFn& objective, const ParameterBounds& bounds,
                                 const OptimizerConfig& cfg) {
    bounds.validate();
    CachingEvaluator eval(objective);
    RunRecorder rec(Algorithm::random_search, cfg.seed);
    Rng rng(derive_seed(cfg.seed, 0xfa));

    const long iters = cfg.budget_evals > 0 ? cfg.budget_evals : cfg.iterations;
    BestTracker best;
    for (long it = 0; it < iters; ++it) {
        const GeneVector cand = random_point(bounds, rng);
        best.offer(cand, eval(cand));
        rec.record_iteration(best);
    }
    return rec.finish(best, eval);
}

OptimizationResult run_optimizer(const ObjectiveFn& objective, const ParameterBounds& bounds,
                                 const OptimizerConfig& cfg) {
    switch (cfg.kind) {
        case Algorithm::ga: return ga(objective, bounds, cfg);
        case Algorithm::pso: return pso(objective, bounds, cfg);
        case Algorithm::sa: return sa(objective, bounds, cfg);
        case Algorithm::tabu: return tabu(objective, bounds, cfg);
        case Algorithm::shc: return shc(objective, bounds, cfg);
        case Algorithm::random_search: return random_search(objective, bounds, cfg);
    }
    throw std::invalid_argument("run_optimizer: unknown algorithm");
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ComparisonReport run_comparison(const ObjectiveFn& objective, const ParameterBounds& bounds,
                                const std::vector<OptimizerConfig>& configs,
                                const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) {
        throw std::invalid_argument("run_comparison: at least one seed required");
    }
    ComparisonReport report;
    for (const auto& base_cfg : configs) {
        std::vector<OptimizationResult> runs;
        runs.reserve(seeds.size());
        for (std::uint64_t s : seeds) {
            OptimizerConfig cfg = base_cfg;
            cfg.seed = s;
            runs.push_back(run_optimizer(objective, bounds, cfg));
        }
        ComparisonRow row;
        row.algorithm = algorithm_name(base_cfg.kind);
        std::vector<double> fits, effs, temps, walls;
        for (const auto& r : runs) {
            fits.push_back(r.best_fitness);
            effs.push_back(r.best_eff_mu);
            temps.push_back(r.best_temp_mu);
            walls.push_back(r.wall_seconds);
        }
        row.median_best_fitness = median_of(fits);
        row.best_best_fitness = *std::min_element(fits.begin(), fits.end());
        row.median_eff_mu = median_of(effs);
        row.median_temp_mu = median_of(temps);
        row.median_wall_seconds = median_of(walls);
        row.evaluations = runs.front().evaluations;
        report.rows.push_back(row);
        report.runs.push_back(std::move(runs));
    }
    return report;
}

ObjectiveFn make_sphere_objective() {
    return [](const GeneVector& g) {
        double s = 0.0;
        for (double v : g) s += v * v;
        return ObjectiveValue{s};
    };
}

void write_trace_csv(const std::string& path, const OptimizationResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_trace_csv: cannot open " + path);
    }
    out << "iteration,best_fitness,best_eff_mu,best_temp_mu,"
           "x1,x2,x3,x4,x5,x6,x7,x8,x9\n";
    char buf[40];
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
        const auto& t = result.trace[i];
        out << i + 1;
        std::snprintf(buf, sizeof(buf), ",%.17g", t.best_fitness);
        out << buf;
        std::snprintf(buf, sizeof(buf), ",%.17g", t.best_eff_mu);
        out << buf;
        std::snprintf(buf, sizeof(buf), ",%.17g", t.best_temp_mu);
        out << buf;
        for (double g : t.best_genes) {
            std::snprintf(buf, sizeof(buf), ",%.17g", g);
            out << buf;
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("write_trace_csv: write failed for " + path);
    }
}

}  // namespace pecopt
