#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ensopt/error.hpp"
#include "ensopt/metrics.hpp"
#include "ensopt/pool.hpp"
#include "ensopt/predictions.hpp"
#include "ensopt/rng.hpp"

namespace ensopt {

struct GAConfig {
    std::size_t population_size = 50;
    std::size_t generations = 100;
    std::size_t tournament_size = 3;
    double crossover_rate = 0.9;
    double mutation_rate_per_gene = 0.2;
    double mutation_sigma = 0.1;
    std::size_t elitism_count = 2;
    std::size_t patience = 20;
    std::uint64_t seed = 0;
    FitnessMetric fitness_metric = FitnessMetric::weighted_f1;

    void validate() const {
        if (elitism_count < 1) throw config_error("elitism-count must be at least 1");
        if (population_size <= elitism_count)
            throw config_error("population-size must exceed elitism-count");
        if (tournament_size < 2) throw config_error("tournament-size must be at least 2");
        if (patience < 1) throw config_error("patience must be at least 1");
        if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
            throw config_error("crossover-rate must lie in [0,1]");
        if (!(mutation_rate_per_gene >= 0.0 && mutation_rate_per_gene <= 1.0))
            throw config_error("mutation-rate must lie in [0,1]");
        if (!(mutation_sigma > 0.0)) throw config_error("mutation-sigma must be positive");
    }
};

// Unnormalized nonnegative weight vector, one gene per model.
struct Genome {
    std::vector<double> raw;
    std::optional<double> fitness;
};

struct GenerationLog {
    std::size_t generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    std::vector<double> best_weights; // normalized
};

struct OptimizationResult {
    std::vector<double> weights; // normalized, pool order
    std::vector<std::string> model_names;
    double dev_fitness = 0.0;
    std::vector<double> single_fitness; // one-hot fitness per model, pool order
    double uniform_fitness = 0.0;
    std::vector<GenerationLog> log;
    GAConfig config;
    std::string method = "ga";
    double grid_step = 0.0;        // grid method only
    std::uint64_t grid_cap = 0;    // grid method only
};

namespace detail {

// Canonical gene order: pool positions ranked by model name. Per-gene
// random draws are consumed in this order, so reordering the model list
// permutes the result instead of changing it.
inline std::vector<std::size_t> canonical_order(const std::vector<std::string>& names) {
    std::vector<std::size_t> order(names.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
    return order;
}

inline void reset_if_degenerate(Genome& g) {
    for (double v : g.raw)
        if (v > 0.0) return;
    const double u = 1.0 / static_cast<double>(g.raw.size());
    for (double& v : g.raw) v = u;
}

} // namespace detail

// Initial population: the M one-hot genomes, the uniform genome, then
// random genomes with genes ~ Uniform(0,1). Seeding one-hots and the
// uniform point makes the final ensemble structurally at least as good
// on dev as the best single model and as plain averaging.
inline std::vector<Genome> seed_population(const GAConfig& config, std::size_t num_models,
                                           const std::vector<std::size_t>& order, Rng& rng) {
    if (config.population_size < num_models + 1)
        throw config_error("population-size must be at least M+1 = " +
                           std::to_string(num_models + 1) + " to seed one-hot and uniform genomes");
    std::vector<Genome> population;
    population.reserve(config.population_size);
    for (std::size_t r = 0; r < num_models; ++r) {
        Genome g{std::vector<double>(num_models, 0.0), std::nullopt};
        g.raw[order[r]] = 1.0;
        population.push_back(std::move(g));
    }
    population.push_back(
        Genome{std::vector<double>(num_models, 1.0 / static_cast<double>(num_models)),
               std::nullopt});
    while (population.size() < config.population_size) {
        Genome g{std::vector<double>(num_models, 0.0), std::nullopt};
        for (std::size_t r = 0; r < num_models; ++r) g.raw[order[r]] = rng.uniform();
        detail::reset_if_degenerate(g);
        population.push_back(std::move(g));
    }
    return population;
}

inline std::vector<Genome> seed_population(const GAConfig& config, std::size_t num_models) {
    Rng rng(config.seed);
    std::vector<std::size_t> identity(num_models);
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    return seed_population(config, num_models, identity, rng);
}

// Dev-split metric of the ensemble the genome encodes.
inline double fitness(const Genome& genome, const ModelPool& pool, const GoldLabels& gold,
                      FitnessMetric metric) {
    const auto weights = EnsembleWeights::normalized(genome.raw);
    return evaluate_metric(metric, gold, argmax_labels(weighted_average(pool, weights)));
}

// Draws k genomes uniformly with replacement and returns the index of the
// fittest; ties break toward the lower population index.
inline std::size_t tournament_select(const std::vector<Genome>& population, std::size_t k,
                                     Rng& rng) {
    if (population.empty()) throw config_error("tournament over empty population");
    std::size_t best = population.size();
    for (std::size_t draw = 0; draw < std::max<std::size_t>(k, 1); ++draw) {
        const std::size_t i = rng.uniform_index(population.size());
        if (best == population.size() || *population[i].fitness > *population[best].fitness ||
            (*population[i].fitness == *population[best].fitness && i < best))
            best = i;
    }
    return best;
}

// Whole-arithmetic crossover: one alpha ~ Uniform(0,1) per child, genes
// stay within [min(a_i,b_i), max(a_i,b_i)] and therefore nonnegative.
inline Genome blend_crossover(const Genome& a, const Genome& b, Rng& rng) {
    if (a.raw.size() != b.raw.size()) throw config_error("crossover dimension mismatch");
    const double alpha = rng.uniform();
    Genome child{std::vector<double>(a.raw.size(), 0.0), std::nullopt};
    for (std::size_t i = 0; i < a.raw.size(); ++i)
        child.raw[i] = alpha * a.raw[i] + (1.0 - alpha) * b.raw[i];
    return child;
}

// Additive Gaussian noise per gene with probability mutation_rate_per_gene,
// clamped at 0; a genome mutated to all-zero resets to uniform. Genes are
// visited in `order` (see canonical_order).
inline Genome gaussian_mutate(const Genome& g, const GAConfig& config,
                              const std::vector<std::size_t>& order, Rng& rng) {
    Genome out{g.raw, std::nullopt};
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (rng.uniform() < config.mutation_rate_per_gene) {
            const std::size_t i = order[r];
            out.raw[i] = std::max(0.0, out.raw[i] + config.mutation_sigma * rng.normal());
        }
    }
    detail::reset_if_degenerate(out);
    return out;
}

inline Genome gaussian_mutate(const Genome& g, const GAConfig& config, Rng& rng) {
    std::vector<std::size_t> identity(g.raw.size());
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    return gaussian_mutate(g, config, identity, rng);
}

namespace detail {

// Fills in missing fitness values. Evaluations are pure, so splitting
// them across threads cannot change any result.
inline void evaluate_population(std::vector<Genome>& population, const ModelPool& pool,
                                const GoldLabels& gold, FitnessMetric metric,
                                std::size_t workers) {
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < population.size(); ++i)
        if (!population[i].fitness) pending.push_back(i);
    if (pending.empty()) return;
    if (workers <= 1 || pending.size() < 2) {
        for (std::size_t i : pending)
            population[i].fitness = fitness(population[i], pool, gold, metric);
        return;
    }
    const std::size_t thread_count = std::min(workers, pending.size());
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) {
        threads.emplace_back([&, t]() {
            for (std::size_t j = t; j < pending.size(); j += thread_count) {
                const std::size_t i = pending[j];
                population[i].fitness = fitness(population[i], pool, gold, metric);
            }
        });
    }
    for (auto& th : threads) th.join();
}

inline std::size_t best_index(const std::vector<Genome>& population) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < population.size(); ++i)
        if (*population[i].fitness > *population[best].fitness) best = i;
    return best;
}

} // namespace detail

// Evolves ensemble weights on the given split. Fully deterministic for a
// fixed config.seed: a single root generator drives every stochastic
// decision sequentially (selection draws, crossover decision and alpha,
// mutation draws, in that order per offspring) before fitness evaluation,
// which may then run on any number of workers.
inline OptimizationResult evolve(const ModelPool& pool, const GoldLabels& gold,
                                 const GAConfig& config, std::size_t workers = 1) {
    config.validate();
    const std::size_t num_models = pool.size();
    const auto names = pool.model_names();
    const auto order = detail::canonical_order(names);

    Rng rng(config.seed);
    std::vector<Genome> population = seed_population(config, num_models, order, rng);
    detail::evaluate_population(population, pool, gold, config.fitness_metric, workers);

    OptimizationResult result;
    result.model_names = names;
    result.config = config;
    result.single_fitness.assign(num_models, 0.0);
    for (std::size_t r = 0; r < num_models; ++r)
        result.single_fitness[order[r]] = *population[r].fitness;
    result.uniform_fitness = *population[num_models].fitness;

    Genome best = population[detail::best_index(population)];
    auto log_generation = [&](std::size_t generation) {
        double mean = 0.0;
        for (const auto& g : population) mean += *g.fitness;
        mean /= static_cast<double>(population.size());
        result.log.push_back({generation, *best.fitness, mean,
                              EnsembleWeights::normalized(best.raw).values()});
    };
    log_generation(0);

    std::size_t stale_generations = 0;
    for (std::size_t generation = 1;
         generation <= config.generations && stale_generations < config.patience; ++generation) {
        // Elites carry over unchanged, which makes best fitness monotone.
        std::vector<std::size_t> ranking(population.size());
        std::iota(ranking.begin(), ranking.end(), std::size_t{0});
        std::sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
            if (*population[a].fitness != *population[b].fitness)
                return *population[a].fitness > *population[b].fitness;
            return a < b;
        });
        std::vector<Genome> next;
        next.reserve(config.population_size);
        for (std::size_t e = 0; e < config.elitism_count; ++e)
            next.push_back(population[ranking[e]]);
        while (next.size() < config.population_size) {
            const std::size_t parent_a = tournament_select(population, config.tournament_size, rng);
            Genome child;
            if (rng.uniform() < config.crossover_rate) {
                const std::size_t parent_b =
                    tournament_select(population, config.tournament_size, rng);
                child = blend_crossover(population[parent_a], population[parent_b], rng);
            } else {
                child = Genome{population[parent_a].raw, std::nullopt};
            }
            next.push_back(gaussian_mutate(child, config, order, rng));
        }
        population = std::move(next);
        detail::evaluate_population(population, pool, gold, config.fitness_metric, workers);

        const std::size_t generation_best = detail::best_index(population);
        if (*population[generation_best].fitness > *best.fitness) {
            best = population[generation_best];
            stale_generations = 0;
        } else {
            ++stale_generations;
        }
        log_generation(generation);
    }

    result.weights = EnsembleWeights::normalized(best.raw).values();
    result.dev_fitness = *best.fitness;
    return result;
}

// Applies optimized weights to a held-out pool. The pool must list the
// same models, by name, in the same order.
inline PredictionMatrix apply_weights(const OptimizationResult& result, const ModelPool& pool) {
    const auto names = pool.model_names();
    if (names.size() != result.model_names.size())
        throw data_error("model count mismatch: result has " +
                         std::to_string(result.model_names.size()) + ", pool has " +
                         std::to_string(names.size()));
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] != result.model_names[i])
            throw data_error("model order mismatch at position " + std::to_string(i) +
                             ": result '" + result.model_names[i] + "' vs pool '" + names[i] +
                             "'");
    return weighted_average(pool, EnsembleWeights(result.weights));
}

inline nlohmann::ordered_json config_to_json(const GAConfig& config) {
    return {{"population_size", config.population_size},
            {"generations", config.generations},
            {"tournament_size", config.tournament_size},
            {"crossover_rate", config.crossover_rate},
            {"mutation_rate_per_gene", config.mutation_rate_per_gene},
            {"mutation_sigma", config.mutation_sigma},
            {"elitism_count", config.elitism_count},
            {"patience", config.patience},
            {"seed", config.seed},
            {"fitness_metric", to_string(config.fitness_metric)}};
}

inline GAConfig config_from_json(const nlohmann::json& j) {
    GAConfig config;
    config.population_size = j.at("population_size").get<std::size_t>();
    config.generations = j.at("generations").get<std::size_t>();
    config.tournament_size = j.at("tournament_size").get<std::size_t>();
    config.crossover_rate = j.at("crossover_rate").get<double>();
    config.mutation_rate_per_gene = j.at("mutation_rate_per_gene").get<double>();
    config.mutation_sigma = j.at("mutation_sigma").get<double>();
    config.elitism_count = j.at("elitism_count").get<std::size_t>();
    config.patience = j.at("patience").get<std::size_t>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.fitness_metric = parse_metric(j.at("fitness_metric").get<std::string>());
    return config;
}

inline nlohmann::ordered_json result_to_json(const OptimizationResult& result) {
    nlohmann::ordered_json j;
    j["weights"] = result.weights;
    j["model_names"] = result.model_names;
    j["dev_fitness"] = result.dev_fitness;
    j["singles"] = result.single_fitness;
    j["uniform_fitness"] = result.uniform_fitness;
    if (result.method == "grid") {
        j["config"] = {{"step", result.grid_step},
                       {"cap", result.grid_cap},
                       {"fitness_metric", to_string(result.config.fitness_metric)}};
    } else {
        j["config"] = config_to_json(result.config);
    }
    j["log"] = nlohmann::ordered_json::array();
    for (const auto& entry : result.log)
        j["log"].push_back({{"generation", entry.generation},
                            {"best_fitness", entry.best_fitness},
                            {"mean_fitness", entry.mean_fitness},
                            {"best_weights", entry.best_weights}});
    j["method"] = result.method;
    return j;
}

inline OptimizationResult result_from_json(const nlohmann::json& j) {
    OptimizationResult result;
    result.weights = j.at("weights").get<std::vector<double>>();
    result.model_names = j.at("model_names").get<std::vector<std::string>>();
    result.dev_fitness = j.at("dev_fitness").get<double>();
    result.single_fitness = j.at("singles").get<std::vector<double>>();
    result.uniform_fitness = j.at("uniform_fitness").get<double>();
    result.method = j.value("method", "ga");
    if (result.method == "grid") {
        result.grid_step = j.at("config").value("step", 0.0);
        result.grid_cap = j.at("config").value("cap", std::uint64_t{0});
        result.config.fitness_metric =
            parse_metric(j.at("config").value("fitness_metric", std::string("weighted_f1")));
    } else {
        result.config = config_from_json(j.at("config"));
    }
    for (const auto& entry : j.at("log")) {
        GenerationLog log;
        log.generation = entry.at("generation").get<std::size_t>();
        log.best_fitness = entry.at("best_fitness").get<double>();
        log.mean_fitness = entry.at("mean_fitness").get<double>();
        log.best_weights = entry.at("best_weights").get<std::vector<double>>();
        result.log.push_back(std::move(log));
    }
    return result;
}

} // namespace ensopt
