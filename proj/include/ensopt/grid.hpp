#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ensopt/error.hpp"
#include "ensopt/ga.hpp"
#include "ensopt/metrics.hpp"
#include "ensopt/pool.hpp"

namespace ensopt {

inline constexpr std::uint64_t kDefaultGridCap = 10'000'000;

// Simplex grid with spacing 1/g: all weight vectors (k_1/g, ..., k_M/g)
// with nonnegative integers k_i summing to g.
struct GridSpec {
    std::uint64_t g = 20;
    std::size_t num_models = 1;
    std::uint64_t cap = kDefaultGridCap;

    static GridSpec from_step(double step, std::size_t num_models,
                              std::uint64_t cap = kDefaultGridCap) {
        if (!(step > 0.0 && step <= 1.0))
            throw config_error("grid step must lie in (0,1], got " + std::to_string(step));
        const auto g = static_cast<std::uint64_t>(std::llround(1.0 / step));
        if (g < 1 || std::abs(step * static_cast<double>(g) - 1.0) > 1e-9)
            throw config_error("grid step must be the reciprocal of an integer, got " +
                               std::to_string(step));
        return {g, num_models, cap};
    }

    // Number of grid points: C(g + M - 1, M - 1), saturating at max.
    std::uint64_t point_count() const {
        std::uint64_t count = 1;
        // Multiplicative binomial evaluation, smallest factors first.
        for (std::uint64_t i = 1; i < num_models; ++i) {
            const std::uint64_t numerator = g + i;
            if (count > UINT64_MAX / numerator) return UINT64_MAX;
            count = count * numerator / i;
        }
        return count;
    }
};

// Streams every grid point exactly once in lexicographic order of the
// integer compositions. Refuses up front when the count exceeds the cap.
template <typename Fn>
void enumerate_simplex(const GridSpec& spec, Fn&& visit) {
    if (spec.g < 1) throw config_error("grid resolution g must be at least 1");
    if (spec.num_models < 1) throw config_error("grid needs at least 1 model");
    const std::uint64_t count = spec.point_count();
    if (count > spec.cap)
        throw config_error("simplex grid has " + std::to_string(count) +
                           " points, above the cap of " + std::to_string(spec.cap));

    std::vector<std::uint64_t> ks(spec.num_models, 0);
    std::vector<double> weights(spec.num_models, 0.0);
    const double inv_g = 1.0 / static_cast<double>(spec.g);
    std::function<void(std::size_t, std::uint64_t)> recurse = [&](std::size_t slot,
                                                                  std::uint64_t remaining) {
        if (slot + 1 == spec.num_models) {
            ks[slot] = remaining;
            for (std::size_t i = 0; i < spec.num_models; ++i)
                weights[i] = static_cast<double>(ks[i]) * inv_g;
            visit(static_cast<const std::vector<double>&>(weights));
            return;
        }
        for (std::uint64_t k = 0; k <= remaining; ++k) {
            ks[slot] = k;
            recurse(slot + 1, remaining - k);
        }
    };
    recurse(0, spec.g);
}

inline std::vector<EnsembleWeights> enumerate_simplex(const GridSpec& spec) {
    std::vector<EnsembleWeights> points;
    enumerate_simplex(spec, [&](const std::vector<double>& w) {
        points.push_back(EnsembleWeights::normalized(w));
    });
    return points;
}

// Exhaustive search over the grid; ties break toward the lexicographically
// smallest weight vector, which is the first one enumerated.
inline OptimizationResult grid_search(const ModelPool& pool, const GoldLabels& gold,
                                      FitnessMetric metric, const GridSpec& spec) {
    if (spec.num_models != pool.size())
        throw config_error("grid spec is for " + std::to_string(spec.num_models) +
                           " models, pool has " + std::to_string(pool.size()));
    OptimizationResult result;
    result.method = "grid";
    result.grid_step = 1.0 / static_cast<double>(spec.g);
    result.grid_cap = spec.cap;
    result.model_names = pool.model_names();
    result.config.fitness_metric = metric;

    std::vector<double> best_weights;
    double best_fitness = -1.0;
    enumerate_simplex(spec, [&](const std::vector<double>& w) {
        const auto ensemble = weighted_average(pool, EnsembleWeights::normalized(w));
        const double f = evaluate_metric(metric, gold, argmax_labels(ensemble));
        if (f > best_fitness) {
            best_fitness = f;
            best_weights = w;
        }
    });

    result.weights = EnsembleWeights::normalized(best_weights).values();
    result.dev_fitness = best_fitness;
    result.single_fitness.reserve(pool.size());
    for (std::size_t m = 0; m < pool.size(); ++m) {
        std::vector<double> one_hot(pool.size(), 0.0);
        one_hot[m] = 1.0;
        result.single_fitness.push_back(evaluate_metric(
            metric, gold,
            argmax_labels(weighted_average(pool, EnsembleWeights::normalized(one_hot)))));
    }
    result.uniform_fitness =
        evaluate_metric(metric, gold, argmax_labels(uniform_average(pool)));
    return result;
}

} // namespace ensopt
