#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ensopt/error.hpp"
#include "ensopt/labels.hpp"
#include "ensopt/pool.hpp"
#include "ensopt/rng.hpp"

namespace ensopt {

// Deterministic desk-scale fixture. Gold classes are uniform over C;
// model m picks the gold class with probability accuracies[m] (otherwise
// a uniformly drawn wrong class) and concentrates a peak in [0.55, 0.95]
// on its pick, so argmax always recovers the picked class.
inline std::pair<ModelPool, GoldLabels> synth_generate(std::uint64_t seed, std::size_t n,
                                                       std::size_t num_classes,
                                                       std::size_t num_models,
                                                       const std::vector<double>& accuracies,
                                                       const std::string& split_name = "dev") {
    if (n < 1) throw config_error("synthetic split needs at least 1 example");
    if (num_classes < 2) throw config_error("synthetic split needs at least 2 classes");
    if (num_models < 1) throw config_error("synthetic split needs at least 1 model");
    if (accuracies.size() != num_models)
        throw config_error("expected " + std::to_string(num_models) + " accuracies, got " +
                           std::to_string(accuracies.size()));
    for (double a : accuracies)
        if (!(a >= 0.0 && a <= 1.0))
            throw config_error("model accuracy must lie in [0,1], got " + std::to_string(a));

    Rng rng(seed);
    std::vector<std::string> ids;
    std::vector<std::size_t> gold;
    ids.reserve(n);
    gold.reserve(n);
    char buf[32];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "ex%06zu", i);
        ids.emplace_back(buf);
        gold.push_back(rng.uniform_index(num_classes));
    }

    std::vector<PredictionMatrix> models;
    models.reserve(num_models);
    for (std::size_t m = 0; m < num_models; ++m) {
        std::vector<double> values;
        values.reserve(n * num_classes);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t picked = gold[i];
            if (rng.uniform() >= accuracies[m]) {
                // Off-target pick: uniform over the other C-1 classes.
                std::size_t other = rng.uniform_index(num_classes - 1);
                picked = other < gold[i] ? other : other + 1;
            }
            const double peak = 0.55 + 0.4 * rng.uniform();
            std::vector<double> tail(num_classes - 1);
            double tail_sum = 0.0;
            for (double& t : tail) {
                t = rng.uniform_pos();
                tail_sum += t;
            }
            std::size_t t = 0;
            for (std::size_t c = 0; c < num_classes; ++c) {
                if (c == picked)
                    values.push_back(peak);
                else
                    values.push_back((1.0 - peak) * tail[t++] / tail_sum);
            }
        }
        std::snprintf(buf, sizeof(buf), "model_%zu", m);
        models.push_back(PredictionMatrix::probabilities(buf, split_name, ids, std::move(values),
                                                         num_classes));
    }

    std::map<std::string, std::string> tags;
    for (const auto& m : models) tags[m.model_name()] = "synthetic";
    return {ModelPool(std::move(models), std::move(tags)),
            GoldLabels(std::move(ids), std::move(gold), num_classes)};
}

// Label names for synthetic runs: class_0 .. class_{C-1}.
inline LabelSet synth_labels(std::size_t num_classes) {
    std::vector<std::string> names;
    names.reserve(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) names.push_back("class_" + std::to_string(c));
    return LabelSet(std::move(names));
}

} // namespace ensopt
