#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ensopt/error.hpp"
#include "ensopt/labels.hpp"
#include "ensopt/predictions.hpp"

namespace ensopt {

struct Diagnostic {
    std::string model;
    std::string example_id; // empty when the finding is not row-specific
    std::string message;
};

struct ValidationReport {
    bool pass = true;
    std::vector<Diagnostic> diagnostics;

    void add(std::string model, std::string id, std::string message) {
        pass = false;
        diagnostics.push_back({std::move(model), std::move(id), std::move(message)});
    }
};

// A set of prediction matrices over the same split and example set.
// Example alignment is by id join, not row order: the first model's id
// order is canonical and every other model is indexed against it.
class ModelPool {
public:
    explicit ModelPool(std::vector<PredictionMatrix> models,
                       std::map<std::string, std::string> set_tags = {})
        : models_(std::move(models)), set_tags_(std::move(set_tags)) {
        if (models_.empty()) throw config_error("model pool is empty");
        const auto& first = models_.front();
        std::set<std::string> names;
        for (const auto& m : models_) {
            if (!names.insert(m.model_name()).second)
                throw data_error("duplicate model name '" + m.model_name() + "' in pool");
            if (m.split_name() != first.split_name())
                throw data_error("model '" + m.model_name() + "' is on split '" +
                                 m.split_name() + "', expected '" + first.split_name() + "'");
            if (m.num_classes() != first.num_classes())
                throw data_error("model '" + m.model_name() + "' has " +
                                 std::to_string(m.num_classes()) + " classes, expected " +
                                 std::to_string(first.num_classes()));
        }
        // Alignment defects are recorded, not thrown; validate_pool reports
        // them and the averaging operations refuse to run until resolved.
        row_of_.assign(models_.size(), {});
        row_of_[0].resize(first.size());
        for (std::size_t i = 0; i < first.size(); ++i) row_of_[0][i] = i;
        for (std::size_t m = 1; m < models_.size(); ++m) {
            if (models_[m].size() != first.size()) aligned_ = false;
            row_of_[m].reserve(first.size());
            for (std::size_t i = 0; i < first.size(); ++i) {
                if (auto row = models_[m].row_of(first.id(i))) {
                    row_of_[m].push_back(*row);
                } else {
                    aligned_ = false;
                    row_of_[m].push_back(0);
                }
            }
        }
    }

    std::size_t size() const { return models_.size(); }
    const PredictionMatrix& model(std::size_t m) const { return models_[m]; }
    const std::string& split_name() const { return models_.front().split_name(); }
    std::size_t num_classes() const { return models_.front().num_classes(); }
    std::size_t num_examples() const { return models_.front().size(); }
    const std::vector<std::string>& example_ids() const { return models_.front().ids(); }
    bool aligned() const { return aligned_; }

    std::vector<std::string> model_names() const {
        std::vector<std::string> names;
        names.reserve(models_.size());
        for (const auto& m : models_) names.push_back(m.model_name());
        return names;
    }

    std::string set_tag(const std::string& model_name) const {
        auto it = set_tags_.find(model_name);
        return it == set_tags_.end() ? std::string() : it->second;
    }

    // Row of `model_index` holding the same example as canonical row `i`.
    std::span<const double> aligned_row(std::size_t model_index, std::size_t i) const {
        return models_[model_index].row(row_of_[model_index][i]);
    }

private:
    std::vector<PredictionMatrix> models_;
    std::map<std::string, std::string> set_tags_;
    std::vector<std::vector<std::size_t>> row_of_;
    bool aligned_ = true;
};

// Checks every stored-matrix invariant plus id coverage against the gold
// labels. Findings are diagnostics, not exceptions; callers decide.
inline ValidationReport validate_pool(const ModelPool& pool, const GoldLabels& gold) {
    ValidationReport report;
    for (std::size_t m = 0; m < pool.size(); ++m) {
        const auto& matrix = pool.model(m);
        if (matrix.num_classes() != gold.num_classes())
            report.add(matrix.model_name(), "",
                       "class-count mismatch: matrix has " +
                           std::to_string(matrix.num_classes()) + ", gold labels have " +
                           std::to_string(gold.num_classes()));
        for (std::size_t r = 0; r < matrix.size(); ++r) {
            const auto probs = matrix.row(r);
            double sum = 0.0;
            bool in_range = true;
            for (double v : probs) {
                if (!std::isfinite(v) || v < 0.0 || v > 1.0) in_range = false;
                sum += v;
            }
            if (!in_range)
                report.add(matrix.model_name(), matrix.id(r), "probability out of [0,1] range");
            if (std::abs(sum - 1.0) > kRowSumTolerance)
                report.add(matrix.model_name(), matrix.id(r),
                           "row-sum out of tolerance (sum=" + std::to_string(sum) + ")");
        }
        // Id coverage must be equal in both directions; an implicit
        // intersection would silently change every metric.
        std::size_t missing = 0, extra = 0;
        std::string missing_example, extra_example;
        for (const auto& id : gold.ids()) {
            if (!matrix.row_of(id)) {
                if (missing == 0) missing_example = id;
                ++missing;
            }
        }
        for (const auto& id : matrix.ids()) {
            if (!gold.row_of(id)) {
                if (extra == 0) extra_example = id;
                ++extra;
            }
        }
        if (missing > 0)
            report.add(matrix.model_name(), missing_example,
                       "id coverage mismatch: " + std::to_string(missing) +
                           " gold id(s) missing from predictions (first: '" + missing_example +
                           "')");
        if (extra > 0)
            report.add(matrix.model_name(), extra_example,
                       "id coverage mismatch: " + std::to_string(extra) +
                           " predicted id(s) absent from gold labels (first: '" + extra_example +
                           "')");
    }
    return report;
}

// Soft-voting ensemble: per example, the weighted sum of the model
// distributions. Output rows sum to 1 within tolerance because the
// weights do and every model row does.
inline PredictionMatrix weighted_average(const ModelPool& pool, const EnsembleWeights& weights) {
    if (weights.size() != pool.size())
        throw config_error("weight count " + std::to_string(weights.size()) +
                           " does not match model count " + std::to_string(pool.size()));
    if (!pool.aligned())
        throw data_error("model pool is not id-aligned; run validation for details");
    const std::size_t n = pool.num_examples();
    const std::size_t c_count = pool.num_classes();
    std::vector<double> values(n * c_count, 0.0);
    for (std::size_t m = 0; m < pool.size(); ++m) {
        const double w = weights[m];
        if (w == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const auto probs = pool.aligned_row(m, i);
            for (std::size_t c = 0; c < c_count; ++c) values[i * c_count + c] += w * probs[c];
        }
    }
    return PredictionMatrix::probabilities("ensemble", pool.split_name(), pool.example_ids(),
                                           std::move(values), c_count);
}

// The plain prediction-averaging baseline: equal weight on every model.
inline PredictionMatrix uniform_average(const ModelPool& pool) {
    std::vector<double> w(pool.size(), 1.0 / static_cast<double>(pool.size()));
    return weighted_average(pool, EnsembleWeights::normalized(w));
}

} // namespace ensopt
