#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ensopt/error.hpp"
#include "ensopt/labels.hpp"

namespace ensopt {

// Row sums are accepted within this band around 1 and silently
// renormalized; anything further off is rejected as not-a-distribution
// (most likely logits handed in as probabilities).
inline constexpr double kRowSumBand = 1e-3;
// Tolerance for the stored-matrix invariant checked by validate_pool.
inline constexpr double kRowSumTolerance = 1e-6;

// Per-model probability distributions over classes, one row per example.
// `probabilities` enforces and normalizes distribution rows; `unchecked`
// stores values verbatim (logit containers, deliberately broken fixtures).
class PredictionMatrix {
public:
    static PredictionMatrix probabilities(std::string model_name, std::string split_name,
                                          std::vector<std::string> ids,
                                          std::vector<double> values, std::size_t num_classes) {
        PredictionMatrix m =
            unchecked(std::move(model_name), std::move(split_name), std::move(ids),
                      std::move(values), num_classes);
        for (std::size_t r = 0; r < m.size(); ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < num_classes; ++c) {
                const double v = m.values_[r * num_classes + c];
                if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kRowSumBand)
                    throw data_error("probability out of range for id '" + m.ids_[r] +
                                     "' in model '" + m.model_name_ + "'");
                sum += v;
            }
            if (std::abs(sum - 1.0) > kRowSumBand)
                throw data_error("row-sum out of tolerance for id '" + m.ids_[r] +
                                 "' in model '" + m.model_name_ + "' (sum=" +
                                 std::to_string(sum) + ")");
            // Renormalize only when the invariant needs it, so parsing a
            // serialized matrix is an exact fixed point.
            if (std::abs(sum - 1.0) > kRowSumTolerance)
                for (std::size_t c = 0; c < num_classes; ++c)
                    m.values_[r * num_classes + c] /= sum;
        }
        return m;
    }

    static PredictionMatrix unchecked(std::string model_name, std::string split_name,
                                      std::vector<std::string> ids, std::vector<double> values,
                                      std::size_t num_classes) {
        if (num_classes < 2)
            throw config_error("prediction matrix needs at least 2 classes");
        if (ids.empty())
            throw data_error("prediction matrix '" + model_name + "' has no rows");
        if (values.size() != ids.size() * num_classes)
            throw data_error("prediction matrix '" + model_name + "' has " +
                             std::to_string(values.size()) + " values for " +
                             std::to_string(ids.size()) + " ids x " +
                             std::to_string(num_classes) + " classes");
        PredictionMatrix m;
        m.model_name_ = std::move(model_name);
        m.split_name_ = std::move(split_name);
        m.ids_ = std::move(ids);
        m.values_ = std::move(values);
        m.num_classes_ = num_classes;
        m.row_of_.reserve(m.ids_.size());
        for (std::size_t i = 0; i < m.ids_.size(); ++i)
            if (!m.row_of_.emplace(m.ids_[i], i).second)
                throw data_error("duplicate example id '" + m.ids_[i] + "' in model '" +
                                 m.model_name_ + "'");
        return m;
    }

    const std::string& model_name() const { return model_name_; }
    const std::string& split_name() const { return split_name_; }
    std::size_t size() const { return ids_.size(); }
    std::size_t num_classes() const { return num_classes_; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::string& id(std::size_t row) const { return ids_[row]; }

    std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * num_classes_, num_classes_};
    }

    std::optional<std::size_t> row_of(std::string_view id) const {
        auto it = row_of_.find(std::string(id));
        if (it == row_of_.end()) return std::nullopt;
        return it->second;
    }

private:
    PredictionMatrix() = default;

    std::string model_name_;
    std::string split_name_;
    std::vector<std::string> ids_;
    std::vector<double> values_; // row-major, size() * num_classes()
    std::size_t num_classes_ = 0;
    std::unordered_map<std::string, std::size_t> row_of_;
};

// Row-wise stable softmax; turns an exported logit matrix into a
// probability matrix. Shift-invariant per row by construction.
inline PredictionMatrix softmax_rows(const PredictionMatrix& raw) {
    const std::size_t c_count = raw.num_classes();
    std::vector<double> values;
    values.reserve(raw.size() * c_count);
    for (std::size_t r = 0; r < raw.size(); ++r) {
        const auto logits = raw.row(r);
        double max_logit = logits[0];
        for (double v : logits) {
            if (!std::isfinite(v))
                throw data_error("non-finite logit for id '" + raw.id(r) + "' in model '" +
                                 raw.model_name() + "'");
            max_logit = std::max(max_logit, v);
        }
        double denom = 0.0;
        for (double v : logits) denom += std::exp(v - max_logit);
        for (double v : logits) values.push_back(std::exp(v - max_logit) / denom);
    }
    return PredictionMatrix::probabilities(raw.model_name(), raw.split_name(), raw.ids(),
                                           std::move(values), c_count);
}

// Hard class decisions: per row, the index of the maximum probability;
// ties break toward the lowest class index.
inline Predictions argmax_labels(const PredictionMatrix& m) {
    std::vector<std::size_t> classes;
    classes.reserve(m.size());
    for (std::size_t r = 0; r < m.size(); ++r) {
        const auto probs = m.row(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < probs.size(); ++c)
            if (probs[c] > probs[best]) best = c;
        classes.push_back(best);
    }
    return Predictions(m.ids(), std::move(classes), m.num_classes());
}

// Nonnegative weights over models, summing to 1.
class EnsembleWeights {
public:
    explicit EnsembleWeights(std::vector<double> weights) : weights_(std::move(weights)) {
        if (weights_.empty()) throw config_error("empty weight vector");
        double sum = 0.0;
        for (double w : weights_) {
            if (!std::isfinite(w) || w < 0.0)
                throw config_error("ensemble weights must be finite and nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw config_error("ensemble weights must sum to 1 (got " + std::to_string(sum) + ")");
    }

    // Projects an unnormalized nonnegative vector onto the simplex.
    static EnsembleWeights normalized(std::span<const double> raw) {
        double sum = 0.0;
        for (double v : raw) {
            if (!std::isfinite(v) || v < 0.0)
                throw config_error("weight genes must be finite and nonnegative");
            sum += v;
        }
        if (sum <= 0.0) throw config_error("weight vector needs at least one positive entry");
        std::vector<double> w(raw.begin(), raw.end());
        for (double& v : w) v /= sum;
        return EnsembleWeights(std::move(w));
    }

    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    const std::vector<double>& values() const { return weights_; }

private:
    std::vector<double> weights_;
};

} // namespace ensopt
