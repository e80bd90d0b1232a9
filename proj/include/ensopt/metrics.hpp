#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensopt/error.hpp"
#include "ensopt/labels.hpp"

namespace ensopt {

// counts[gold][predicted]; row sums are the per-class supports.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_classes)
        : num_classes_(num_classes), counts_(num_classes * num_classes, 0) {}

    std::size_t num_classes() const { return num_classes_; }
    std::int64_t at(std::size_t gold, std::size_t pred) const {
        return counts_[gold * num_classes_ + pred];
    }
    void increment(std::size_t gold, std::size_t pred) { ++counts_[gold * num_classes_ + pred]; }

    std::int64_t support(std::size_t gold) const {
        std::int64_t sum = 0;
        for (std::size_t p = 0; p < num_classes_; ++p) sum += at(gold, p);
        return sum;
    }

    std::int64_t predicted_count(std::size_t pred) const {
        std::int64_t sum = 0;
        for (std::size_t g = 0; g < num_classes_; ++g) sum += at(g, pred);
        return sum;
    }

    std::int64_t total() const {
        std::int64_t sum = 0;
        for (std::int64_t c : counts_) sum += c;
        return sum;
    }

    std::int64_t diagonal() const {
        std::int64_t sum = 0;
        for (std::size_t c = 0; c < num_classes_; ++c) sum += at(c, c);
        return sum;
    }

private:
    std::size_t num_classes_;
    std::vector<std::int64_t> counts_;
};

// Joins gold and predictions by example id; both must cover the same ids.
inline ConfusionMatrix confusion(const GoldLabels& gold, const Predictions& pred) {
    if (gold.size() == 0) throw data_error("no examples to evaluate");
    if (gold.num_classes() != pred.num_classes())
        throw data_error("gold and predictions disagree on class count");
    if (gold.size() != pred.size())
        throw data_error("id mismatch: " + std::to_string(gold.size()) + " gold vs " +
                         std::to_string(pred.size()) + " predicted examples");
    ConfusionMatrix cm(gold.num_classes());
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const auto row = pred.row_of(gold.id(i));
        if (!row) throw data_error("id mismatch: no prediction for example '" + gold.id(i) + "'");
        cm.increment(gold.class_of_row(i), pred.class_of_row(*row));
    }
    return cm;
}

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

// Precision, recall and F1 per class; every 0/0 quotient is defined as 0.
inline std::vector<ClassMetrics> per_class_prf(const ConfusionMatrix& cm) {
    std::vector<ClassMetrics> out(cm.num_classes());
    for (std::size_t c = 0; c < cm.num_classes(); ++c) {
        const std::int64_t tp = cm.at(c, c);
        const std::int64_t fp = cm.predicted_count(c) - tp;
        const std::int64_t fn = cm.support(c) - tp;
        ClassMetrics& m = out[c];
        m.support = cm.support(c);
        m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
    }
    return out;
}

// Support-weighted mean of per-class F1, computed as sum(support*f1)/N.
inline double weighted_f1_from(const std::vector<ClassMetrics>& per_class) {
    double weighted_sum = 0.0;
    std::int64_t n = 0;
    for (const auto& m : per_class) {
        weighted_sum += static_cast<double>(m.support) * m.f1;
        n += m.support;
    }
    if (n == 0) throw data_error("no examples to evaluate");
    return weighted_sum / static_cast<double>(n);
}

// Unweighted mean of per-class F1 over classes with support > 0, so an
// absent class (zero gold support) never drags the average down.
inline double macro_f1_from(const std::vector<ClassMetrics>& per_class) {
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& m : per_class) {
        if (m.support > 0) {
            sum += m.f1;
            ++counted;
        }
    }
    if (counted == 0) throw data_error("no examples to evaluate");
    return sum / static_cast<double>(counted);
}

inline double weighted_f1(const GoldLabels& gold, const Predictions& pred) {
    return weighted_f1_from(per_class_prf(confusion(gold, pred)));
}

inline double macro_f1(const GoldLabels& gold, const Predictions& pred) {
    return macro_f1_from(per_class_prf(confusion(gold, pred)));
}

enum class FitnessMetric { weighted_f1, macro_f1 };

inline const char* to_string(FitnessMetric metric) {
    return metric == FitnessMetric::weighted_f1 ? "weighted_f1" : "macro_f1";
}

inline FitnessMetric parse_metric(const std::string& name) {
    if (name == "weighted_f1") return FitnessMetric::weighted_f1;
    if (name == "macro_f1") return FitnessMetric::macro_f1;
    throw config_error("unknown metric '" + name + "' (expected weighted_f1 or macro_f1)");
}

inline double evaluate_metric(FitnessMetric metric, const GoldLabels& gold,
                              const Predictions& pred) {
    return metric == FitnessMetric::weighted_f1 ? weighted_f1(gold, pred) : macro_f1(gold, pred);
}

struct MetricsReport {
    std::vector<std::string> labels;
    std::vector<ClassMetrics> per_class;
    double weighted_f1 = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    ConfusionMatrix confusion{2};
};

inline MetricsReport full_report(const GoldLabels& gold, const Predictions& pred,
                                 const LabelSet& labels) {
    if (labels.size() != gold.num_classes())
        throw data_error("label set size does not match gold class count");
    MetricsReport report;
    report.confusion = confusion(gold, pred);
    report.labels = labels.names();
    report.per_class = per_class_prf(report.confusion);
    report.weighted_f1 = weighted_f1_from(report.per_class);
    report.macro_f1 = macro_f1_from(report.per_class);
    report.accuracy = static_cast<double>(report.confusion.diagonal()) /
                      static_cast<double>(report.confusion.total());
    return report;
}

// Half-to-even rounding to 4 decimals, used for all textual score output.
// Machine output keeps full precision.
inline double round4(double v) {
    return std::nearbyint(v * 10000.0) / 10000.0;
}

inline std::string format4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", round4(v));
    return buf;
}

inline nlohmann::ordered_json report_to_json(const MetricsReport& report) {
    nlohmann::ordered_json j;
    j["per_class"] = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < report.per_class.size(); ++c) {
        const auto& m = report.per_class[c];
        j["per_class"].push_back({{"label", report.labels[c]},
                                  {"precision", m.precision},
                                  {"recall", m.recall},
                                  {"f1", m.f1},
                                  {"support", m.support}});
    }
    j["weighted_f1"] = report.weighted_f1;
    j["macro_f1"] = report.macro_f1;
    j["accuracy"] = report.accuracy;
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < report.confusion.num_classes(); ++g) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t p = 0; p < report.confusion.num_classes(); ++p)
            row.push_back(report.confusion.at(g, p));
        rows.push_back(row);
    }
    j["confusion"] = rows;
    return j;
}

inline std::string report_to_text(const MetricsReport& report) {
    std::size_t width = 12; // fits "weighted avg"
    for (const auto& label : report.labels) width = std::max(width, label.size());
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-*s  %9s  %9s  %9s  %9s\n", static_cast<int>(width),
                  "label", "precision", "recall", "f1", "support");
    out += line;
    for (std::size_t c = 0; c < report.per_class.size(); ++c) {
        const auto& m = report.per_class[c];
        std::snprintf(line, sizeof(line), "%-*s  %9s  %9s  %9s  %9lld\n", static_cast<int>(width),
                      report.labels[c].c_str(), format4(m.precision).c_str(),
                      format4(m.recall).c_str(), format4(m.f1).c_str(),
                      static_cast<long long>(m.support));
        out += line;
    }
    std::snprintf(line, sizeof(line), "%-*s  %9s\n", static_cast<int>(width), "accuracy",
                  format4(report.accuracy).c_str());
    out += line;
    std::snprintf(line, sizeof(line), "%-*s  %9s\n", static_cast<int>(width), "macro f1",
                  format4(report.macro_f1).c_str());
    out += line;
    std::snprintf(line, sizeof(line), "%-*s  %9s\n", static_cast<int>(width), "weighted f1",
                  format4(report.weighted_f1).c_str());
    out += line;
    return out;
}

} // namespace ensopt
