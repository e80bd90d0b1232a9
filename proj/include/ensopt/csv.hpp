#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ensopt/error.hpp"
#include "ensopt/labels.hpp"
#include "ensopt/predictions.hpp"

namespace ensopt {
namespace csv {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline double parse_double(const std::string& field, const std::string& context) {
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0' || errno == ERANGE)
        throw data_error(context + ": cannot parse number '" + field + "'");
    return value;
}

inline std::string read_line(std::istream& in) {
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

} // namespace csv

enum class PredictionKind { probabilities, logits };

inline PredictionKind parse_prediction_kind(const std::string& kind) {
    if (kind == "probabilities") return PredictionKind::probabilities;
    if (kind == "logits") return PredictionKind::logits;
    throw config_error("unknown prediction kind '" + kind +
                       "' (expected probabilities or logits)");
}

// Prediction CSV: header `id,<label_0>,...,<label_{C-1}>` in label-set
// order, one row per example. Logit files go through softmax on load.
inline PredictionMatrix read_prediction_csv(const std::string& path, const LabelSet& labels,
                                            const std::string& model_name,
                                            const std::string& split_name,
                                            PredictionKind kind = PredictionKind::probabilities) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open prediction file '" + path + "'");
    const std::string header = csv::read_line(in);
    const auto columns = csv::split_fields(header);
    if (columns.size() != labels.size() + 1 || detail::fold_label(columns[0]) != "id")
        throw data_error("prediction file '" + path +
                         "': header must be id,<labels...> with " +
                         std::to_string(labels.size()) + " label columns");
    for (std::size_t c = 0; c < labels.size(); ++c)
        if (detail::fold_label(columns[c + 1]) != detail::fold_label(labels.name(c)))
            throw data_error("prediction file '" + path + "': header column " +
                             std::to_string(c + 1) + " is '" + columns[c + 1] +
                             "', expected '" + labels.name(c) + "'");

    std::vector<std::string> ids;
    std::vector<double> values;
    std::string line;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv::split_fields(line);
        if (fields.size() != labels.size() + 1)
            throw data_error("prediction file '" + path + "' line " +
                             std::to_string(line_number) + ": expected " +
                             std::to_string(labels.size() + 1) + " fields, got " +
                             std::to_string(fields.size()));
        const std::string id = detail::trim(fields[0]);
        if (id.empty())
            throw data_error("prediction file '" + path + "' line " +
                             std::to_string(line_number) + ": empty id");
        ids.push_back(id);
        for (std::size_t c = 0; c < labels.size(); ++c)
            values.push_back(csv::parse_double(
                fields[c + 1], "prediction file '" + path + "' id '" + id + "'"));
    }
    if (ids.empty()) throw data_error("prediction file '" + path + "' has no rows");
    if (kind == PredictionKind::logits) {
        const auto raw = PredictionMatrix::unchecked(model_name, split_name, std::move(ids),
                                                     std::move(values), labels.size());
        return softmax_rows(raw);
    }
    return PredictionMatrix::probabilities(model_name, split_name, std::move(ids),
                                           std::move(values), labels.size());
}

// 9 significant digits: compact, and tight enough that a write/parse
// round trip changes neither argmax nor any F1 score.
inline void write_prediction_csv(const PredictionMatrix& matrix, const LabelSet& labels,
                                 const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write prediction file '" + path + "'");
    out << "id";
    for (const auto& name : labels.names()) out << ',' << name;
    out << '\n';
    char buf[40];
    for (std::size_t r = 0; r < matrix.size(); ++r) {
        out << matrix.id(r);
        for (double v : matrix.row(r)) {
            std::snprintf(buf, sizeof(buf), "%.9g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw io_error("failed while writing '" + path + "'");
}

// Gold/hard-label CSV: header `id,label`.
inline GoldLabels read_label_csv(const std::string& path, const LabelSet& labels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open label file '" + path + "'");
    const std::string header = csv::read_line(in);
    const auto columns = csv::split_fields(header);
    if (columns.size() != 2 || detail::fold_label(columns[0]) != "id" ||
        detail::fold_label(columns[1]) != "label")
        throw data_error("label file '" + path + "': header must be id,label");
    std::vector<std::string> ids;
    std::vector<std::size_t> classes;
    std::string line;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv::split_fields(line);
        if (fields.size() != 2)
            throw data_error("label file '" + path + "' line " + std::to_string(line_number) +
                             ": expected id,label");
        const std::string id = detail::trim(fields[0]);
        if (id.empty())
            throw data_error("label file '" + path + "' line " + std::to_string(line_number) +
                             ": empty id");
        const auto cls = labels.find(fields[1]);
        if (!cls)
            throw data_error("label file '" + path + "' line " + std::to_string(line_number) +
                             ": unknown label '" + detail::trim(fields[1]) + "'");
        ids.push_back(id);
        classes.push_back(*cls);
    }
    if (ids.empty()) throw data_error("label file '" + path + "' has no rows");
    return GoldLabels(std::move(ids), std::move(classes), labels.size());
}

inline void write_label_csv(const Predictions& predictions, const LabelSet& labels,
                            const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write label file '" + path + "'");
    out << "id,label\n";
    for (std::size_t i = 0; i < predictions.size(); ++i)
        out << predictions.id(i) << ',' << labels.name(predictions.class_of_row(i)) << '\n';
    if (!out) throw io_error("failed while writing '" + path + "'");
}

} // namespace ensopt
