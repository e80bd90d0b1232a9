#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ensopt/error.hpp"

namespace ensopt {

namespace detail {

inline std::string trim(std::string_view s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

// Fold a label for matching: lowercase ASCII and collapse runs of
// '-', '_' and spaces into a single '-'. Dataset exports disagree on
// separators ("Not_offensive" vs "not-offensive").
inline std::string fold_label(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_sep = false;
    for (char raw : trim(s)) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (c == '-' || c == '_' || c == ' ') {
            pending_sep = !out.empty();
            continue;
        }
        if (pending_sep) {
            out.push_back('-');
            pending_sep = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

} // namespace detail

// The six label strings used by the offensive-language shared task.
inline const std::vector<std::string>& canonical_offensive_labels() {
    static const std::vector<std::string> labels = {
        "not-offensive",
        "offensive-untargeted",
        "offensive-targeted-individual",
        "offensive-targeted-group",
        "offensive-targeted-other",
        "not-in-indented-language",
    };
    return labels;
}

// Known spellings from released shared-task files, mapped onto the
// canonical names above (folded form -> canonical name).
inline const std::unordered_map<std::string, std::string>& label_aliases() {
    static const std::unordered_map<std::string, std::string> aliases = {
        {"offensive-untargetede", "offensive-untargeted"},
        {"offensive-targeted-insult-individual", "offensive-targeted-individual"},
        {"offensive-targeted-insult-group", "offensive-targeted-group"},
        {"offensive-targeted-insult-other", "offensive-targeted-other"},
        {"not-tamil", "not-in-indented-language"},
        {"not-kannada", "not-in-indented-language"},
        {"not-malayalam", "not-in-indented-language"},
    };
    return aliases;
}

// Ordered set of class names. The index of a name is stable for the
// lifetime of a run; every matrix and label list in a run shares one set.
class LabelSet {
public:
    explicit LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
        if (names_.size() < 2)
            throw config_error("label set needs at least 2 classes, got " +
                               std::to_string(names_.size()));
        for (std::size_t i = 0; i < names_.size(); ++i) {
            const std::string key = detail::fold_label(names_[i]);
            if (key.empty())
                throw config_error("label set contains an empty name");
            if (!index_.emplace(key, i).second)
                throw config_error("duplicate label after case folding: '" + names_[i] + "'");
        }
    }

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }

    // Case/separator-insensitive lookup, with shared-task alias fallback.
    std::optional<std::size_t> find(std::string_view label) const {
        const std::string key = detail::fold_label(label);
        if (auto it = index_.find(key); it != index_.end()) return it->second;
        const auto& aliases = label_aliases();
        if (auto alias = aliases.find(key); alias != aliases.end()) {
            if (auto it = index_.find(alias->second); it != index_.end()) return it->second;
        }
        return std::nullopt;
    }

    std::size_t index_of(std::string_view label) const {
        if (auto idx = find(label)) return *idx;
        throw data_error("unknown label '" + std::string(label) + "'");
    }

    bool operator==(const LabelSet& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
};

// One (example-id, class-index) pair per example. Used both for gold
// labels and for hard predictions.
class GoldLabels {
public:
    GoldLabels(std::vector<std::string> ids, std::vector<std::size_t> classes,
               std::size_t num_classes)
        : ids_(std::move(ids)), classes_(std::move(classes)), num_classes_(num_classes) {
        if (ids_.size() != classes_.size())
            throw data_error("label list: id/class count mismatch");
        row_of_.reserve(ids_.size());
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            if (classes_[i] >= num_classes_)
                throw data_error("label list: class index " + std::to_string(classes_[i]) +
                                 " out of range for id '" + ids_[i] + "'");
            if (!row_of_.emplace(ids_[i], i).second)
                throw data_error("duplicate example id '" + ids_[i] + "'");
        }
    }

    std::size_t size() const { return ids_.size(); }
    std::size_t num_classes() const { return num_classes_; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<std::size_t>& classes() const { return classes_; }
    const std::string& id(std::size_t i) const { return ids_[i]; }
    std::size_t class_of_row(std::size_t i) const { return classes_[i]; }

    std::optional<std::size_t> row_of(std::string_view id) const {
        auto it = row_of_.find(std::string(id));
        if (it == row_of_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t class_of(std::string_view id) const {
        if (auto row = row_of(id)) return classes_[*row];
        throw data_error("example id '" + std::string(id) + "' not found");
    }

private:
    std::vector<std::string> ids_;
    std::vector<std::size_t> classes_;
    std::size_t num_classes_;
    std::unordered_map<std::string, std::size_t> row_of_;
};

// Hard class decisions share the gold-label shape.
using Predictions = GoldLabels;

} // namespace ensopt
