#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ensopt/error.hpp"
#include "ensopt/labels.hpp"

namespace ensopt {

struct CorpusRecord {
    std::string text;
    std::string label;
};

struct ClassCountTable {
    std::vector<std::string> labels;
    std::vector<std::int64_t> counts;
    std::int64_t other = 0; // records whose label is not in the set
    std::int64_t total = 0;
};

struct OOVReport {
    std::int64_t total_types = 0; // distinct types (or token occurrences in token mode)
    std::int64_t oov_types = 0;
    double oov_rate = 0.0;
    bool token_level = false;
    std::int64_t vocab_size = 0;
};

namespace unicode {

inline bool is_space(char32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Pragmatic punctuation set: ASCII plus the blocks that occur in social
// media text in Latin, Dravidian and Indic scripts. Symbols and emoji are
// intentionally not included.
inline bool is_punctuation(char32_t cp) {
    if (cp < 0x80)
        return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
               (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
    switch (cp) {
        case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
        case 0x60C: case 0x61B: case 0x61F: case 0x6D4:          // Arabic
        case 0x964: case 0x965:                                   // danda
        case 0x2E2E: case 0x2E41:
            return true;
        default:
            return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
                   (cp >= 0x3001 && cp <= 0x3003) || (cp >= 0x3008 && cp <= 0x3011) ||
                   (cp >= 0x3014 && cp <= 0x301F) || (cp >= 0xFE50 && cp <= 0xFE61) ||
                   (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
                   (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65);
    }
}

inline bool is_digit(char32_t cp) {
    return (cp >= '0' && cp <= '9') || (cp >= 0x660 && cp <= 0x669) ||
           (cp >= 0x6F0 && cp <= 0x6F9) || (cp >= 0x966 && cp <= 0x96F) ||
           (cp >= 0xBE6 && cp <= 0xBEF) || (cp >= 0xCE6 && cp <= 0xCEF) ||
           (cp >= 0xD66 && cp <= 0xD6F) || (cp >= 0xFF10 && cp <= 0xFF19);
}

// ASCII and Latin-1 lowering; the Dravidian scripts are caseless.
inline char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    return cp;
}

// Decodes one UTF-8 code point at `i`, advancing `i`. Invalid bytes decode
// as U+FFFD and advance by one so malformed input cannot loop.
inline char32_t decode(const std::string& s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    const unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + len > s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (std::size_t k = 1; k < len; ++k) {
        if ((byte(i + k) & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (byte(i + k) & 0x3F);
    }
    i += len;
    return cp;
}

inline void encode(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

} // namespace unicode

// Splits on Unicode whitespace, strips leading/trailing punctuation,
// case-folds, and drops empty and pure-digit pieces. Idempotent on its
// own output tokens.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::vector<char32_t> piece;
    const auto flush = [&]() {
        if (piece.empty()) return;
        std::size_t b = 0, e = piece.size();
        while (b < e && unicode::is_punctuation(piece[b])) ++b;
        while (e > b && unicode::is_punctuation(piece[e - 1])) --e;
        bool all_digits = (b < e);
        std::string token;
        for (std::size_t k = b; k < e; ++k) {
            const char32_t lowered = unicode::to_lower(piece[k]);
            if (!unicode::is_digit(lowered)) all_digits = false;
            unicode::encode(lowered, token);
        }
        if (!token.empty() && !all_digits) tokens.push_back(std::move(token));
        piece.clear();
    };
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = unicode::decode(text, i);
        if (unicode::is_space(cp))
            flush();
        else
            piece.push_back(cp);
    }
    flush();
    return tokens;
}

enum class CorpusFormat { tsv };

// Loads `text<TAB>label` rows; a header row is skipped when every field is
// a known column name. Rows with embedded tabs keep everything before the
// last field as text.
inline std::vector<CorpusRecord> load_corpus(const std::string& path,
                                             CorpusFormat format = CorpusFormat::tsv) {
    (void)format;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open corpus file '" + path + "'");
    std::vector<CorpusRecord> records;
    std::string line;
    std::size_t line_number = 0;
    const std::set<std::string> header_tokens = {"id", "text", "comment", "label",
                                                 "category", "class"};
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t tab = line.rfind('\t');
        if (tab == std::string::npos)
            throw data_error("corpus line " + std::to_string(line_number) +
                             ": expected text<TAB>label");
        std::string text = detail::trim(line.substr(0, tab));
        std::string label = detail::trim(line.substr(tab + 1));
        if (line_number == 1) {
            bool all_known = header_tokens.count(detail::fold_label(label)) > 0;
            std::istringstream fields(line.substr(0, tab));
            std::string field;
            while (all_known && std::getline(fields, field, '\t'))
                all_known = header_tokens.count(detail::fold_label(field)) > 0;
            if (all_known) continue;
        }
        if (text.empty())
            throw data_error("corpus line " + std::to_string(line_number) + ": empty text");
        if (label.empty())
            throw data_error("corpus line " + std::to_string(line_number) + ": missing label");
        records.push_back({std::move(text), std::move(label)});
    }
    return records;
}

// Exact per-label counts; labels outside the set land in the other bucket.
inline ClassCountTable class_counts(const std::vector<CorpusRecord>& records,
                                    const LabelSet& labels) {
    ClassCountTable table;
    table.labels = labels.names();
    table.counts.assign(labels.size(), 0);
    for (const auto& record : records) {
        if (auto idx = labels.find(record.label))
            ++table.counts[*idx];
        else
            ++table.other;
        ++table.total;
    }
    return table;
}

inline std::unordered_set<std::string> load_vocabulary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open vocabulary file '" + path + "'");
    std::unordered_set<std::string> vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        for (auto& token : tokenize(line)) vocab.insert(std::move(token));
    }
    if (vocab.empty()) throw data_error("vocabulary file '" + path + "' holds no tokens");
    return vocab;
}

// Share of corpus vocabulary absent from a reference vocabulary. Type
// level by default; token level counts occurrences instead.
inline OOVReport oov_rate(const std::vector<CorpusRecord>& records,
                          const std::unordered_set<std::string>& vocab,
                          bool token_level = false) {
    if (records.empty()) throw data_error("cannot compute OOV rate of an empty corpus");
    if (vocab.empty()) throw data_error("cannot compute OOV rate against an empty vocabulary");
    OOVReport report;
    report.token_level = token_level;
    report.vocab_size = static_cast<std::int64_t>(vocab.size());
    if (token_level) {
        for (const auto& record : records) {
            for (const auto& token : tokenize(record.text)) {
                ++report.total_types;
                if (!vocab.count(token)) ++report.oov_types;
            }
        }
    } else {
        std::unordered_set<std::string> types;
        for (const auto& record : records)
            for (auto& token : tokenize(record.text)) types.insert(std::move(token));
        report.total_types = static_cast<std::int64_t>(types.size());
        for (const auto& type : types)
            if (!vocab.count(type)) ++report.oov_types;
    }
    if (report.total_types == 0)
        throw data_error("corpus produced no tokens; OOV rate is undefined");
    report.oov_rate =
        static_cast<double>(report.oov_types) / static_cast<double>(report.total_types);
    return report;
}

inline nlohmann::ordered_json class_counts_to_json(const ClassCountTable& table) {
    nlohmann::ordered_json j;
    j["counts"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < table.labels.size(); ++i)
        j["counts"].push_back({{"label", table.labels[i]}, {"count", table.counts[i]}});
    j["other"] = table.other;
    j["total"] = table.total;
    return j;
}

inline nlohmann::ordered_json oov_report_to_json(const OOVReport& report) {
    return {{"total_types", report.total_types},
            {"oov_types", report.oov_types},
            {"oov_rate", report.oov_rate},
            {"mode", report.token_level ? "tokens" : "types"},
            {"vocab_size", report.vocab_size},
            {"tokenizer",
             {{"split", "unicode-whitespace"},
              {"strip", "unicode-punctuation"},
              {"casefold", true},
              {"drop_pure_digit_tokens", true}}}};
}

} // namespace ensopt
