#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensopt/csv.hpp"
#include "ensopt/error.hpp"
#include "ensopt/labels.hpp"
#include "ensopt/pool.hpp"

namespace ensopt {

// Declarative run description: the label set, one gold-label file per
// split, and per-model prediction files for every split. All paths are
// resolved relative to the manifest file, so run directories relocate.
struct ManifestModel {
    std::string name;
    std::string set_tag;
    PredictionKind kind = PredictionKind::probabilities;
    std::map<std::string, std::string> files; // split -> prediction CSV path
};

class RunManifest {
public:
    static RunManifest load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw io_error("cannot open manifest '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw config_error("manifest '" + path + "' is not valid JSON: " + e.what());
        }
        return from_json(j, std::filesystem::path(path).parent_path());
    }

    static RunManifest from_json(const nlohmann::json& j, std::filesystem::path base_dir) {
        RunManifest manifest;
        manifest.base_dir_ = std::move(base_dir);
        try {
            manifest.label_names_ = j.at("label_set").get<std::vector<std::string>>();
            for (const auto& [split, file] : j.at("splits").items())
                manifest.splits_[split] = file.get<std::string>();
            for (const auto& model_json : j.at("models")) {
                ManifestModel model;
                model.name = model_json.at("name").get<std::string>();
                model.set_tag = model_json.value("set", "");
                model.kind =
                    parse_prediction_kind(model_json.value("kind", "probabilities"));
                for (const auto& [split, file] : model_json.at("files").items())
                    model.files[split] = file.get<std::string>();
                manifest.models_.push_back(std::move(model));
            }
        } catch (const nlohmann::json::exception& e) {
            throw config_error(std::string("manifest schema error: ") + e.what());
        }
        manifest.check();
        return manifest;
    }

    const std::vector<std::string>& label_names() const { return label_names_; }
    LabelSet labels() const { return LabelSet(label_names_); }
    const std::map<std::string, std::string>& splits() const { return splits_; }
    const std::vector<ManifestModel>& models() const { return models_; }

    std::string resolve(const std::string& relative) const {
        const std::filesystem::path p(relative);
        return p.is_absolute() ? p.string() : (base_dir_ / p).string();
    }

    GoldLabels load_gold(const std::string& split, const LabelSet& labels) const {
        auto it = splits_.find(split);
        if (it == splits_.end())
            throw config_error("manifest declares no split named '" + split + "'");
        return read_label_csv(resolve(it->second), labels);
    }

    // Loads every model (or only those carrying `set_tag`) for one split.
    // "all" and "overall" select the full pool.
    ModelPool load_pool(const std::string& split, const LabelSet& labels,
                        const std::string& set_tag = "overall") const {
        if (splits_.find(split) == splits_.end())
            throw config_error("manifest declares no split named '" + split + "'");
        const bool take_all = set_tag == "all" || set_tag == "overall";
        std::vector<PredictionMatrix> matrices;
        std::map<std::string, std::string> tags;
        for (const auto& model : models_) {
            if (!take_all && model.set_tag != set_tag) continue;
            matrices.push_back(read_prediction_csv(resolve(model.files.at(split)), labels,
                                                   model.name, split, model.kind));
            tags[model.name] = model.set_tag;
        }
        if (matrices.empty()) {
            std::set<std::string> available;
            for (const auto& model : models_) available.insert(model.set_tag);
            std::string listing;
            for (const auto& tag : available) listing += (listing.empty() ? "" : ", ") + tag;
            throw config_error("no models carry set tag '" + set_tag + "' (available: " +
                               listing + ")");
        }
        return ModelPool(std::move(matrices), std::move(tags));
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["label_set"] = label_names_;
        j["splits"] = nlohmann::ordered_json::object();
        for (const auto& [split, file] : splits_) j["splits"][split] = file;
        j["models"] = nlohmann::ordered_json::array();
        for (const auto& model : models_) {
            nlohmann::ordered_json m;
            m["name"] = model.name;
            m["set"] = model.set_tag;
            m["kind"] = model.kind == PredictionKind::logits ? "logits" : "probabilities";
            m["files"] = nlohmann::ordered_json::object();
            for (const auto& [split, file] : model.files) m["files"][split] = file;
            j["models"].push_back(std::move(m));
        }
        return j;
    }

    static RunManifest make(std::vector<std::string> label_names,
                            std::map<std::string, std::string> splits,
                            std::vector<ManifestModel> models,
                            std::filesystem::path base_dir) {
        RunManifest manifest;
        manifest.label_names_ = std::move(label_names);
        manifest.splits_ = std::move(splits);
        manifest.models_ = std::move(models);
        manifest.base_dir_ = std::move(base_dir);
        manifest.check();
        return manifest;
    }

private:
    RunManifest() = default;

    void check() const {
        LabelSet labels(label_names_); // validates count and uniqueness
        if (splits_.empty()) throw config_error("manifest declares no splits");
        if (models_.empty()) throw config_error("manifest declares no models");
        std::set<std::string> names;
        for (const auto& model : models_) {
            if (model.name.empty()) throw config_error("manifest model with empty name");
            if (!names.insert(model.name).second)
                throw config_error("duplicate model name '" + model.name + "' in manifest");
            for (const auto& [split, file] : splits_) {
                (void)file;
                if (model.files.find(split) == model.files.end())
                    throw config_error("model '" + model.name +
                                       "' has no prediction file for split '" + split + "'");
            }
        }
    }

    std::vector<std::string> label_names_;
    std::map<std::string, std::string> splits_;
    std::vector<ManifestModel> models_;
    std::filesystem::path base_dir_;
};

} // namespace ensopt
