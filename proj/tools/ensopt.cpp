#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ensopt/corpus.hpp"
#include "ensopt/csv.hpp"
#include "ensopt/error.hpp"
#include "ensopt/ga.hpp"
#include "ensopt/grid.hpp"
#include "ensopt/manifest.hpp"
#include "ensopt/metrics.hpp"
#include "ensopt/pool.hpp"
#include "ensopt/synthetic.hpp"

namespace {

using namespace ensopt;

std::vector<double> parse_double_list(const std::string& csv_list) {
    std::vector<double> values;
    std::stringstream in(csv_list);
    std::string field;
    while (std::getline(in, field, ',')) {
        if (field.empty()) continue;
        values.push_back(csv::parse_double(field, "list value"));
    }
    return values;
}

std::vector<std::string> parse_string_list(const std::string& csv_list) {
    std::vector<std::string> values;
    std::stringstream in(csv_list);
    std::string field;
    while (std::getline(in, field, ',')) values.push_back(detail::trim(field));
    return values;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw io_error("failed while writing '" + path + "'");
}

std::string default_labels_out(const std::string& out_path) {
    std::filesystem::path p(out_path);
    const std::string stem = p.stem().string();
    p.replace_filename(stem + "_labels" + p.extension().string());
    return p.string();
}

void print_validation(const std::string& split, const ValidationReport& report) {
    std::cout << "split '" << split << "': " << (report.pass ? "pass" : "FAIL") << " ("
              << report.diagnostics.size() << " diagnostic(s))\n";
    for (const auto& d : report.diagnostics) {
        std::cout << "  model '" << d.model << "'";
        if (!d.example_id.empty()) std::cout << " id '" << d.example_id << "'";
        std::cout << ": " << d.message << "\n";
    }
}

int cmd_validate(const std::string& manifest_path) {
    const auto manifest = RunManifest::load(manifest_path);
    const auto labels = manifest.labels();
    bool all_pass = true;
    for (const auto& [split, gold_file] : manifest.splits()) {
        (void)gold_file;
        const auto gold = manifest.load_gold(split, labels);
        const auto pool = manifest.load_pool(split, labels);
        const auto report = validate_pool(pool, gold);
        print_validation(split, report);
        all_pass = all_pass && report.pass;
    }
    if (!all_pass) throw data_error("manifest validation failed");
    std::cout << "manifest is valid\n";
    return 0;
}

struct OptimizeOptions {
    std::string manifest_path;
    std::string split = "dev";
    std::string metric = "weighted_f1";
    std::string set_tag = "overall";
    std::string method = "ga";
    std::string out_path;
    GAConfig ga;
    double grid_step = 0.05;
    std::uint64_t grid_cap = kDefaultGridCap;
    std::size_t workers = 1;
};

int cmd_optimize(const OptimizeOptions& opt) {
    const auto manifest = RunManifest::load(opt.manifest_path);
    const auto labels = manifest.labels();
    const auto gold = manifest.load_gold(opt.split, labels);
    const auto pool = manifest.load_pool(opt.split, labels, opt.set_tag);
    const auto validation = validate_pool(pool, gold);
    if (!validation.pass) {
        print_validation(opt.split, validation);
        throw data_error("pool failed validation; not optimizing");
    }

    GAConfig config = opt.ga;
    config.fitness_metric = parse_metric(opt.metric);
    OptimizationResult result;
    if (opt.method == "ga") {
        result = evolve(pool, gold, config, opt.workers);
    } else if (opt.method == "grid") {
        const auto spec = GridSpec::from_step(opt.grid_step, pool.size(), opt.grid_cap);
        result = grid_search(pool, gold, config.fitness_metric, spec);
    } else {
        throw config_error("unknown method '" + opt.method + "' (expected ga or grid)");
    }

    std::cout << "split: " << opt.split << "  metric: " << opt.metric
              << "  method: " << opt.method << "  models: " << pool.size() << " (set: "
              << opt.set_tag << ")\n";
    std::cout << "single-model fitness:\n";
    for (std::size_t m = 0; m < pool.size(); ++m)
        std::cout << "  " << result.model_names[m] << "  "
                  << format4(result.single_fitness[m]) << "\n";
    std::cout << "uniform-average fitness: " << format4(result.uniform_fitness) << "\n";
    std::cout << "optimized fitness: " << format4(result.dev_fitness) << "\n";
    std::cout << "weights:";
    for (std::size_t m = 0; m < pool.size(); ++m)
        std::cout << (m == 0 ? " " : ", ") << result.model_names[m] << "="
                  << format4(result.weights[m]);
    std::cout << "\n";

    if (!opt.out_path.empty()) {
        write_text_file(opt.out_path, result_to_json(result).dump(2) + "\n");
        std::cout << "wrote result to '" << opt.out_path << "'\n";
    }
    return 0;
}

int cmd_apply(const std::string& result_path, const std::string& manifest_path,
              const std::string& split, const std::string& out_path,
              std::string labels_out_path) {
    std::ifstream in(result_path, std::ios::binary);
    if (!in) throw io_error("cannot open result file '" + result_path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("result file '" + result_path + "' is not valid JSON: " + e.what());
    }
    const auto result = result_from_json(j);

    const auto manifest = RunManifest::load(manifest_path);
    const auto labels = manifest.labels();
    if (manifest.splits().find(split) == manifest.splits().end())
        throw config_error("manifest declares no split named '" + split + "'");

    // Restrict the manifest to the models named in the result, keeping
    // manifest order; apply_weights then enforces exact order agreement.
    std::set<std::string> wanted(result.model_names.begin(), result.model_names.end());
    std::vector<PredictionMatrix> matrices;
    std::map<std::string, std::string> tags;
    for (const auto& model : manifest.models()) {
        if (!wanted.count(model.name)) continue;
        matrices.push_back(read_prediction_csv(manifest.resolve(model.files.at(split)), labels,
                                               model.name, split, model.kind));
        tags[model.name] = model.set_tag;
    }
    if (matrices.empty())
        throw data_error("none of the result's models appear in the manifest");
    const ModelPool pool(std::move(matrices), std::move(tags));

    const auto ensemble = apply_weights(result, pool);
    write_prediction_csv(ensemble, labels, out_path);
    if (labels_out_path.empty()) labels_out_path = default_labels_out(out_path);
    write_label_csv(argmax_labels(ensemble), labels, labels_out_path);
    std::cout << "wrote ensemble probabilities to '" << out_path << "'\n";
    std::cout << "wrote ensemble labels to '" << labels_out_path << "'\n";
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gold_path,
             const std::string& labels_csv, bool as_json) {
    std::ifstream peek(pred_path, std::ios::binary);
    if (!peek) throw io_error("cannot open prediction file '" + pred_path + "'");
    const auto header = csv::split_fields(csv::read_line(peek));
    peek.close();
    const bool hard_labels = header.size() == 2 && detail::fold_label(header[0]) == "id" &&
                             detail::fold_label(header[1]) == "label";

    std::vector<std::string> label_names;
    if (!labels_csv.empty()) {
        label_names = parse_string_list(labels_csv);
    } else if (hard_labels) {
        throw config_error("--labels is required when evaluating an id,label file");
    } else {
        if (header.size() < 3 || detail::fold_label(header[0]) != "id")
            throw data_error("prediction file '" + pred_path +
                             "': header must be id,<labels...>");
        label_names.assign(header.begin() + 1, header.end());
        for (auto& name : label_names) name = detail::trim(name);
    }
    const LabelSet labels(label_names);

    Predictions predictions =
        hard_labels ? read_label_csv(pred_path, labels)
                    : argmax_labels(read_prediction_csv(pred_path, labels, "ensemble", "eval"));
    const auto gold = read_label_csv(gold_path, labels);
    const auto report = full_report(gold, predictions, labels);
    if (as_json)
        std::cout << report_to_json(report).dump(2) << "\n";
    else
        std::cout << report_to_text(report);
    return 0;
}

int cmd_stats(const std::string& corpus_path, const std::string& vocab_path,
              const std::string& labels_csv, bool count_tokens, bool as_json) {
    const auto records = load_corpus(corpus_path);
    const LabelSet labels(labels_csv.empty() ? canonical_offensive_labels()
                                             : parse_string_list(labels_csv));
    const auto table = class_counts(records, labels);
    if (table.other > 0)
        std::cerr << "warning: " << table.other
                  << " record(s) carry labels outside the label set\n";

    nlohmann::ordered_json j;
    if (as_json) {
        j["class_counts"] = class_counts_to_json(table);
    } else {
        std::size_t width = 5; // fits "Total"
        for (const auto& label : table.labels) width = std::max(width, label.size());
        char line[256];
        std::snprintf(line, sizeof(line), "%-*s  %10s\n", static_cast<int>(width), "Classifiers",
                      "Count");
        std::cout << line;
        for (std::size_t i = 0; i < table.labels.size(); ++i) {
            std::snprintf(line, sizeof(line), "%-*s  %10lld\n", static_cast<int>(width),
                          table.labels[i].c_str(), static_cast<long long>(table.counts[i]));
            std::cout << line;
        }
        if (table.other > 0) {
            std::snprintf(line, sizeof(line), "%-*s  %10lld\n", static_cast<int>(width), "other",
                          static_cast<long long>(table.other));
            std::cout << line;
        }
        std::snprintf(line, sizeof(line), "%-*s  %10lld\n", static_cast<int>(width), "Total",
                      static_cast<long long>(table.total));
        std::cout << line;
    }

    if (!vocab_path.empty()) {
        const auto vocab = load_vocabulary(vocab_path);
        const auto report = oov_rate(records, vocab, count_tokens);
        if (as_json) {
            j["oov"] = oov_report_to_json(report);
        } else {
            std::cout << "\nOOV " << (count_tokens ? "tokens" : "types") << ": "
                      << report.oov_types << " / " << report.total_types << " = "
                      << format4(report.oov_rate * 100.0) << "%  (vocabulary size "
                      << report.vocab_size << ")\n";
        }
    }
    if (as_json) std::cout << j.dump(2) << "\n";
    return 0;
}

struct SynthOptions {
    std::uint64_t seed = 0;
    std::size_t models = 3;
    std::size_t classes = 4;
    std::size_t examples = 200;
    std::string accuracies;
    std::string out_dir;
};

int cmd_synth(const SynthOptions& opt) {
    const auto accuracies = parse_double_list(opt.accuracies);
    const auto labels = synth_labels(opt.classes);
    std::filesystem::create_directories(opt.out_dir);
    const std::filesystem::path dir(opt.out_dir);

    std::vector<ManifestModel> manifest_models;
    std::map<std::string, std::string> split_files;
    // dev draws from `seed`, test from `seed+1`; both splits share the
    // same generating distribution.
    const std::vector<std::pair<std::string, std::uint64_t>> splits = {
        {"dev", opt.seed}, {"test", opt.seed + 1}};
    for (const auto& [split, split_seed] : splits) {
        auto [pool, gold] =
            synth_generate(split_seed, opt.examples, opt.classes, opt.models, accuracies, split);
        const std::string gold_file = "gold_" + split + ".csv";
        write_label_csv(gold, labels, (dir / gold_file).string());
        split_files[split] = gold_file;
        for (std::size_t m = 0; m < pool.size(); ++m) {
            const auto& matrix = pool.model(m);
            const std::string pred_file = matrix.model_name() + "_" + split + ".csv";
            write_prediction_csv(matrix, labels, (dir / pred_file).string());
            if (split == "dev") {
                ManifestModel model;
                model.name = matrix.model_name();
                model.set_tag = "synthetic";
                model.kind = PredictionKind::probabilities;
                manifest_models.push_back(std::move(model));
            }
            manifest_models[m].files[split] = pred_file;
        }
    }

    const auto manifest =
        RunManifest::make(labels.names(), std::move(split_files), std::move(manifest_models), dir);
    write_text_file((dir / "manifest.json").string(), manifest.to_json().dump(2) + "\n");
    std::cout << "wrote synthetic run to '" << opt.out_dir << "' (manifest.json, "
              << 2 * (opt.models + 1) << " csv files)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted-ensemble optimization over classifier probability exports"};
    app.require_subcommand(1);

    std::string manifest_path, result_path, pred_path, gold_path, corpus_path;
    std::string vocab_path, labels_csv, out_path, labels_out_path;
    std::string split = "dev";
    bool as_json = false, count_tokens = false;

    auto* validate = app.add_subcommand("validate", "Check a manifest and its prediction files");
    validate->add_option("manifest", manifest_path, "Run manifest (JSON)")->required();

    OptimizeOptions opt;
    auto* optimize =
        app.add_subcommand("optimize", "Search ensemble weights on a development split");
    optimize->add_option("manifest", opt.manifest_path, "Run manifest (JSON)")->required();
    optimize->add_option("--split", opt.split, "Split to optimize on (default dev)");
    optimize->add_option("--metric", opt.metric, "weighted_f1 or macro_f1");
    optimize->add_option("--set", opt.set_tag, "Model set tag, or all/overall");
    optimize->add_option("--method", opt.method, "ga (default) or grid");
    optimize->add_option("--population", opt.ga.population_size, "GA population size");
    optimize->add_option("--generations", opt.ga.generations, "GA generation limit");
    optimize->add_option("--tournament", opt.ga.tournament_size, "Tournament size");
    optimize->add_option("--crossover-rate", opt.ga.crossover_rate, "Crossover probability");
    optimize->add_option("--mutation-rate", opt.ga.mutation_rate_per_gene,
                         "Per-gene mutation probability");
    optimize->add_option("--mutation-sigma", opt.ga.mutation_sigma, "Mutation noise sigma");
    optimize->add_option("--elitism", opt.ga.elitism_count, "Elite genomes kept per generation");
    optimize->add_option("--patience", opt.ga.patience,
                         "Generations without improvement before stopping");
    optimize->add_option("--seed", opt.ga.seed, "Root RNG seed");
    optimize->add_option("--workers", opt.workers, "Fitness evaluation threads");
    optimize->add_option("--grid-step", opt.grid_step, "Grid spacing (method grid)");
    optimize->add_option("--grid-cap", opt.grid_cap, "Maximum grid points (method grid)");
    optimize->add_option("--out", opt.out_path, "Result JSON path");

    auto* apply = app.add_subcommand("apply", "Apply optimized weights to another split");
    apply->add_option("result", result_path, "Result JSON from optimize")->required();
    apply->add_option("manifest", manifest_path, "Run manifest (JSON)")->required();
    apply->add_option("--split", split, "Split to apply to (default dev)");
    apply->add_option("--out", out_path, "Ensemble probability CSV path")->required();
    apply->add_option("--labels-out", labels_out_path,
                      "Hard-label CSV path (default: <out>_labels.csv)");

    auto* eval = app.add_subcommand("eval", "Score predictions against gold labels");
    eval->add_option("predictions", pred_path, "Prediction CSV (probabilities or id,label)")
        ->required();
    eval->add_option("gold", gold_path, "Gold label CSV")->required();
    eval->add_option("--labels", labels_csv, "Comma-separated label set");
    eval->add_flag("--json", as_json, "Machine-readable report");

    auto* stats = app.add_subcommand("stats", "Corpus class counts and OOV rate");
    stats->add_option("corpus", corpus_path, "Corpus TSV (text<TAB>label)")->required();
    stats->add_option("--vocab", vocab_path, "Reference vocabulary, one token per line");
    stats->add_option("--labels", labels_csv, "Comma-separated label set");
    stats->add_flag("--count-tokens", count_tokens, "Token-level OOV instead of type-level");
    stats->add_flag("--json", as_json, "Machine-readable output");

    SynthOptions synth_opt;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic run directory");
    synth->add_option("--seed", synth_opt.seed, "Generator seed");
    synth->add_option("--models", synth_opt.models, "Number of models");
    synth->add_option("--classes", synth_opt.classes, "Number of classes");
    synth->add_option("--examples", synth_opt.examples, "Examples per split");
    synth->add_option("--accuracies", synth_opt.accuracies,
                      "Comma-separated per-model accuracies in [0,1]")
        ->required();
    synth->add_option("--out", synth_opt.out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
        if (validate->parsed()) return cmd_validate(manifest_path);
        if (optimize->parsed()) return cmd_optimize(opt);
        if (apply->parsed())
            return cmd_apply(result_path, manifest_path, split, out_path, labels_out_path);
        if (eval->parsed()) return cmd_eval(pred_path, gold_path, labels_csv, as_json);
        if (stats->parsed())
            return cmd_stats(corpus_path, vocab_path, labels_csv, count_tokens, as_json);
        if (synth->parsed()) return cmd_synth(synth_opt);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[2]: " << e.what() << "\n";
        return 2;
    } catch (const config_error& e) {
        std::cerr << "error[2]: " << e.what() << "\n";
        return 2;
    } catch (const data_error& e) {
        std::cerr << "error[3]: " << e.what() << "\n";
        return 3;
    } catch (const io_error& e) {
        std::cerr << "error[4]: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error[2]: " << e.what() << "\n";
        return 2;
    }
}
