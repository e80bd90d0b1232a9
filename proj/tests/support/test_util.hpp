#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "ensopt/labels.hpp"
#include "ensopt/pool.hpp"
#include "ensopt/predictions.hpp"

namespace testutil {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ensopt_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs a shell command capturing stdout/stderr and the exit code.
inline ProcessResult run(const std::string& command) {
    TempDir dir("proc");
    const std::string out_file = dir.file("out");
    const std::string err_file = dir.file("err");
    const std::string full = command + " > '" + out_file + "' 2> '" + err_file + "'";
    const int status = std::system(full.c_str());
    ProcessResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
}

// Path of the CLI under test; configured by CMake via environment.
inline std::string cli_path() {
    if (const char* env = std::getenv("ENSOPT_CLI")) return env;
    return "./tools/ensopt";
}

inline std::vector<std::string> make_ids(std::size_t n) {
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ids.push_back("ex" + std::to_string(i));
    return ids;
}

// Matrix from explicit rows, bypassing validation (tests build broken
// fixtures too).
inline ensopt::PredictionMatrix matrix_from_rows(const std::string& name,
                                                 const std::string& split,
                                                 std::vector<std::string> ids,
                                                 const std::vector<std::vector<double>>& rows,
                                                 bool checked = true) {
    std::vector<double> values;
    for (const auto& row : rows) values.insert(values.end(), row.begin(), row.end());
    if (checked)
        return ensopt::PredictionMatrix::probabilities(name, split, std::move(ids),
                                                       std::move(values), rows.front().size());
    return ensopt::PredictionMatrix::unchecked(name, split, std::move(ids), std::move(values),
                                               rows.front().size());
}

// Random aligned gold/pred class lists for metric oracle comparisons.
struct RandomInstance {
    std::vector<std::size_t> gold;
    std::vector<std::size_t> pred;
    std::size_t num_classes = 2;
};

inline RandomInstance random_instance(std::mt19937& gen, std::size_t max_n = 200,
                                      std::size_t max_classes = 6) {
    std::uniform_int_distribution<std::size_t> n_dist(1, max_n);
    std::uniform_int_distribution<std::size_t> c_dist(2, max_classes);
    RandomInstance inst;
    inst.num_classes = c_dist(gen);
    const std::size_t n = n_dist(gen);
    std::uniform_int_distribution<std::size_t> cls(0, inst.num_classes - 1);
    for (std::size_t i = 0; i < n; ++i) {
        inst.gold.push_back(cls(gen));
        inst.pred.push_back(cls(gen));
    }
    return inst;
}

inline ensopt::GoldLabels to_labels(const std::vector<std::size_t>& classes,
                                    std::size_t num_classes) {
    return ensopt::GoldLabels(make_ids(classes.size()), std::vector<std::size_t>(classes),
                              num_classes);
}

} // namespace testutil
