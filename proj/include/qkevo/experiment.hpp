#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qkevo/evolve.hpp"
#include "qkevo/preprocess.hpp"

namespace qkevo {

/// Configuration mistakes a caller can fix (unknown dataset name, bad
/// technique, ...); the CLI maps these to exit code 2.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class TechniqueKind { SupervisedGa, UnsupervisedGa, PauliZz, Rbf };

inline const char* technique_kind_name(TechniqueKind t) {
    switch (t) {
        case TechniqueKind::SupervisedGa: return "supervised";
        case TechniqueKind::UnsupervisedGa: return "unsupervised";
        case TechniqueKind::PauliZz: return "pauli-zz";
        case TechniqueKind::Rbf: return "rbf";
    }
    return "?";
}

inline TechniqueKind parse_technique(const std::string& s) {
    if (s == "supervised") return TechniqueKind::SupervisedGa;
    if (s == "unsupervised") return TechniqueKind::UnsupervisedGa;
    if (s == "pauli-zz") return TechniqueKind::PauliZz;
    if (s == "rbf") return TechniqueKind::Rbf;
    throw UsageError("unknown technique '" + s +
                     "' (expected supervised|unsupervised|pauli-zz|rbf)");
}

struct ExperimentConfig {
    std::string dataset;
    TechniqueKind technique = TechniqueKind::SupervisedGa;
    int repeats = 10;
    std::uint64_t seed = 1;
    EvolveConfig evolve;            // seed is overwritten per run
    PreprocessOptions preprocess;   // variance target, pca-on-full switch
    int n_samples = 400;            // synthetic datasets
    double noise = 0.1;
    int zz_reps = 2;
    std::optional<double> rbf_gamma;  // default: 1/(m Var(X_train))
    std::string data_dir = "data";
};

/// Registry of dataset names accepted by --dataset.
inline const std::vector<std::string>& dataset_names() {
    static const std::vector<std::string> names = {"moons",      "xor",        "circles",
                                                   "wine",       "iris",       "cancer",
                                                   "irrigation", "parkinsons", "drug"};
    return names;
}

inline Dataset load_named_dataset(const ExperimentConfig& cfg) {
    const std::string& name = cfg.dataset;
    if (name == "moons") return make_moons(cfg.n_samples, cfg.noise, cfg.seed);
    if (name == "xor") return make_xor(cfg.n_samples, cfg.noise, cfg.seed);
    if (name == "circles") return make_circles(cfg.n_samples, cfg.noise, cfg.seed);

    std::string label;
    if (name == "wine" || name == "iris" || name == "cancer") label = "target";
    else if (name == "irrigation") label = "pump";
    else if (name == "parkinsons") label = "status";
    else if (name == "drug") label = "Drug";
    else throw UsageError("unknown dataset '" + name + "'");

    const std::filesystem::path path = std::filesystem::path(cfg.data_dir) / (name + ".csv");
    Dataset d = load_csv(path.string(), label);
    d.name = name;
    return d;
}

struct RunRecord {
    int test_index = 0;
    double accuracy = 0.0;
    double entropy = 0.0;
    std::optional<int> gates;  // GA rows only
};

struct ExperimentResult {
    std::string dataset;
    TechniqueKind technique = TechniqueKind::SupervisedGa;
    std::vector<RunRecord> rows;
    BenchmarkSummary summary;
    std::vector<EvolveResult> ga_runs;        // empty for baselines
    std::vector<std::uint64_t> run_seeds;
    EvolveConfig evolve_config;               // echo (GA techniques)
};

/// Run the full protocol for one dataset + technique: per repeat i, re-split
/// and preprocess with seed + i, then either evolve a kernel circuit or fit
/// the requested baseline, scoring accuracy on the test split.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.repeats < 1) throw UsageError("repeats must be >= 1");
    const Dataset full = load_named_dataset(cfg);

    ExperimentResult out;
    out.dataset = cfg.dataset;
    out.technique = cfg.technique;

    auto splits_for = [&](std::uint64_t seed) {
        return preprocess(full, seed, cfg.preprocess).splits;
    };

    std::vector<double> accs;
    std::vector<double> ents;

    if (cfg.technique == TechniqueKind::SupervisedGa ||
        cfg.technique == TechniqueKind::UnsupervisedGa) {
        EvolveConfig ec = cfg.evolve;
        ec.technique = cfg.technique == TechniqueKind::SupervisedGa ? Technique::Supervised
                                                                    : Technique::Unsupervised;
        ec.seed = cfg.seed;
        out.evolve_config = ec;
        BenchmarkResult bench = run_benchmark(ec, splits_for, cfg.repeats);
        for (int i = 0; i < cfg.repeats; ++i) {
            const EvolveResult& r = bench.runs[static_cast<std::size_t>(i)];
            out.rows.push_back({i + 1, r.test_accuracy, r.entropy, r.gates});
            out.run_seeds.push_back(r.seed);
            accs.push_back(r.test_accuracy);
            ents.push_back(r.entropy);
        }
        out.ga_runs = std::move(bench.runs);
        out.summary = bench.summary;
        return out;
    }

    for (int i = 0; i < cfg.repeats; ++i) {
        const std::uint64_t run_seed = cfg.seed + static_cast<std::uint64_t>(i);
        const DataSplits data = splits_for(run_seed);
        double acc = 0.0;
        double ent = 0.0;
        if (cfg.technique == TechniqueKind::PauliZz) {
            const KernelMatrix Ktrain = pauli_zz_kernel(data.train.X, cfg.zz_reps);
            const MulticlassModel model =
                train_multiclass(Ktrain, data.train.y, cfg.evolve.svm_c);
            const KernelMatrix Ktest =
                pauli_zz_kernel(data.test.X, data.train.X, cfg.zz_reps);
            acc = accuracy(predict(model, Ktest), data.test.y);
            ent = entanglement_entropy_zz(data.train.X, cfg.zz_reps);
        } else {
            const double gamma = cfg.rbf_gamma ? *cfg.rbf_gamma
                                               : rbf_gamma_scale(data.train.X);
            const KernelMatrix Ktrain = rbf_kernel(data.train.X, data.train.X, gamma);
            const MulticlassModel model =
                train_multiclass(Ktrain, data.train.y, cfg.evolve.svm_c);
            const KernelMatrix Ktest = rbf_kernel(data.test.X, data.train.X, gamma);
            acc = accuracy(predict(model, Ktest), data.test.y);
            ent = 0.0;  // classical kernel: no circuit, no entanglement
        }
        out.rows.push_back({i + 1, acc, ent, std::nullopt});
        out.run_seeds.push_back(run_seed);
        accs.push_back(acc);
        ents.push_back(ent);
    }
    out.summary = summarize(accs, ents);
    return out;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Fixed schema: header `test,acc,entropy,gates`, one row per repeat, gates
/// blank for baseline rows. Formatting is deterministic so identical runs
/// produce byte-identical files.
inline void write_results_csv(const std::vector<RunRecord>& rows, std::ostream& out) {
    out << "test,acc,entropy,gates\n";
    for (const RunRecord& r : rows) {
        out << r.test_index << ',' << detail::format_double(r.accuracy) << ','
            << detail::format_double(r.entropy) << ',';
        if (r.gates) out << *r.gates;
        out << '\n';
    }
}

inline std::vector<RunRecord> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "test,acc,entropy,gates")
        throw std::runtime_error(path + ": unexpected results.csv header");
    std::vector<RunRecord> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = detail::parse_csv_line(line);
        if (fields.size() != 4) throw std::runtime_error(path + ": malformed row");
        RunRecord r;
        r.test_index = std::stoi(fields[0]);
        r.accuracy = std::stod(fields[1]);
        r.entropy = std::stod(fields[2]);
        if (!fields[3].empty()) r.gates = std::stoi(fields[3]);
        rows.push_back(r);
    }
    return rows;
}

inline nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j{{"dataset", cfg.dataset},
                     {"technique", technique_kind_name(cfg.technique)},
                     {"repeats", cfg.repeats},
                     {"seed", cfg.seed},
                     {"variance_target", cfg.preprocess.variance_target},
                     {"pca_on_full", cfg.preprocess.pca_on_full},
                     {"n_samples", cfg.n_samples},
                     {"noise", cfg.noise},
                     {"zz_reps", cfg.zz_reps},
                     {"evolve", evolve_config_to_json(cfg.evolve)}};
    if (cfg.rbf_gamma)
        j["rbf_gamma"] = *cfg.rbf_gamma;
    else
        j["rbf_gamma"] = nullptr;
    return j;
}

inline nlohmann::json summary_to_json(const ExperimentConfig& cfg, const ExperimentResult& res) {
    return nlohmann::json{{"dataset", res.dataset},
                          {"technique", technique_kind_name(res.technique)},
                          {"repeats", static_cast<int>(res.rows.size())},
                          {"mean_accuracy", res.summary.mean_accuracy},
                          {"std_accuracy", res.summary.std_accuracy},
                          {"mean_entropy", res.summary.mean_entropy},
                          {"std_entropy", res.summary.std_entropy},
                          {"config", experiment_config_to_json(cfg)}};
}

/// Execute and persist one experiment: <out>/results.csv, <out>/summary.json
/// and <out>/replay/run_<i>.json.
inline ExperimentResult run_and_write(const ExperimentConfig& cfg, const std::string& out_dir) {
    const ExperimentResult res = run_experiment(cfg);
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "replay");

    {
        std::ofstream out(fs::path(out_dir) / "results.csv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write results.csv in " + out_dir);
        write_results_csv(res.rows, out);
    }
    {
        std::ofstream out(fs::path(out_dir) / "summary.json", std::ios::binary);
        out << summary_to_json(cfg, res).dump(2) << '\n';
    }
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        nlohmann::json j;
        if (!res.ga_runs.empty()) {
            EvolveConfig ec = res.evolve_config;
            ec.seed = res.ga_runs[i].seed;
            j = evolve_result_to_json(res.ga_runs[i], ec);
        } else {
            j = nlohmann::json{{"seed", res.run_seeds[i]},
                               {"accuracy", res.rows[i].accuracy},
                               {"entropy", res.rows[i].entropy},
                               {"config", experiment_config_to_json(cfg)}};
        }
        std::ofstream out(fs::path(out_dir) / "replay" /
                          ("run_" + std::to_string(i + 1) + ".json"));
        out << j.dump(2) << '\n';
    }
    return res;
}

}  // namespace qkevo
