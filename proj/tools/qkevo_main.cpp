// qkevo command line: run kernel-evolution experiments and baselines, export
// decision-boundary grids, entropy-vs-accuracy regressions and consolidated
// result tables. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkevo/qkevo.hpp"

namespace {

struct CommonOpts {
    std::string dataset;
    std::string technique = "supervised";
    std::string config_file;
    int repeats = 10;
    std::uint64_t seed = 1;
    std::string out;
    std::string data_dir = "data";
    int pop_size = 10;
    double mutation_prob = 0.5;
    int max_generations = 40;
    double target_fitness = -1.0;  // < 0: technique default
    double svm_c = 10.0;
    bool pca_on_full = false;
    double variance_target = 0.95;
    double noise = 0.1;
    int n_samples = 400;
    int zz_reps = 2;
    double rbf_gamma = -1.0;  // < 0: scale heuristic
    int initial_genes = 0;
    int max_genes = 1024;
};

void add_common_options(CLI::App* cmd, CommonOpts& o, bool with_repeats) {
    cmd->add_option("--dataset", o.dataset,
                    "Dataset name (moons|xor|circles|wine|iris|cancer|irrigation|parkinsons|drug)");
    cmd->add_option("--technique", o.technique,
                    "supervised | unsupervised | pauli-zz | rbf");
    if (with_repeats) cmd->add_option("--repeats", o.repeats, "Independent runs (seed ladder)");
    cmd->add_option("--seed", o.seed, "Base seed; run i uses seed + i");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--data-dir", o.data_dir, "Directory holding the bundled CSV datasets");
    cmd->add_option("--pop-size", o.pop_size, "Mutants per generation (k)");
    cmd->add_option("--mutation-prob", o.mutation_prob, "Per-gene mutation probability");
    cmd->add_option("--max-generations", o.max_generations, "Generation cap per gene count");
    cmd->add_option("--target-fitness", o.target_fitness,
                    "Validation fitness target (default 0.95 supervised, stationarity unsupervised)");
    cmd->add_option("--svm-c", o.svm_c, "Soft-margin box constraint C");
    cmd->add_flag("--pca-on-full", o.pca_on_full, "Fit PCA on the full dataset (compatibility mode)");
    cmd->add_option("--variance-target", o.variance_target, "PCA explained-variance target");
    cmd->add_option("--noise", o.noise, "Noise level for synthetic datasets");
    cmd->add_option("--samples", o.n_samples, "Sample count for synthetic datasets");
    cmd->add_option("--zz-reps", o.zz_reps, "ZZ feature map repetitions");
    cmd->add_option("--rbf-gamma", o.rbf_gamma, "RBF gamma (default: 1/(m Var))");
    cmd->add_option("--initial-genes", o.initial_genes, "Starting gene count (default 2x qubits)");
    cmd->add_option("--max-genes", o.max_genes, "Gene count cap for the bracketing search");
    cmd->add_option("--config", o.config_file,
                    "File with key=value lines (keys match the flag names); flags override");
}

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw qkevo::UsageError("config: expected a boolean, got '" + v + "'");
}

/// Apply a key=value config file ('#' starts a comment). Keys use the flag
/// names without the leading dashes. Command-line flags override these
/// values because the file is applied before CLI11 parses argv.
void apply_config_file(const std::string& path, CommonOpts& o, int& resolution) {
    std::ifstream in(path);
    if (!in) throw qkevo::UsageError("config: cannot open " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string entry = strip(line);
        if (entry.empty()) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw qkevo::UsageError("config: line " + std::to_string(line_no) +
                                    " is not key=value");
        const std::string key = strip(entry.substr(0, eq));
        const std::string value = strip(entry.substr(eq + 1));
        try {
            if (key == "dataset") o.dataset = value;
            else if (key == "technique") o.technique = value;
            else if (key == "repeats") o.repeats = std::stoi(value);
            else if (key == "seed") o.seed = std::stoull(value);
            else if (key == "out") o.out = value;
            else if (key == "data-dir") o.data_dir = value;
            else if (key == "pop-size") o.pop_size = std::stoi(value);
            else if (key == "mutation-prob") o.mutation_prob = std::stod(value);
            else if (key == "max-generations") o.max_generations = std::stoi(value);
            else if (key == "target-fitness") o.target_fitness = std::stod(value);
            else if (key == "svm-c") o.svm_c = std::stod(value);
            else if (key == "pca-on-full") o.pca_on_full = parse_bool(value);
            else if (key == "variance-target") o.variance_target = std::stod(value);
            else if (key == "noise") o.noise = std::stod(value);
            else if (key == "samples") o.n_samples = std::stoi(value);
            else if (key == "zz-reps") o.zz_reps = std::stoi(value);
            else if (key == "rbf-gamma") o.rbf_gamma = std::stod(value);
            else if (key == "initial-genes") o.initial_genes = std::stoi(value);
            else if (key == "max-genes") o.max_genes = std::stoi(value);
            else if (key == "resolution") resolution = std::stoi(value);
            else
                throw qkevo::UsageError("config: unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw qkevo::UsageError("config: bad value for '" + key + "': " + value);
        }
    }
}

/// The --config path must be known before CLI11 applies the other flags.
std::string prescan_config_path(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

qkevo::ExperimentConfig to_config(const CommonOpts& o) {
    if (o.dataset.empty())
        throw qkevo::UsageError("--dataset is required (flag or config file)");
    qkevo::ExperimentConfig cfg;
    cfg.dataset = o.dataset;
    cfg.technique = qkevo::parse_technique(o.technique);
    cfg.repeats = o.repeats;
    cfg.seed = o.seed;
    cfg.data_dir = o.data_dir;
    cfg.n_samples = o.n_samples;
    cfg.noise = o.noise;
    cfg.zz_reps = o.zz_reps;
    if (o.rbf_gamma > 0.0) cfg.rbf_gamma = o.rbf_gamma;
    cfg.preprocess.variance_target = o.variance_target;
    cfg.preprocess.pca_on_full = o.pca_on_full;
    cfg.evolve.population_size = o.pop_size;
    cfg.evolve.mutation_prob = o.mutation_prob;
    cfg.evolve.max_generations = o.max_generations;
    if (o.target_fitness >= 0.0) cfg.evolve.target_fitness = o.target_fitness;
    cfg.evolve.svm_c = o.svm_c;
    cfg.evolve.initial_genes = o.initial_genes;
    cfg.evolve.max_genes = o.max_genes;
    return cfg;
}

std::string default_out(const CommonOpts& o) {
    return "results/" + o.dataset + "-" + o.technique;
}

int cmd_run(const CommonOpts& o) {
    const qkevo::ExperimentConfig cfg = to_config(o);
    const std::string out_dir = o.out.empty() ? default_out(o) : o.out;
    const qkevo::ExperimentResult res = qkevo::run_and_write(cfg, out_dir);
    std::cout << res.dataset << " / " << qkevo::technique_kind_name(res.technique) << ": "
              << res.rows.size() << " run(s), mean acc "
              << qkevo::detail::format_double(res.summary.mean_accuracy) << ", mean entropy "
              << qkevo::detail::format_double(res.summary.mean_entropy) << "\n"
              << "wrote " << out_dir << "/results.csv, summary.json, replay/\n";
    return 0;
}

int cmd_boundary(const CommonOpts& o, int resolution) {
    const qkevo::ExperimentConfig cfg = to_config(o);
    const std::string out_dir = o.out.empty() ? default_out(o) + "-boundary" : o.out;
    const qkevo::BoundaryResult res = qkevo::run_boundary(cfg, resolution, out_dir);
    std::cout << "boundary grid " << res.resolution << "x" << res.resolution << " ("
              << res.grid_rows << " rows, " << res.technique << ") -> " << out_dir
              << "/boundary.csv, points.csv\n";
    return 0;
}

int cmd_entropy_trend(const std::vector<std::string>& dirs, const std::string& out) {
    std::vector<qkevo::TrendPoint> series;
    const qkevo::TrendResult trend = qkevo::entropy_trend(dirs, &series);
    std::cout << "slope " << qkevo::detail::format_double(trend.slope) << ", intercept "
              << qkevo::detail::format_double(trend.intercept) << ", n " << trend.count << "\n";
    if (!out.empty()) {
        qkevo::write_trend_files(trend, series, out);
        std::cout << "wrote " << out << "/series.csv, trend.json\n";
    }
    return 0;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out) {
    const std::string table = qkevo::make_report(dirs);
    if (out.empty()) {
        std::cout << table;
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + out);
        f << table;
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Genetic search over quantum-kernel encoding circuits for SVM classification"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run = app.add_subcommand("run", "Run an experiment and write result files");
    add_common_options(run, run_opts, true);

    CommonOpts boundary_opts;
    int resolution = 200;
    CLI::App* boundary =
        app.add_subcommand("boundary", "Export a decision-boundary grid for a 2-feature dataset");
    add_common_options(boundary, boundary_opts, false);
    boundary->add_option("--resolution", resolution, "Lattice points per axis");

    std::vector<std::string> trend_dirs;
    std::string trend_out;
    CLI::App* trend =
        app.add_subcommand("entropy-trend", "Regress accuracy on entropy across GA result dirs");
    trend->add_option("dirs", trend_dirs, "Result directories")->required();
    trend->add_option("--out", trend_out, "Directory for series.csv and trend.json");

    std::vector<std::string> report_dirs;
    std::string report_out;
    CLI::App* report =
        app.add_subcommand("report", "Merge result directories into per-dataset tables");
    report->add_option("dirs", report_dirs, "Result directories")->required();
    report->add_option("--out", report_out, "Write the table to a file instead of stdout");

    try {
        const std::string config_path = prescan_config_path(argc, argv);
        if (!config_path.empty()) {
            apply_config_file(config_path, run_opts, resolution);
            apply_config_file(config_path, boundary_opts, resolution);
        }
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(run_opts);
        if (boundary->parsed()) return cmd_boundary(boundary_opts, resolution);
        if (trend->parsed()) return cmd_entropy_trend(trend_dirs, trend_out);
        if (report->parsed()) return cmd_report(report_dirs, report_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const qkevo::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
