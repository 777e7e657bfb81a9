#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qkevo/experiment.hpp"

namespace qkevo {

// ---------------------------------------------------------------------------
// Decision-boundary grids
// ---------------------------------------------------------------------------

struct BoundaryResult {
    int resolution = 0;
    int grid_rows = 0;
    std::string technique;
};

namespace detail {

/// Signed decision value for plotting: the positive-class margin for binary
/// problems, the predicted label for multiclass ones.
inline Eigen::VectorXd boundary_values(const MulticlassModel& model, const KernelMatrix& K) {
    if (model.per_class.size() == 2)
        return decision_function(model.per_class.back().second, K);
    const std::vector<int> labels = predict(model, K);
    Eigen::VectorXd v(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = labels[i];
    return v;
}

inline void write_points_csv(const std::filesystem::path& path, const Dataset& train,
                             const Dataset& test) {
    std::ofstream out(path, std::ios::binary);
    out << "x,y,label,split\n";
    auto dump = [&](const Dataset& d) {
        for (Eigen::Index i = 0; i < d.n(); ++i)
            out << format_double(d.X(i, 0)) << ',' << format_double(d.X(i, 1)) << ','
                << d.y[static_cast<std::size_t>(i)] << ',' << d.split << '\n';
    };
    dump(train);
    dump(test);
}

}  // namespace detail

/// Train one model for the configured technique and evaluate its decision
/// function on a resolution^2 lattice over the scaled feature box, padded by
/// 10% of the range on each side. Writes boundary.csv (x,y,value) and
/// points.csv (train/test points) into out_dir. The dataset must reduce to
/// exactly 2 features.
inline BoundaryResult run_boundary(const ExperimentConfig& cfg, int resolution,
                                   const std::string& out_dir) {
    if (resolution < 2) throw UsageError("boundary: resolution must be >= 2");
    const Dataset full = load_named_dataset(cfg);
    const PreprocessedSplits pre = preprocess(full, cfg.seed, cfg.preprocess);
    const DataSplits& data = pre.splits;
    if (data.train.m() != 2)
        throw UsageError("boundary: dataset reduces to " + std::to_string(data.train.m()) +
                         " features; only 2-feature problems are supported");

    constexpr double pi = std::numbers::pi;
    const double pad = 0.1 * pi;  // 10% of the scaled box range
    const double lo = -0.5 * pi - pad;
    const double hi = 0.5 * pi + pad;

    Eigen::MatrixXd grid(static_cast<Eigen::Index>(resolution) * resolution, 2);
    for (int iy = 0; iy < resolution; ++iy) {
        const double gy = lo + (hi - lo) * iy / (resolution - 1);
        for (int ix = 0; ix < resolution; ++ix) {
            const double gx = lo + (hi - lo) * ix / (resolution - 1);
            const Eigen::Index row = static_cast<Eigen::Index>(iy) * resolution + ix;
            grid(row, 0) = gx;
            grid(row, 1) = gy;
        }
    }

    Eigen::VectorXd values;
    if (cfg.technique == TechniqueKind::SupervisedGa ||
        cfg.technique == TechniqueKind::UnsupervisedGa) {
        EvolveConfig ec = cfg.evolve;
        ec.technique = cfg.technique == TechniqueKind::SupervisedGa ? Technique::Supervised
                                                                    : Technique::Unsupervised;
        ec.seed = cfg.seed;
        const EvolveResult evo = evolve(ec, data);
        const MulticlassModel model =
            train_multiclass(quantum_kernel(evo.best, data.train.X), data.train.y, ec.svm_c);
        values = detail::boundary_values(model, quantum_kernel(evo.best, grid, data.train.X));
    } else if (cfg.technique == TechniqueKind::PauliZz) {
        const MulticlassModel model = train_multiclass(
            pauli_zz_kernel(data.train.X, cfg.zz_reps), data.train.y, cfg.evolve.svm_c);
        values =
            detail::boundary_values(model, pauli_zz_kernel(grid, data.train.X, cfg.zz_reps));
    } else {
        const double gamma = cfg.rbf_gamma ? *cfg.rbf_gamma : rbf_gamma_scale(data.train.X);
        const MulticlassModel model = train_multiclass(
            rbf_kernel(data.train.X, data.train.X, gamma), data.train.y, cfg.evolve.svm_c);
        values = detail::boundary_values(model, rbf_kernel(grid, data.train.X, gamma));
    }

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "boundary.csv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write boundary.csv in " + out_dir);
        out << "x,y,value\n";
        for (Eigen::Index i = 0; i < grid.rows(); ++i)
            out << detail::format_double(grid(i, 0)) << ',' << detail::format_double(grid(i, 1))
                << ',' << detail::format_double(values[i]) << '\n';
    }
    detail::write_points_csv(fs::path(out_dir) / "points.csv", data.train, data.test);

    return {resolution, static_cast<int>(grid.rows()), technique_kind_name(cfg.technique)};
}

// ---------------------------------------------------------------------------
// Entropy-vs-accuracy trend
// ---------------------------------------------------------------------------

struct TrendPoint {
    double entropy = 0.0;
    double accuracy = 0.0;
    std::string source;
};

struct TrendResult {
    double slope = 0.0;
    double intercept = 0.0;
    int count = 0;
};

/// Ordinary least squares of y on x.
inline std::pair<double, double> ols(const std::vector<double>& x,
                                     const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("ols: need at least 2 paired points");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0)
        throw std::runtime_error("ols: zero variance in the regressor; slope undefined");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

/// Pool the GA rows (rows that carry a gate count) of every results.csv and
/// regress accuracy on entropy.
inline TrendResult entropy_trend(const std::vector<std::string>& result_dirs,
                                 std::vector<TrendPoint>* series_out = nullptr) {
    if (result_dirs.empty()) throw UsageError("entropy-trend: no result directories given");
    std::vector<TrendPoint> series;
    for (const std::string& dir : result_dirs) {
        const std::string path = (std::filesystem::path(dir) / "results.csv").string();
        for (const RunRecord& r : read_results_csv(path))
            if (r.gates) series.push_back({r.entropy, r.accuracy, dir});
    }
    if (series.size() < 2)
        throw std::runtime_error("entropy-trend: need at least 2 GA result rows");
    std::vector<double> ent;
    std::vector<double> acc;
    for (const TrendPoint& p : series) {
        ent.push_back(p.entropy);
        acc.push_back(p.accuracy);
    }
    const auto [slope, intercept] = ols(ent, acc);
    if (series_out != nullptr) *series_out = std::move(series);
    return {slope, intercept, static_cast<int>(ent.size())};
}

inline void write_trend_files(const TrendResult& trend, const std::vector<TrendPoint>& series,
                              const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "series.csv", std::ios::binary);
        out << "entropy,accuracy,source\n";
        for (const TrendPoint& p : series)
            out << detail::format_double(p.entropy) << ',' << detail::format_double(p.accuracy)
                << ',' << p.source << '\n';
    }
    std::ofstream out(fs::path(out_dir) / "trend.json", std::ios::binary);
    out << nlohmann::json{{"slope", trend.slope},
                          {"intercept", trend.intercept},
                          {"count", trend.count}}
               .dump(2)
        << '\n';
}

// ---------------------------------------------------------------------------
// Consolidated result tables
// ---------------------------------------------------------------------------

namespace detail {

struct TechniqueColumn {
    bool present = false;
    std::vector<RunRecord> rows;
    double mean_accuracy = 0.0;
    double mean_entropy = 0.0;
};

inline std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string fixed1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

inline std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace detail

/// Merge per-technique result directories into one fixed-layout table per
/// dataset: column groups Supervised GA / Unsupervised GA / PauliZZ / RBF
/// (Acc, Ent and, for the GA groups, Gates), one row per test plus a mean
/// row. Accuracy and entropy print with 3 decimals, gate counts as integers.
inline std::string make_report(const std::vector<std::string>& result_dirs) {
    if (result_dirs.empty()) throw UsageError("report: no result directories given");

    std::vector<std::string> missing;
    // dataset -> technique index (enum order) -> column
    std::map<std::string, std::array<detail::TechniqueColumn, 4>> datasets;
    for (const std::string& dir : result_dirs) {
        namespace fs = std::filesystem;
        const fs::path summary_path = fs::path(dir) / "summary.json";
        const fs::path results_path = fs::path(dir) / "results.csv";
        if (!fs::exists(summary_path)) missing.push_back(summary_path.string());
        if (!fs::exists(results_path)) missing.push_back(results_path.string());
        if (!missing.empty()) continue;

        std::ifstream in(summary_path);
        nlohmann::json j;
        in >> j;
        const std::string dataset = j.at("dataset").get<std::string>();
        const TechniqueKind tech = parse_technique(j.at("technique").get<std::string>());
        detail::TechniqueColumn& col = datasets[dataset][static_cast<std::size_t>(tech)];
        col.present = true;
        col.rows = read_results_csv(results_path.string());
        col.mean_accuracy = j.at("mean_accuracy").get<double>();
        col.mean_entropy = j.at("mean_entropy").get<double>();
    }
    if (!missing.empty()) {
        std::string msg = "report: missing result files:";
        for (const std::string& path : missing) msg += "\n  " + path;
        throw std::runtime_error(msg);
    }

    static const std::array<const char*, 4> group_names = {"Supervised GA", "Unsupervised GA",
                                                           "PauliZZ", "RBF"};
    static const std::array<bool, 4> has_gates = {true, true, false, false};

    std::ostringstream out;
    for (const auto& [dataset, columns] : datasets) {
        std::size_t max_rows = 0;
        for (const auto& col : columns) max_rows = std::max(max_rows, col.rows.size());

        out << "== " << dataset << " ==\n";
        out << detail::pad_left("Test", 5);
        for (std::size_t g = 0; g < columns.size(); ++g) {
            out << " | " << detail::pad_left("Acc", 7) << detail::pad_left("Ent", 8);
            if (has_gates[g]) out << detail::pad_left("Gates", 7);
        }
        out << '\n';
        out << detail::pad_left("", 5);
        for (std::size_t g = 0; g < columns.size(); ++g) {
            const std::size_t width = 15 + (has_gates[g] ? 7 : 0);
            out << " | " << detail::pad_left(std::string("[") + group_names[g] + "]", width);
        }
        out << '\n';

        for (std::size_t r = 0; r < max_rows; ++r) {
            out << detail::pad_left(std::to_string(r + 1), 5);
            for (std::size_t g = 0; g < columns.size(); ++g) {
                const auto& col = columns[g];
                if (col.present && r < col.rows.size()) {
                    out << " | " << detail::pad_left(detail::fixed3(col.rows[r].accuracy), 7)
                        << detail::pad_left(detail::fixed3(col.rows[r].entropy), 8);
                    if (has_gates[g])
                        out << detail::pad_left(
                            col.rows[r].gates ? std::to_string(*col.rows[r].gates) : "", 7);
                } else {
                    out << " | " << detail::pad_left("", 7) << detail::pad_left("", 8);
                    if (has_gates[g]) out << detail::pad_left("", 7);
                }
            }
            out << '\n';
        }

        out << detail::pad_left("Mean", 5);
        for (std::size_t g = 0; g < columns.size(); ++g) {
            const auto& col = columns[g];
            if (col.present) {
                out << " | " << detail::pad_left(detail::fixed3(col.mean_accuracy), 7)
                    << detail::pad_left(detail::fixed3(col.mean_entropy), 8);
                if (has_gates[g]) {
                    double mean_gates = 0.0;
                    int count = 0;
                    for (const RunRecord& r : col.rows)
                        if (r.gates) {
                            mean_gates += *r.gates;
                            ++count;
                        }
                    out << detail::pad_left(
                        count > 0 ? detail::fixed1(mean_gates / count) : "", 7);
                }
            } else {
                out << " | " << detail::pad_left("", 7) << detail::pad_left("", 8);
                if (has_gates[g]) out << detail::pad_left("", 7);
            }
        }
        out << "\n\n";
    }
    return out.str();
}

}  // namespace qkevo
