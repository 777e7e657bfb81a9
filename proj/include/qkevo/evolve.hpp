#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "qkevo/circuit.hpp"
#include "qkevo/dataset.hpp"
#include "qkevo/kernel.hpp"
#include "qkevo/parallel.hpp"
#include "qkevo/svm.hpp"

namespace qkevo {

enum class Technique { Supervised, Unsupervised };

inline const char* technique_name(Technique t) {
    return t == Technique::Supervised ? "supervised" : "unsupervised";
}

/// (1+k) elitist mutation-only evolution settings. When target_fitness is
/// unset, supervised runs use 0.95 and unsupervised runs stop on
/// stationarity (no validation improvement for stationarity_window
/// generations).
struct EvolveConfig {
    int population_size = 10;
    double mutation_prob = 0.5;
    int max_generations = 40;
    std::optional<double> target_fitness;
    int initial_genes = 0;  // 0 -> 2 * n_qubits
    Technique technique = Technique::Supervised;
    double svm_c = 10.0;
    std::uint64_t seed = 0;
    int stationarity_window = 20;
    int max_genes = 1024;
    int n_qubits = 0;  // 0 -> number of features
};

struct EvolveResult {
    Chromosome best;
    double train_fitness = 0.0;
    double validation_fitness = 0.0;
    double test_accuracy = 0.0;
    double entropy = 0.0;
    int gates = 0;
    int generations_used = 0;
    std::vector<double> fitness_trace;  // incumbent validation fitness per generation
    bool converged = false;
    std::uint64_t seed = 0;
};

/// Per-gene independent resampling with probability m_p; the parent is left
/// untouched and length never changes.
inline Chromosome mutate(const Chromosome& parent, double m_p, int n_features, Rng& rng) {
    if (!(m_p >= 0.0 && m_p <= 1.0))
        throw std::invalid_argument("mutate: mutation probability must be in [0, 1]");
    Chromosome child = parent;
    for (Gene& g : child.genes)
        if (rng.next_bernoulli(m_p)) g = random_gene(parent.n_qubits, n_features, rng);
    return child;
}

/// Training-set accuracy of a QSVM built on the chromosome's fidelity
/// kernel; kernel or solver failures score the individual 0.
inline double fitness_supervised(const Chromosome& c, const Dataset& train, double svm_c) {
    if (train.class_count() < 2)
        throw std::invalid_argument("fitness_supervised: need at least 2 classes");
    try {
        const KernelMatrix K = quantum_kernel(c, train.X);
        const MulticlassModel model = train_multiclass(K, train.y, svm_c);
        return accuracy(predict(model, K), train.y);
    } catch (const std::exception&) {
        return 0.0;
    }
}

/// Largest normalized eigenvalue of the Gram matrix; takes the feature
/// matrix only, so labels cannot enter the score.
inline double fitness_unsupervised(const Chromosome& c, const Eigen::MatrixXd& X) {
    if (X.rows() < 1)
        throw std::invalid_argument("fitness_unsupervised: need at least 1 point");
    return max_normalized_eigenvalue(quantum_kernel(c, X));
}

inline double fitness_unsupervised(const Chromosome& c, const Dataset& train) {
    return fitness_unsupervised(c, train.X);
}

namespace detail {

struct Scored {
    Chromosome chromosome;
    double train_fitness = 0.0;
    double validation_fitness = 0.0;
    std::optional<MulticlassModel> model;  // supervised only
};

inline void score_training(Scored& s, const Dataset& train, const EvolveConfig& cfg) {
    try {
        if (cfg.technique == Technique::Supervised) {
            const KernelMatrix K = quantum_kernel(s.chromosome, train.X);
            MulticlassModel model = train_multiclass(K, train.y, cfg.svm_c);
            s.train_fitness = accuracy(predict(model, K), train.y);
            s.model = std::move(model);
        } else {
            s.train_fitness = max_normalized_eigenvalue(quantum_kernel(s.chromosome, train.X));
        }
    } catch (const std::exception&) {
        s.train_fitness = 0.0;
        s.model.reset();
    }
}

/// Supervised: accuracy on the validation split of the model fitted on the
/// training split. Unsupervised: spectral fitness of the validation Gram.
inline void score_validation(Scored& s, const Dataset& train, const Dataset& validation,
                             const EvolveConfig& cfg) {
    try {
        if (cfg.technique == Technique::Supervised) {
            if (!s.model) {
                s.validation_fitness = 0.0;
                return;
            }
            const KernelMatrix Kval = quantum_kernel(s.chromosome, validation.X, train.X);
            s.validation_fitness = accuracy(predict(*s.model, Kval), validation.y);
        } else {
            s.validation_fitness =
                max_normalized_eigenvalue(quantum_kernel(s.chromosome, validation.X));
        }
    } catch (const std::exception&) {
        s.validation_fitness = 0.0;
    }
}

inline double resolved_target(const EvolveConfig& cfg) {
    if (cfg.target_fitness) return *cfg.target_fitness;
    return cfg.technique == Technique::Supervised ? 0.95
                                                  : std::numeric_limits<double>::infinity();
}

inline void validate_config(const EvolveConfig& cfg) {
    if (cfg.population_size < 1)
        throw std::invalid_argument("evolve: population size must be >= 1");
    if (!(cfg.mutation_prob >= 0.0 && cfg.mutation_prob <= 1.0))
        throw std::invalid_argument("evolve: mutation probability must be in [0, 1]");
    if (cfg.max_generations < 1)
        throw std::invalid_argument("evolve: max generations must be >= 1");
    if (cfg.target_fitness && !(*cfg.target_fitness > 0.0))
        throw std::invalid_argument("evolve: target fitness must be positive");
}

}  // namespace detail

/// One run of the inner loop at a fixed gene count: spawn k mutants of the
/// incumbent, keep the training-best, and replace the incumbent when its
/// validation fitness is at least the incumbent's. Stops at the target
/// fitness, on stationarity (unsupervised without a target), or at the
/// generation cap; `converged` records which.
inline EvolveResult evolve_fixed_length(const EvolveConfig& cfg, int n_genes,
                                        const DataSplits& data) {
    detail::validate_config(cfg);
    if (n_genes < 1) throw std::invalid_argument("evolve: gene count must be >= 1");
    if (data.train.n() < 1 || data.validation.n() < 1 || data.test.n() < 1)
        throw std::invalid_argument("evolve: all three splits must be non-empty");

    const int n_features = static_cast<int>(data.train.m());
    const int n_qubits = cfg.n_qubits > 0 ? cfg.n_qubits : n_features;
    const double target = detail::resolved_target(cfg);
    const bool stationarity_stop = !std::isfinite(target);
    const std::uint64_t run_seed = mix_seed(cfg.seed, 0x67656e6573ULL, n_genes);

    detail::Scored incumbent;
    {
        Rng rng(mix_seed(run_seed, 0));
        incumbent.chromosome = random_chromosome(n_qubits, n_genes, n_features, rng);
    }
    detail::score_training(incumbent, data.train, cfg);
    detail::score_validation(incumbent, data.train, data.validation, cfg);

    EvolveResult result;
    result.seed = cfg.seed;
    result.converged = false;

    double best_seen = incumbent.validation_fitness;
    int last_improvement_generation = 0;

    for (int gen = 1; gen <= cfg.max_generations; ++gen) {
        const auto k = static_cast<std::size_t>(cfg.population_size);
        std::vector<detail::Scored> population(k);
        parallel_for(k, [&](std::size_t i) {
            Rng rng(mix_seed(run_seed, static_cast<std::uint64_t>(gen), i + 1));
            population[i].chromosome =
                mutate(incumbent.chromosome, cfg.mutation_prob, n_features, rng);
            detail::score_training(population[i], data.train, cfg);
        });

        std::size_t best = 0;
        for (std::size_t i = 1; i < k; ++i)
            if (population[i].train_fitness > population[best].train_fitness) best = i;

        detail::score_validation(population[best], data.train, data.validation, cfg);
        if (population[best].validation_fitness >= incumbent.validation_fitness)
            incumbent = std::move(population[best]);

        result.fitness_trace.push_back(incumbent.validation_fitness);
        result.generations_used = gen;
        if (incumbent.validation_fitness > best_seen + 1e-12) {
            best_seen = incumbent.validation_fitness;
            last_improvement_generation = gen;
        }

        if (incumbent.validation_fitness >= target) {
            result.converged = true;
            break;
        }
        if (stationarity_stop) {
            // lambda_1/n of a unit-diagonal PSD Gram cannot exceed 1
            const bool at_ceiling = incumbent.validation_fitness >= 1.0 - 1e-9;
            if (at_ceiling || gen - last_improvement_generation >= cfg.stationarity_window) {
                result.converged = true;
                break;
            }
        }
    }

    result.best = incumbent.chromosome;
    result.train_fitness = incumbent.train_fitness;
    result.validation_fitness = incumbent.validation_fitness;
    result.gates = gate_count(incumbent.chromosome);

    // final test evaluation: one QSVM trained on the training split (also for
    // unsupervised runs, whose fitness never saw labels)
    try {
        if (!incumbent.model) {
            const KernelMatrix K = quantum_kernel(incumbent.chromosome, data.train.X);
            incumbent.model = train_multiclass(K, data.train.y, cfg.svm_c);
        }
        const KernelMatrix Ktest = quantum_kernel(incumbent.chromosome, data.test.X, data.train.X);
        result.test_accuracy = accuracy(predict(*incumbent.model, Ktest), data.test.y);
    } catch (const std::exception&) {
        result.test_accuracy = 0.0;
    }
    try {
        result.entropy = entanglement_entropy(incumbent.chromosome, data.train.X);
    } catch (const std::exception&) {
        result.entropy = 0.0;
    }
    return result;
}

/// Full search: evolve_fixed_length wrapped in a bracketing search over the
/// gene count. Success at length L contracts the upper bound to L, failure
/// raises the lower bound; lengths double while the upper bound is open and
/// bisect afterwards, stopping once the bracket is narrower than the qubit
/// count. Returns the shortest successful run, or the best-effort result
/// flagged unconverged.
inline EvolveResult evolve(const EvolveConfig& cfg, const DataSplits& data) {
    detail::validate_config(cfg);
    const int n_features = static_cast<int>(data.train.m());
    const int n_qubits = cfg.n_qubits > 0 ? cfg.n_qubits : n_features;

    int length = cfg.initial_genes > 0 ? cfg.initial_genes : 2 * n_qubits;
    length = std::min(std::max(length, 1), cfg.max_genes);

    int lower = 0;
    int upper = -1;  // -1 = unbounded
    std::optional<EvolveResult> shortest_success;
    int shortest_length = std::numeric_limits<int>::max();
    std::optional<EvolveResult> best_effort;

    while (true) {
        EvolveResult run = evolve_fixed_length(cfg, length, data);
        if (!best_effort || run.validation_fitness > best_effort->validation_fitness)
            best_effort = run;
        if (run.converged) {
            if (length < shortest_length) {
                shortest_length = length;
                shortest_success = std::move(run);
            }
            upper = length;
        } else {
            lower = length;
        }

        if (upper < 0) {
            if (length >= cfg.max_genes) break;  // doubling budget exhausted
            length = std::min(2 * length, cfg.max_genes);
        } else {
            if (upper - lower < n_qubits) break;
            const int mid = (lower + upper) / 2;
            if (mid <= lower || mid >= upper) break;
            length = mid;
        }
    }

    if (shortest_success) return *shortest_success;
    best_effort->converged = false;
    return *best_effort;
}

struct BenchmarkSummary {
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    double mean_entropy = 0.0;
    double std_entropy = 0.0;
};

struct BenchmarkResult {
    std::vector<EvolveResult> runs;
    BenchmarkSummary summary;
};

inline BenchmarkSummary summarize(const std::vector<double>& acc,
                                  const std::vector<double>& ent) {
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    auto stddev = [&](const std::vector<double>& v, double mu) {
        if (v.size() < 2) return 0.0;
        double s = 0.0;
        for (double x : v) s += (x - mu) * (x - mu);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    BenchmarkSummary out;
    out.mean_accuracy = mean(acc);
    out.std_accuracy = stddev(acc, out.mean_accuracy);
    out.mean_entropy = mean(ent);
    out.std_entropy = stddev(ent, out.mean_entropy);
    return out;
}

/// Repeated independent runs on a seed ladder: run i re-splits the data and
/// evolves with seed + i.
inline BenchmarkResult run_benchmark(const EvolveConfig& cfg,
                                     const std::function<DataSplits(std::uint64_t)>& splits_for,
                                     int repeats) {
    if (repeats < 1) throw std::invalid_argument("run_benchmark: repeats must be >= 1");
    BenchmarkResult out;
    std::vector<double> acc;
    std::vector<double> ent;
    for (int i = 0; i < repeats; ++i) {
        EvolveConfig run_cfg = cfg;
        run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(i);
        const DataSplits data = splits_for(run_cfg.seed);
        EvolveResult res = evolve(run_cfg, data);
        acc.push_back(res.test_accuracy);
        ent.push_back(res.entropy);
        out.runs.push_back(std::move(res));
    }
    out.summary = summarize(acc, ent);
    return out;
}

inline nlohmann::json evolve_config_to_json(const EvolveConfig& cfg) {
    nlohmann::json j{{"population_size", cfg.population_size},
                     {"mutation_prob", cfg.mutation_prob},
                     {"max_generations", cfg.max_generations},
                     {"initial_genes", cfg.initial_genes},
                     {"technique", technique_name(cfg.technique)},
                     {"svm_c", cfg.svm_c},
                     {"seed", cfg.seed},
                     {"stationarity_window", cfg.stationarity_window},
                     {"max_genes", cfg.max_genes},
                     {"n_qubits", cfg.n_qubits}};
    if (cfg.target_fitness)
        j["target_fitness"] = *cfg.target_fitness;
    else
        j["target_fitness"] = nullptr;
    return j;
}

/// Replay record: everything needed to reproduce the run bit for bit.
inline nlohmann::json evolve_result_to_json(const EvolveResult& r, const EvolveConfig& cfg) {
    return nlohmann::json{{"config", evolve_config_to_json(cfg)},
                          {"seed", r.seed},
                          {"chromosome", to_json(r.best)},
                          {"fitness_trace", r.fitness_trace},
                          {"train_fitness", r.train_fitness},
                          {"validation_fitness", r.validation_fitness},
                          {"test_accuracy", r.test_accuracy},
                          {"entropy", r.entropy},
                          {"gates", r.gates},
                          {"generations_used", r.generations_used},
                          {"converged", r.converged}};
}

}  // namespace qkevo
