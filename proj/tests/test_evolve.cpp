#include <gtest/gtest.h>

#include <cmath>

#include "qkevo/evolve.hpp"
#include "qkevo/preprocess.hpp"
#include "support/oracles.hpp"

using namespace qkevo;

namespace {

/// Two well-separated blobs: easy to classify with almost any data kernel.
Dataset easy_blobs(int n, std::uint64_t seed) {
    Dataset d;
    d.name = "blobs";
    d.X.resize(n, 2);
    d.y.resize(static_cast<std::size_t>(n));
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        const int label = i % 2;
        d.X(i, 0) = (label == 0 ? -1.0 : 1.0) + 0.15 * rng.next_normal();
        d.X(i, 1) = (label == 0 ? -1.0 : 1.0) + 0.15 * rng.next_normal();
        d.y[static_cast<std::size_t>(i)] = label;
    }
    return d;
}

DataSplits easy_splits(std::uint64_t seed = 5, int n = 80) {
    const Dataset d = easy_blobs(n, seed);
    const PreprocessedSplits p = preprocess(d, seed);
    return p.splits;
}

EvolveConfig small_config() {
    EvolveConfig cfg;
    cfg.population_size = 6;
    cfg.max_generations = 12;
    cfg.seed = 11;
    cfg.svm_c = 10.0;
    return cfg;
}

}  // namespace

TEST(Mutate, ZeroProbabilityIsIdentity) {
    Rng rng(1);
    const Chromosome parent = random_chromosome(3, 8, 2, rng);
    Rng mrng(2);
    const Chromosome child = mutate(parent, 0.0, 2, mrng);
    EXPECT_TRUE(child == parent);
}

TEST(Mutate, FullProbabilityResamplesEveryPosition) {
    Rng rng(3);
    const Chromosome parent = random_chromosome(3, 10, 4, rng);
    // the child must equal a fresh draw of every gene from the same stream
    Rng a(99);
    Rng b(99);
    const Chromosome child = mutate(parent, 1.0, 4, a);
    Chromosome expected = parent;
    for (Gene& g : expected.genes) {
        ASSERT_TRUE(b.next_bernoulli(1.0));
        g = random_gene(parent.n_qubits, 4, b);
    }
    EXPECT_TRUE(child == expected);
    EXPECT_EQ(child.genes.size(), parent.genes.size());
}

TEST(Mutate, ParentLeftUntouched) {
    Rng rng(4);
    const Chromosome parent = random_chromosome(2, 6, 2, rng);
    const Chromosome copy = parent;
    Rng mrng(5);
    (void)mutate(parent, 0.7, 2, mrng);
    EXPECT_TRUE(parent == copy);
}

TEST(Mutate, ReplacedCountMatchesBinomialMean) {
    // all-Rz parent over a huge feature alphabet so a re-drawn gene almost
    // never reproduces the original by chance
    const int n_features = 100000;
    Chromosome parent;
    parent.n_qubits = 4;
    for (int g = 0; g < 20; ++g)
        parent.genes.push_back({GateKind::Rz, g % 4, -1, 1000 + g, 1.0});
    Rng mrng(7);
    const int trials = 10000;
    long replaced = 0;
    for (int t = 0; t < trials; ++t) {
        const Chromosome child = mutate(parent, 0.5, n_features, mrng);
        for (std::size_t g = 0; g < child.genes.size(); ++g)
            if (!(child.genes[g] == parent.genes[g])) ++replaced;
    }
    const double mean = static_cast<double>(replaced) / trials;
    const double sigma_mean = std::sqrt(20.0 * 0.25 / trials);
    EXPECT_NEAR(mean, 10.0, 3.0 * sigma_mean + 0.02);
}

TEST(FitnessSupervised, ConstantKernelScoresMajorityRate) {
    const DataSplits s = easy_splits();
    Chromosome c;
    c.n_qubits = 2;
    c.genes = {{GateKind::SqrtX, 0}, {GateKind::PauliX, 1}};  // no data dependence
    const double f = fitness_supervised(c, s.train, 1.0);
    const double majority =
        std::max(std::count(s.train.y.begin(), s.train.y.end(), 0),
                 std::count(s.train.y.begin(), s.train.y.end(), 1)) /
        static_cast<double>(s.train.n());
    EXPECT_NEAR(f, majority, 1e-12);
}

TEST(FitnessSupervised, PerfectSeparationOnTwoPoints) {
    Dataset train;
    train.X.resize(2, 1);
    train.X << -1.0, 1.0;
    train.y = {0, 1};
    Chromosome c;
    c.n_qubits = 1;
    c.genes = {{GateKind::SqrtX, 0}, {GateKind::Rz, 0, -1, 0, 1.0}};
    EXPECT_DOUBLE_EQ(fitness_supervised(c, train, 10.0), 1.0);
}

TEST(FitnessSupervised, SingleClassThrows) {
    Dataset train;
    train.X = Eigen::MatrixXd::Random(4, 1);
    train.y = {1, 1, 1, 1};
    Chromosome c;
    c.n_qubits = 1;
    c.genes = {{GateKind::PauliX, 0}};
    EXPECT_THROW(fitness_supervised(c, train, 1.0), std::invalid_argument);
}

TEST(FitnessUnsupervised, ConstantKernelScoresOne) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(6, 2);
    Chromosome c;
    c.n_qubits = 2;
    c.genes = {{GateKind::SqrtX, 0}, {GateKind::Cx, 1, 0}};
    EXPECT_NEAR(fitness_unsupervised(c, X), 1.0, 1e-10);
}

TEST(FitnessUnsupervised, OrthogonalEncodingsScoreOneOverN) {
    // equatorial states with phase difference pi are orthogonal
    Eigen::MatrixXd X(2, 1);
    X << 0.0, std::numbers::pi;
    Chromosome c;
    c.n_qubits = 1;
    c.genes = {{GateKind::SqrtX, 0}, {GateKind::Rz, 0, -1, 0, 1.0}};
    EXPECT_NEAR(fitness_unsupervised(c, X), 0.5, 1e-10);
}

TEST(FitnessUnsupervised, MatchesPowerIterationOracle) {
    Rng rng(13);
    const Chromosome c = random_chromosome(2, 5, 2, rng);
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(7, 2);
    const KernelMatrix K = quantum_kernel(c, X);
    EXPECT_NEAR(fitness_unsupervised(c, X),
                oracles::power_iteration_lambda_max(K.values) / 7.0, 1e-8);
}

TEST(EvolveFixedLength, ZeroTargetReturnsAfterFirstGeneration) {
    EvolveConfig cfg = small_config();
    cfg.target_fitness = 1e-12;  // satisfied immediately, checked after gen 1
    const EvolveResult r = evolve_fixed_length(cfg, 4, easy_splits());
    EXPECT_EQ(r.generations_used, 1);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.fitness_trace.size(), 1u);
}

TEST(EvolveFixedLength, NoVariationGivesConstantTrace) {
    EvolveConfig cfg = small_config();
    cfg.population_size = 1;
    cfg.mutation_prob = 0.0;
    cfg.max_generations = 8;
    cfg.target_fitness = 1.0;  // unlikely to hit: trace should span generations
    const EvolveResult r = evolve_fixed_length(cfg, 4, easy_splits());
    for (double v : r.fitness_trace) EXPECT_DOUBLE_EQ(v, r.fitness_trace.front());
}

TEST(EvolveFixedLength, DeterministicReplay) {
    const DataSplits s = easy_splits();
    EvolveConfig cfg = small_config();
    const EvolveResult a = evolve_fixed_length(cfg, 5, s);
    const EvolveResult b = evolve_fixed_length(cfg, 5, s);
    EXPECT_TRUE(a.best == b.best);
    EXPECT_EQ(a.fitness_trace, b.fitness_trace);
    EXPECT_EQ(a.test_accuracy, b.test_accuracy);
    EXPECT_EQ(a.generations_used, b.generations_used);
}

TEST(EvolveFixedLength, ElitismKeepsValidationFitnessNonDecreasing) {
    EvolveConfig cfg = small_config();
    cfg.max_generations = 15;
    cfg.target_fitness = 1.0;
    const EvolveResult r = evolve_fixed_length(cfg, 6, easy_splits());
    for (std::size_t i = 1; i < r.fitness_trace.size(); ++i)
        EXPECT_GE(r.fitness_trace[i], r.fitness_trace[i - 1]);
}

TEST(Evolve, SuccessAtInitialLengthContractsTheBracket) {
    EvolveConfig cfg = small_config();
    cfg.initial_genes = 8;
    const EvolveResult r = evolve(cfg, easy_splits());
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.gates, 8);
    EXPECT_EQ(r.gates, gate_count(r.best));
}

TEST(Evolve, ShrinksFromFourteenGenesOnEasyData) {
    EvolveConfig cfg = small_config();
    cfg.initial_genes = 14;
    cfg.max_generations = 15;
    const EvolveResult r = evolve(cfg, easy_splits());
    EXPECT_TRUE(r.converged);
    EXPECT_LT(r.gates, 14);
}

TEST(Evolve, UnreachableTargetReportsUnconverged) {
    EvolveConfig cfg = small_config();
    cfg.target_fitness = 1.01;  // impossible: accuracy is at most 1
    cfg.max_generations = 2;
    cfg.population_size = 2;
    cfg.max_genes = 16;
    const EvolveResult r = evolve(cfg, easy_splits(5, 40));
    EXPECT_FALSE(r.converged);
    EXPECT_GT(r.gates, 0);
}

TEST(Evolve, DeterministicAcrossInvocations) {
    const DataSplits s = easy_splits();
    EvolveConfig cfg = small_config();
    const EvolveResult a = evolve(cfg, s);
    const EvolveResult b = evolve(cfg, s);
    EXPECT_TRUE(a.best == b.best);
    EXPECT_EQ(a.fitness_trace, b.fitness_trace);
    EXPECT_EQ(a.gates, b.gates);
}

TEST(Evolve, UnsupervisedRunNeverSeesLabelsAndConverges) {
    DataSplits s = easy_splits();
    // poison the labels of the copies used for fitness: unsupervised fitness
    // must not depend on them (final test evaluation still needs real ones)
    EvolveConfig cfg = small_config();
    cfg.technique = Technique::Unsupervised;
    cfg.max_generations = 25;
    const EvolveResult a = evolve_fixed_length(cfg, 4, s);

    DataSplits shuffled = s;
    for (auto& label : shuffled.train.y) label = 1 - label;
    for (auto& label : shuffled.validation.y) label = 1 - label;
    const EvolveResult b = evolve_fixed_length(cfg, 4, shuffled);
    EXPECT_TRUE(a.best == b.best);
    EXPECT_EQ(a.fitness_trace, b.fitness_trace);
}

TEST(Evolve, ConvergedRunReEvaluatesConsistently) {
    // the stored chromosome's training fitness stays near its reported
    // test accuracy when recomputed from scratch
    const Dataset moons = make_moons(160, 0.1, 41);
    const DataSplits s = preprocess(moons, 41).splits;
    EvolveConfig cfg = small_config();
    cfg.max_generations = 20;
    const EvolveResult r = evolve(cfg, s);
    const double train_fit = fitness_supervised(r.best, s.train, cfg.svm_c);
    EXPECT_DOUBLE_EQ(train_fit, r.train_fitness);
    EXPECT_GE(train_fit, r.test_accuracy - 0.15);
}

TEST(RunBenchmark, SingleRepeatEqualsSingleRun) {
    const Dataset d = easy_blobs(60, 21);
    EvolveConfig cfg = small_config();
    auto splits_for = [&](std::uint64_t seed) { return preprocess(d, seed).splits; };
    const BenchmarkResult bench = run_benchmark(cfg, splits_for, 1);
    ASSERT_EQ(bench.runs.size(), 1u);
    EXPECT_DOUBLE_EQ(bench.summary.mean_accuracy, bench.runs[0].test_accuracy);
    EXPECT_DOUBLE_EQ(bench.summary.std_accuracy, 0.0);
    EXPECT_DOUBLE_EQ(bench.summary.mean_entropy, bench.runs[0].entropy);
}

TEST(RunBenchmark, SeedLadderAndReplayDeterminism) {
    const Dataset d = easy_blobs(60, 22);
    EvolveConfig cfg = small_config();
    cfg.seed = 100;
    auto splits_for = [&](std::uint64_t seed) { return preprocess(d, seed).splits; };
    const BenchmarkResult a = run_benchmark(cfg, splits_for, 3);
    const BenchmarkResult b = run_benchmark(cfg, splits_for, 3);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(a.runs[static_cast<std::size_t>(i)].seed, 100u + static_cast<unsigned>(i));
        EXPECT_TRUE(a.runs[static_cast<std::size_t>(i)].best ==
                    b.runs[static_cast<std::size_t>(i)].best);
    }
    EXPECT_DOUBLE_EQ(a.summary.mean_accuracy, b.summary.mean_accuracy);
    EXPECT_DOUBLE_EQ(a.summary.std_accuracy, b.summary.std_accuracy);
}

TEST(EvolveResultJson, CarriesChromosomeTraceSeedAndConfig) {
    EvolveConfig cfg = small_config();
    const EvolveResult r = evolve_fixed_length(cfg, 4, easy_splits());
    const nlohmann::json j = evolve_result_to_json(r, cfg);
    EXPECT_EQ(j.at("seed").get<std::uint64_t>(), r.seed);
    EXPECT_EQ(j.at("gates").get<int>(), r.gates);
    EXPECT_EQ(j.at("config").at("population_size").get<int>(), cfg.population_size);
    const Chromosome back = chromosome_from_json(j.at("chromosome"));
    EXPECT_TRUE(back == r.best);
    EXPECT_EQ(j.at("fitness_trace").get<std::vector<double>>(), r.fitness_trace);
}

TEST(EvolveConfig, RejectsBadSettings) {
    const DataSplits s = easy_splits();
    EvolveConfig cfg = small_config();
    cfg.population_size = 0;
    EXPECT_THROW(evolve_fixed_length(cfg, 4, s), std::invalid_argument);
    cfg = small_config();
    cfg.mutation_prob = 1.5;
    EXPECT_THROW(evolve_fixed_length(cfg, 4, s), std::invalid_argument);
    cfg = small_config();
    cfg.target_fitness = -0.5;
    EXPECT_THROW(evolve_fixed_length(cfg, 4, s), std::invalid_argument);
    cfg = small_config();
    EXPECT_THROW(evolve_fixed_length(cfg, 0, s), std::invalid_argument);
}
