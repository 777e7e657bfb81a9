#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qkevo/svm.hpp"
#include "support/oracles.hpp"

using namespace qkevo;

namespace {

KernelMatrix linear_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    return {A * B.transpose(), {}};
}

Eigen::MatrixXd random_points(int n, int m, Rng& rng) {
    Eigen::MatrixXd X(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) X(i, j) = rng.next_normal();
    return X;
}

std::vector<int> random_balanced_labels(int n, Rng& rng) {
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i % 2 == 0 ? 1 : -1;
    for (int i = n - 1; i > 0; --i)
        std::swap(y[static_cast<std::size_t>(i)],
                  y[static_cast<std::size_t>(rng.next_int(i + 1))]);
    return y;
}

/// Worst KKT violation of a trained model given its own bias.
double kkt_residual(const SvmModel& model, const KernelMatrix& K) {
    const Eigen::VectorXd f = decision_function(model, K);
    double worst = 0.0;
    const double eps = 1e-8 * std::max(1.0, model.C);
    for (Eigen::Index i = 0; i < model.alphas.size(); ++i) {
        const double margin = model.labels[i] * f[i];
        const double a = model.alphas[i];
        double violation = 0.0;
        if (a <= eps)
            violation = std::max(0.0, 1.0 - margin);
        else if (a >= model.C - eps)
            violation = std::max(0.0, margin - 1.0);
        else
            violation = std::abs(margin - 1.0);
        worst = std::max(worst, violation);
    }
    return worst;
}

}  // namespace

TEST(TrainBinary, TwoPointClosedForm) {
    KernelMatrix K{Eigen::MatrixXd::Identity(2, 2), {}};
    const SvmModel model = train_binary(K, {1, -1}, 10.0);
    EXPECT_NEAR(model.alphas[0], 1.0, 1e-3);
    EXPECT_NEAR(model.alphas[1], 1.0, 1e-3);
    EXPECT_NEAR(model.bias, 0.0, 1e-3);
    const Eigen::VectorXd f = decision_function(model, K);
    EXPECT_NEAR(f[0], 1.0, 1e-3);
    EXPECT_NEAR(f[1], -1.0, 1e-3);
}

TEST(TrainBinary, SeparableToyMatchesQpOracle) {
    Eigen::MatrixXd X(4, 2);
    X << 1.0, 0.0, 2.0, 0.0, -1.0, 0.0, -2.0, 0.0;
    const std::vector<int> y = {1, 1, -1, -1};
    const double C = 10.0;
    const KernelMatrix K = linear_kernel(X, X);
    const SvmModel model = train_binary(K, y, C);
    const oracles::QpSolution ref = oracles::projected_gradient_qp(K.values, y, C);
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(model.alphas[i], ref.alpha[i], 1e-3);
    EXPECT_NEAR(dual_objective(K.values, model.labels, model.alphas), ref.objective, 1e-4);
}

TEST(TrainBinary, DuplicateRowsStayBalancedAndMatchOracle) {
    Eigen::MatrixXd X(6, 2);
    X << 1.0, 0.5, 1.0, 0.5, -0.5, -1.0, -0.5, -1.0, 0.3, 0.9, -0.9, 0.1;
    const std::vector<int> y = {1, 1, -1, -1, 1, -1};
    const KernelMatrix K = rbf_kernel(X, X, 0.8);
    const SvmModel model = train_binary(K, y, 2.0);
    EXPECT_NEAR(model.alphas.dot(model.labels), 0.0, 1e-6);
    const oracles::QpSolution ref = oracles::projected_gradient_qp(K.values, y, 2.0);
    EXPECT_NEAR(dual_objective(K.values, model.labels, model.alphas), ref.objective, 1e-4);
}

TEST(TrainBinary, RandomInstancesMatchQpOracle) {
    Rng rng(91);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 4 + rng.next_int(9);  // up to 12 points
        const Eigen::MatrixXd X = random_points(n, 2, rng);
        std::vector<int> y = random_balanced_labels(n, rng);
        const double C = trial % 3 == 0 ? 0.5 : (trial % 3 == 1 ? 1.0 : 10.0);
        const KernelMatrix K = rbf_kernel(X, X, 0.5 + rng.next_double());

        const SvmModel model = train_binary(K, y, C);
        const oracles::QpSolution ref = oracles::projected_gradient_qp(K.values, y, C);
        EXPECT_NEAR(dual_objective(K.values, model.labels, model.alphas), ref.objective, 1e-4)
            << "trial " << trial;
        EXPECT_LE(kkt_residual(model, K), 1e-3 + 1e-9) << "trial " << trial;
        // dual feasibility
        EXPECT_GE(model.alphas.minCoeff(), -1e-12);
        EXPECT_LE(model.alphas.maxCoeff(), C + 1e-12);
        EXPECT_NEAR(model.alphas.dot(model.labels), 0.0, 1e-6);
    }
}

TEST(TrainBinary, RejectsBadInput) {
    KernelMatrix K{Eigen::MatrixXd::Identity(2, 2), {}};
    EXPECT_THROW(train_binary(K, {1, 1}, 1.0), std::invalid_argument);   // single class
    EXPECT_THROW(train_binary(K, {1, 2}, 1.0), std::invalid_argument);   // not +-1
    EXPECT_THROW(train_binary(K, {1, -1}, 0.0), std::invalid_argument);  // C <= 0
    EXPECT_THROW(train_binary(K, {1, -1, 1}, 1.0), std::invalid_argument);
}

TEST(DecisionFunction, MarginSupportVectorScoresItsLabel) {
    Rng rng(12);
    const Eigen::MatrixXd X = random_points(10, 2, rng);
    const std::vector<int> y = random_balanced_labels(10, rng);
    const KernelMatrix K = rbf_kernel(X, X, 1.0);
    const SvmModel model = train_binary(K, y, 5.0);
    const Eigen::VectorXd f = decision_function(model, K);
    const double eps = 1e-8 * std::max(1.0, model.C);
    int margin_svs = 0;
    for (Eigen::Index i = 0; i < 10; ++i) {
        if (model.alphas[i] > eps && model.alphas[i] < model.C - eps) {
            ++margin_svs;
            EXPECT_NEAR(f[i], model.labels[i], 1e-3);
        }
    }
    EXPECT_GT(margin_svs, 0);
}

TEST(DecisionFunction, ZeroAlphasGiveConstantBias) {
    SvmModel model;
    model.alphas = Eigen::VectorXd::Zero(3);
    model.labels = Eigen::VectorXd::Ones(3);
    model.bias = -0.75;
    model.C = 1.0;
    KernelMatrix K{Eigen::MatrixXd::Random(5, 3), {}};
    const Eigen::VectorXd f = decision_function(model, K);
    for (Eigen::Index i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(f[i], -0.75);
}

TEST(DecisionFunction, TwoPointQueryReproducesLabel) {
    KernelMatrix K{Eigen::MatrixXd::Identity(2, 2), {}};
    const SvmModel model = train_binary(K, {1, -1}, 10.0);
    KernelMatrix Kq{Eigen::MatrixXd(1, 2), {}};
    Kq.values << 1.0, 0.0;  // query equals point 1
    EXPECT_NEAR(decision_function(model, Kq)[0], 1.0, 1e-3);
}

TEST(DecisionFunction, ColumnMismatchThrows) {
    SvmModel model;
    model.alphas = Eigen::VectorXd::Zero(3);
    model.labels = Eigen::VectorXd::Ones(3);
    KernelMatrix K{Eigen::MatrixXd::Zero(2, 4), {}};
    EXPECT_THROW(decision_function(model, K), std::invalid_argument);
}

TEST(TrainMulticlass, TwoClassesAgreeWithBinaryModel) {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 6 + rng.next_int(7);
        const Eigen::MatrixXd X = random_points(n, 2, rng);
        const std::vector<int> ypm = random_balanced_labels(n, rng);
        std::vector<int> y01(ypm.size());
        for (std::size_t i = 0; i < ypm.size(); ++i) y01[i] = ypm[i] == 1 ? 1 : 0;

        const KernelMatrix K = rbf_kernel(X, X, 1.0);
        const MulticlassModel mc = train_multiclass(K, y01, 1.0);
        const SvmModel binary = train_binary(K, ypm, 1.0);

        const Eigen::MatrixXd Q = random_points(8, 2, rng);
        const KernelMatrix Kq = rbf_kernel(Q, X, 1.0);
        const std::vector<int> fused = predict(mc, Kq);
        const Eigen::VectorXd f = decision_function(binary, Kq);
        for (Eigen::Index i = 0; i < 8; ++i) {
            const int sign_label = f[i] > 0.0 ? 1 : 0;
            EXPECT_EQ(fused[static_cast<std::size_t>(i)], sign_label) << "trial " << trial;
        }
    }
}

TEST(TrainMulticlass, ThreeGaussianBlobsWithRbfKernel) {
    Rng rng(222);
    const int per_class = 30;
    Eigen::MatrixXd X(3 * per_class, 2);
    std::vector<int> y;
    const double cx[3] = {0.0, 4.0, -4.0};
    const double cy[3] = {0.0, 4.0, 4.0};
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < per_class; ++i) {
            X(c * per_class + i, 0) = cx[c] + rng.next_normal();
            X(c * per_class + i, 1) = cy[c] + rng.next_normal();
            y.push_back(c);
        }
    // hold out every third point
    std::vector<int> train_idx, test_idx;
    for (int i = 0; i < 3 * per_class; ++i) (i % 3 == 0 ? test_idx : train_idx).push_back(i);
    Eigen::MatrixXd Xtr(train_idx.size(), 2), Xte(test_idx.size(), 2);
    std::vector<int> ytr, yte;
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
        Xtr.row(static_cast<Eigen::Index>(i)) = X.row(train_idx[i]);
        ytr.push_back(y[static_cast<std::size_t>(train_idx[i])]);
    }
    for (std::size_t i = 0; i < test_idx.size(); ++i) {
        Xte.row(static_cast<Eigen::Index>(i)) = X.row(test_idx[i]);
        yte.push_back(y[static_cast<std::size_t>(test_idx[i])]);
    }
    const MulticlassModel model = train_multiclass(rbf_kernel(Xtr, Xtr, 0.5), ytr, 1.0);
    const double acc = accuracy(predict(model, rbf_kernel(Xte, Xtr, 0.5)), yte);
    EXPECT_GE(acc, 0.9);
}

TEST(Predict, FusionRuleTakesMaxEvenWhenAllNegative) {
    MulticlassModel model;
    for (int c = 0; c < 3; ++c) {
        SvmModel m;
        m.alphas = Eigen::VectorXd::Zero(2);
        m.labels = Eigen::VectorXd::Ones(2);
        m.bias = -1.0 - c;  // -1, -2, -3: all negative, class 0 largest
        model.per_class.emplace_back(c, m);
    }
    KernelMatrix K{Eigen::MatrixXd::Zero(4, 2), {}};
    for (int label : predict(model, K)) EXPECT_EQ(label, 0);
}

TEST(Predict, ExactTieGoesToSmallestClassLabel) {
    MulticlassModel model;
    for (int c : {2, 5}) {
        SvmModel m;
        m.alphas = Eigen::VectorXd::Zero(2);
        m.labels = Eigen::VectorXd::Ones(2);
        m.bias = 0.0;
        model.per_class.emplace_back(c, m);
    }
    KernelMatrix K{Eigen::MatrixXd::Zero(1, 2), {}};
    EXPECT_EQ(predict(model, K)[0], 2);
}

TEST(Predict, MatchesExhaustiveArgmaxScan) {
    Rng rng(808);
    const int n = 15;
    const Eigen::MatrixXd X = random_points(n, 2, rng);
    std::vector<int> y;
    for (int i = 0; i < n; ++i) y.push_back(i % 3);
    const KernelMatrix K = rbf_kernel(X, X, 1.0);
    const MulticlassModel model = train_multiclass(K, y, 1.0);
    const Eigen::MatrixXd Q = random_points(10, 2, rng);
    const KernelMatrix Kq = rbf_kernel(Q, X, 1.0);
    const std::vector<int> fused = predict(model, Kq);
    for (Eigen::Index q = 0; q < 10; ++q) {
        int best_label = -1;
        double best = -1e300;
        for (const auto& [label, m] : model.per_class) {
            const double v = decision_function(m, Kq)[q];
            if (v > best) {
                best = v;
                best_label = label;
            }
        }
        EXPECT_EQ(fused[static_cast<std::size_t>(q)], best_label);
    }
}

TEST(TrainBinary, LabelPermutationLeavesDecisionsUnchanged) {
    Rng rng(515);
    const int n = 14;
    const Eigen::MatrixXd X = random_points(n, 3, rng);
    const std::vector<int> y = random_balanced_labels(n, rng);
    const KernelMatrix K = rbf_kernel(X, X, 0.9);
    const Eigen::MatrixXd Q = random_points(6, 3, rng);
    const KernelMatrix Kq = rbf_kernel(Q, X, 0.9);
    // solve close to the unique optimum so row order only perturbs decisions
    // at roundoff level
    const SvmTrainOptions tight{1e-10, 2000000};
    const Eigen::VectorXd f = decision_function(train_binary(K, y, 3.0, tight), Kq);

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[static_cast<std::size_t>(i)],
                  perm[static_cast<std::size_t>(rng.next_int(i + 1))]);

    Eigen::MatrixXd Kp(n, n);
    Eigen::MatrixXd Kqp(Q.rows(), n);
    std::vector<int> yp(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int pi = perm[static_cast<std::size_t>(i)];
        yp[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(pi)];
        Kqp.col(i) = Kq.values.col(pi);
        for (int j = 0; j < n; ++j) Kp(i, j) = K.values(pi, perm[static_cast<std::size_t>(j)]);
    }
    const Eigen::VectorXd fp =
        decision_function(train_binary({Kp, {}}, yp, 3.0, tight), {Kqp, {}});
    EXPECT_LT((f - fp).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Accuracy, BasicValues) {
    EXPECT_DOUBLE_EQ(accuracy({1, 2, 3}, {1, 2, 3}), 1.0);
    EXPECT_DOUBLE_EQ(accuracy({1, 0, 1}, {0, 1, 0}), 0.0);
    // one wrong out of 80 (rounds to 0.988 at 3 decimals)
    std::vector<int> truth(80, 1), pred(80, 1);
    pred[7] = 0;
    EXPECT_DOUBLE_EQ(accuracy(pred, truth), 79.0 / 80.0);
    EXPECT_THROW(accuracy({1}, {1, 2}), std::invalid_argument);
}

TEST(SvmJson, RoundTripReproducesDecisionsExactly) {
    Rng rng(3001);
    const int n = 12;
    const Eigen::MatrixXd X = random_points(n, 2, rng);
    std::vector<int> y;
    for (int i = 0; i < n; ++i) y.push_back(i % 3);
    const KernelMatrix K = rbf_kernel(X, X, 1.2);
    const MulticlassModel model = train_multiclass(K, y, 2.0);

    const std::string text = multiclass_to_json(model).dump();
    const MulticlassModel back = multiclass_from_json(nlohmann::json::parse(text));

    const Eigen::MatrixXd Q = random_points(7, 2, rng);
    const KernelMatrix Kq = rbf_kernel(Q, X, 1.2);
    for (std::size_t c = 0; c < model.per_class.size(); ++c) {
        const Eigen::VectorXd f0 = decision_function(model.per_class[c].second, Kq);
        const Eigen::VectorXd f1 = decision_function(back.per_class[c].second, Kq);
        EXPECT_LT((f0 - f1).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_EQ(model.per_class[c].first, back.per_class[c].first);
    }
}

TEST(PsdRepair, ClipsIndefiniteKernelAndProceeds) {
    Eigen::MatrixXd M(3, 3);
    M << 1.0, 0.9, 0.1, 0.9, 1.0, 0.9, 0.1, 0.9, 1.0;  // indefinite (min eig < 0)
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    ASSERT_LT(es.eigenvalues().minCoeff(), -1e-6);
    const SvmModel model = train_binary({M, {}}, {1, -1, 1}, 1.0);
    EXPECT_NEAR(model.alphas.dot(model.labels), 0.0, 1e-6);
}
