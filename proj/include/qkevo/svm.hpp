#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "qkevo/kernel.hpp"
#include "qkevo/parallel.hpp"

namespace qkevo {

/// Soft-margin kernel SVM in dual form. alphas are the box-constrained
/// multipliers (0 <= alpha_i <= C), labels the +-1 targets they were trained
/// against; the decision function is f(x) = sum_i alpha_i y_i K(x_i, x) + bias.
struct SvmModel {
    Eigen::VectorXd alphas;
    Eigen::VectorXd labels;
    double bias = 0.0;
    double C = 1.0;
    std::vector<int> support_indices;  // indices with alpha above threshold
};

/// One-vs-rest ensemble: one binary model per class label, fused by argmax.
struct MulticlassModel {
    std::vector<std::pair<int, SvmModel>> per_class;  // (class label, model)
};

struct SvmTrainOptions {
    double kkt_tolerance = 1e-3;
    int max_iterations = 100000;
};

/// Value of the dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
inline double dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& alpha) {
    const Eigen::VectorXd ay = alpha.cwiseProduct(y);
    return alpha.sum() - 0.5 * ay.dot(K * ay);
}

namespace detail {

/// Returns K unchanged when it admits a (shifted) Cholesky factorization;
/// otherwise clips negative eigenvalues at 0 and warns.
inline Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& K) {
    const double shift = 1e-8 * std::max(1.0, K.diagonal().cwiseAbs().maxCoeff());
    Eigen::LLT<Eigen::MatrixXd> llt(K + shift * Eigen::MatrixXd::Identity(K.rows(), K.cols()));
    if (llt.info() == Eigen::Success) return K;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (K + K.transpose()));
    if (es.eigenvalues().minCoeff() >= -1e-8) return K;
    std::cerr << "warning: kernel matrix not PSD (min eigenvalue "
              << es.eigenvalues().minCoeff() << "), clipping at 0\n";
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

/// Train a binary SVM on a precomputed training Gram matrix by pairwise
/// coordinate ascent on the dual (maximal-violating-pair working set,
/// analytic two-variable sub-solve). Stops when the KKT violation drops
/// below kkt_tolerance or the iteration cap is hit.
inline SvmModel train_binary(const KernelMatrix& Km, const std::vector<int>& y_in, double C,
                             const SvmTrainOptions& opt = {}) {
    const Eigen::Index n = Km.values.rows();
    if (n == 0 || n != Km.values.cols())
        throw std::invalid_argument("train_binary: kernel matrix must be square");
    if (static_cast<Eigen::Index>(y_in.size()) != n)
        throw std::invalid_argument("train_binary: label count does not match kernel size");
    if (!(C > 0.0)) throw std::invalid_argument("train_binary: C must be positive");

    Eigen::VectorXd y(n);
    bool has_pos = false;
    bool has_neg = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y_in[i] != 1 && y_in[i] != -1)
            throw std::invalid_argument("train_binary: labels must be +-1");
        y[i] = y_in[i];
        (y_in[i] == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg)
        throw std::invalid_argument("train_binary: both classes must be present");

    const Eigen::MatrixXd K = detail::psd_repair(Km.values);
    const Eigen::MatrixXd Q = (y * y.transpose()).cwiseProduct(K);

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // Q alpha - 1

    double m_up = 0.0;
    double m_low = 0.0;
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        // maximal violating pair over v_t = -y_t * grad_t
        int i = -1;
        int j = -1;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            const bool in_up = (y[t] > 0.0 && alpha[t] < C) || (y[t] < 0.0 && alpha[t] > 0.0);
            const bool in_low = (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < C);
            if (in_up && v > m_up) {
                m_up = v;
                i = static_cast<int>(t);
            }
            if (in_low && v < m_low) {
                m_low = v;
                j = static_cast<int>(t);
            }
        }
        if (i < 0 || j < 0 || m_up - m_low < opt.kkt_tolerance) break;

        const double old_i = alpha[i];
        const double old_j = alpha[j];
        double quad = K(i, i) + K(j, j) - 2.0 * K(i, j);
        if (quad <= 0.0) quad = 1e-12;
        if (y[i] != y[j]) {
            const double diff = old_i - old_j;  // conserved
            double ai = old_i + (-grad[i] - grad[j]) / quad;
            ai = std::clamp(ai, std::max(0.0, diff), std::min(C, C + diff));
            alpha[i] = ai;
            alpha[j] = ai - diff;
        } else {
            const double sum = old_i + old_j;  // conserved
            double ai = old_i - (grad[i] - grad[j]) / quad;
            ai = std::clamp(ai, std::max(0.0, sum - C), std::min(C, sum));
            alpha[i] = ai;
            alpha[j] = sum - ai;
        }
        grad += Q.col(i) * (alpha[i] - old_i) + Q.col(j) * (alpha[j] - old_j);
    }

    SvmModel model;
    model.alphas = alpha;
    model.labels = y;
    model.C = C;

    // b from margin support vectors (0 < alpha < C); midpoint of the KKT
    // interval when none are free
    const double sv_eps = 1e-8 * std::max(1.0, C);
    double b_sum = 0.0;
    int b_count = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (alpha[t] > sv_eps) model.support_indices.push_back(static_cast<int>(t));
        if (alpha[t] > sv_eps && alpha[t] < C - sv_eps) {
            b_sum += -y[t] * grad[t];
            ++b_count;
        }
    }
    model.bias = b_count > 0 ? b_sum / b_count : 0.5 * (m_up + m_low);
    return model;
}

/// Decision values f(x) = sum_i alpha_i y_i K(x_i, x) + b for each query row
/// of Ktest (rows: queries, columns: training points).
inline Eigen::VectorXd decision_function(const SvmModel& model, const KernelMatrix& Ktest) {
    if (Ktest.values.cols() != model.alphas.size())
        throw std::invalid_argument("decision_function: column count does not match training size");
    return (Ktest.values * model.alphas.cwiseProduct(model.labels)).array() + model.bias;
}

/// One-vs-rest training: for each distinct class c (ascending), fit a binary
/// model with +1 on c and -1 elsewhere. Per-class fits run concurrently.
inline MulticlassModel train_multiclass(const KernelMatrix& K, const std::vector<int>& y,
                                        double C, const SvmTrainOptions& opt = {}) {
    std::map<int, int> counts;
    for (int label : y) ++counts[label];
    if (counts.size() < 2)
        throw std::invalid_argument("train_multiclass: need at least 2 distinct classes");

    std::vector<int> classes;
    classes.reserve(counts.size());
    for (const auto& [label, count] : counts) classes.push_back(label);

    MulticlassModel model;
    model.per_class.resize(classes.size());
    parallel_for(classes.size(), [&](std::size_t idx) {
        std::vector<int> ova(y.size());
        for (std::size_t t = 0; t < y.size(); ++t) ova[t] = y[t] == classes[idx] ? 1 : -1;
        model.per_class[idx] = {classes[idx], train_binary(K, ova, C, opt)};
    });
    return model;
}

/// Fusion rule: assign the class with the largest decision value, even when
/// all values are negative; ties go to the smallest class label.
inline std::vector<int> predict(const MulticlassModel& model, const KernelMatrix& Ktest) {
    if (model.per_class.empty()) throw std::invalid_argument("predict: empty model");
    const Eigen::Index n = Ktest.values.rows();
    std::vector<int> out(static_cast<std::size_t>(n));
    std::vector<Eigen::VectorXd> scores;
    scores.reserve(model.per_class.size());
    for (const auto& [label, binary] : model.per_class)
        scores.push_back(decision_function(binary, Ktest));
    for (Eigen::Index q = 0; q < n; ++q) {
        int best_label = model.per_class.front().first;
        double best_value = scores.front()[q];
        for (std::size_t c = 1; c < scores.size(); ++c) {
            if (scores[c][q] > best_value) {  // strict: first (smallest) label wins ties
                best_value = scores[c][q];
                best_label = model.per_class[c].first;
            }
        }
        out[static_cast<std::size_t>(q)] = best_label;
    }
    return out;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("accuracy: length mismatch");
    if (predicted.empty()) throw std::invalid_argument("accuracy: empty label vectors");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (predicted[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

// JSON model exchange. "alphas" holds the signed dual coefficients
// alpha_i * y_i, which is all the decision function needs.
inline nlohmann::json svm_model_to_json(const SvmModel& m, int class_label = 1) {
    std::vector<double> coef(static_cast<std::size_t>(m.alphas.size()));
    for (Eigen::Index i = 0; i < m.alphas.size(); ++i)
        coef[static_cast<std::size_t>(i)] = m.alphas[i] * m.labels[i];
    return nlohmann::json{{"class", class_label},
                          {"alphas", coef},
                          {"bias", m.bias},
                          {"support_indices", m.support_indices},
                          {"C", m.C}};
}

inline SvmModel svm_model_from_json(const nlohmann::json& j) {
    const auto coef = j.at("alphas").get<std::vector<double>>();
    SvmModel m;
    m.alphas.resize(static_cast<Eigen::Index>(coef.size()));
    m.labels.resize(static_cast<Eigen::Index>(coef.size()));
    for (std::size_t i = 0; i < coef.size(); ++i) {
        m.alphas[static_cast<Eigen::Index>(i)] = std::abs(coef[i]);
        m.labels[static_cast<Eigen::Index>(i)] = coef[i] < 0.0 ? -1.0 : 1.0;
    }
    m.bias = j.at("bias").get<double>();
    m.C = j.at("C").get<double>();
    m.support_indices = j.at("support_indices").get<std::vector<int>>();
    return m;
}

inline nlohmann::json multiclass_to_json(const MulticlassModel& m) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& [label, binary] : m.per_class)
        models.push_back(svm_model_to_json(binary, label));
    return nlohmann::json{{"models", std::move(models)}};
}

inline MulticlassModel multiclass_from_json(const nlohmann::json& j) {
    MulticlassModel m;
    for (const auto& jm : j.at("models"))
        m.per_class.emplace_back(jm.at("class").get<int>(), svm_model_from_json(jm));
    return m;
}

}  // namespace qkevo
