#pragma once

#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qkevo/dataset.hpp"

namespace qkevo {

/// PCA over z-scored features (correlation-matrix PCA): columns are centered
/// and divided by their standard deviation before the eigendecomposition, so
/// component counts do not depend on raw feature scales.
struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;       // per-feature std used for standardization
    Eigen::MatrixXd components;  // m x r, orthonormal columns
    Eigen::VectorXd explained_variance_ratio;  // r entries, descending
};

/// Keep the smallest component count whose cumulative explained-variance
/// ratio reaches variance_target. Component signs follow a fixed convention:
/// the largest-magnitude entry of each component is positive.
inline PcaModel fit_pca(const Eigen::MatrixXd& X, double variance_target) {
    if (X.rows() < 2) throw std::invalid_argument("fit_pca: need at least 2 rows");
    if (!(variance_target > 0.0 && variance_target <= 1.0))
        throw std::invalid_argument("fit_pca: variance target must be in (0, 1]");
    const Eigen::Index n = X.rows();
    const Eigen::Index m = X.cols();

    PcaModel model;
    model.mean = X.colwise().mean();
    Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();
    model.scale = (centered.array().square().colwise().sum() / static_cast<double>(n))
                      .sqrt()
                      .transpose();
    for (Eigen::Index j = 0; j < m; ++j)
        if (model.scale[j] < 1e-12) model.scale[j] = 1.0;  // constant column contributes zeros
    const Eigen::MatrixXd standardized = centered.array().rowwise() /
                                         model.scale.transpose().array();

    const Eigen::MatrixXd cov =
        standardized.transpose() * standardized / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);

    const double total = std::max(es.eigenvalues().cwiseMax(0.0).sum(), 0.0);
    if (total <= 1e-12) {
        std::cerr << "warning: fit_pca: zero-variance data, keeping 1 component\n";
        model.components = Eigen::MatrixXd::Zero(m, 1);
        model.components(0, 0) = 1.0;
        model.explained_variance_ratio = Eigen::VectorXd::Zero(1);
        return model;
    }

    // eigenvalues come back ascending; walk them in descending order
    Eigen::Index r = 0;
    double cumulative = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        cumulative += std::max(es.eigenvalues()[m - 1 - k], 0.0) / total;
        ++r;
        if (cumulative >= variance_target - 1e-12) break;
    }

    model.components.resize(m, r);
    model.explained_variance_ratio.resize(r);
    for (Eigen::Index k = 0; k < r; ++k) {
        Eigen::VectorXd v = es.eigenvectors().col(m - 1 - k);
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        model.components.col(k) = v;
        model.explained_variance_ratio[k] = std::max(es.eigenvalues()[m - 1 - k], 0.0) / total;
    }
    return model;
}

inline Eigen::MatrixXd transform_pca(const PcaModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.mean.size())
        throw std::invalid_argument("transform_pca: column count mismatch");
    const Eigen::MatrixXd standardized =
        (X.rowwise() - model.mean.transpose()).array().rowwise() /
        model.scale.transpose().array();
    return standardized * model.components;
}

/// Per-feature min/max from the training split; applying maps the training
/// range onto exactly [-pi/2, pi/2] (no clipping of out-of-range rows;
/// constant features map to 0).
struct ScalerModel {
    Eigen::VectorXd min;
    Eigen::VectorXd max;
};

inline ScalerModel fit_scale(const Eigen::MatrixXd& X_train) {
    if (X_train.rows() == 0) throw std::invalid_argument("fit_scale: empty training matrix");
    return {X_train.colwise().minCoeff(), X_train.colwise().maxCoeff()};
}

inline Eigen::MatrixXd apply_scale(const ScalerModel& s, const Eigen::MatrixXd& X) {
    if (X.cols() != s.min.size())
        throw std::invalid_argument("apply_scale: column count mismatch");
    constexpr double pi = std::numbers::pi;
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double range = s.max[j] - s.min[j];
        if (range <= 0.0) {
            out.col(j).setZero();
        } else {
            out.col(j) = ((X.col(j).array() - s.min[j]) / range - 0.5) * pi;
        }
    }
    return out;
}

/// Split, then reduce and scale with parameters fitted on the training split
/// only (PCA optionally fitted on the full matrix for compatibility runs).
struct PreprocessOptions {
    double variance_target = 0.95;
    bool pca_on_full = false;
    bool stratified = true;
};

struct PreprocessedSplits {
    DataSplits splits;
    PcaModel pca;
    ScalerModel scaler;
};

inline PreprocessedSplits preprocess(const Dataset& full, std::uint64_t seed,
                                     const PreprocessOptions& opt = {}) {
    PreprocessedSplits out;
    out.splits = split(full, seed, opt.stratified);
    out.pca = fit_pca(opt.pca_on_full ? full.X : out.splits.train.X, opt.variance_target);

    Eigen::MatrixXd train_reduced = transform_pca(out.pca, out.splits.train.X);
    out.scaler = fit_scale(train_reduced);

    out.splits.train.X = apply_scale(out.scaler, train_reduced);
    out.splits.validation.X =
        apply_scale(out.scaler, transform_pca(out.pca, out.splits.validation.X));
    out.splits.test.X = apply_scale(out.scaler, transform_pca(out.pca, out.splits.test.X));
    return out;
}

}  // namespace qkevo
