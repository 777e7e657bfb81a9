#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qkevo/parallel.hpp"
#include "qkevo/statevector.hpp"

namespace qkevo {

/// Gram matrix of pairwise similarities. Fidelity and RBF self-Grams are
/// symmetric with unit diagonal and PSD up to roundoff.
struct KernelMatrix {
    Eigen::MatrixXd values;
    std::vector<int> row_ids;  // optional datapoint identifiers; empty = 0..n-1
};

/// Spectral and entanglement summary of a trained kernel.
struct KernelDiagnostics {
    double max_normalized_eigenvalue = 0.0;
    double entropy = 0.0;  // mean per-qubit Von Neumann entropy, nats
};

namespace detail {

inline std::vector<Statevector> encode_rows(const Chromosome& c, const Eigen::MatrixXd& X) {
    std::vector<Statevector> states(static_cast<std::size_t>(X.rows()));
    parallel_for(states.size(), [&](std::size_t i) {
        states[i] = encode(c, X.row(static_cast<Eigen::Index>(i)).transpose());
    });
    return states;
}

inline Eigen::MatrixXd fidelity_gram(const std::vector<Statevector>& a,
                                     const std::vector<Statevector>& b) {
    Eigen::MatrixXd K(a.size(), b.size());
    parallel_for(a.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < b.size(); ++j)
            K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::norm(a[i].dot(b[j]));
    });
    return K;
}

inline Eigen::MatrixXd fidelity_gram_self(const std::vector<Statevector>& a) {
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd K(n, n);
    parallel_for(a.size(), [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        K(ii, ii) = std::norm(a[i].dot(a[i]));
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double v = std::norm(a[i].dot(a[j]));
            K(ii, static_cast<Eigen::Index>(j)) = v;
            K(static_cast<Eigen::Index>(j), ii) = v;
        }
    });
    return K;
}

}  // namespace detail

/// Fidelity kernel K(i,j) = |<psi_Ai|psi_Bj>|^2 between encoded rows of A and B.
inline KernelMatrix quantum_kernel(const Chromosome& c, const Eigen::MatrixXd& A,
                                   const Eigen::MatrixXd& B) {
    if (A.cols() != B.cols())
        throw std::invalid_argument("quantum_kernel: feature dimensions differ");
    return {detail::fidelity_gram(detail::encode_rows(c, A), detail::encode_rows(c, B)), {}};
}

/// Self-Gram variant; exactly symmetric by construction.
inline KernelMatrix quantum_kernel(const Chromosome& c, const Eigen::MatrixXd& A) {
    return {detail::fidelity_gram_self(detail::encode_rows(c, A)), {}};
}

/// One encoded state of the ZZ feature map: `reps` layers of
/// [H on all qubits] -> [Rz(2 x_j) on qubit j] -> [for each chain pair (j, j+1):
/// CX(j->j+1), Rz(2 (pi-x_j)(pi-x_{j+1})) on j+1, CX(j->j+1)].
inline Statevector encode_zz(const Eigen::VectorXd& x, int reps) {
    const int n = static_cast<int>(x.size());
    if (n < 1) throw std::invalid_argument("encode_zz: empty feature vector");
    if (reps < 1) throw std::invalid_argument("encode_zz: reps must be >= 1");
    constexpr double pi = std::numbers::pi;
    Statevector psi = Statevector::Zero(Eigen::Index{1} << n);
    psi[0] = Complex{1.0, 0.0};
    for (int r = 0; r < reps; ++r) {
        for (int q = 0; q < n; ++q) apply_hadamard(psi, q);
        for (int q = 0; q < n; ++q) apply_rz(psi, q, 2.0 * x[q]);
        for (int q = 0; q + 1 < n; ++q) {
            apply_cx(psi, q, q + 1);
            apply_rz(psi, q + 1, 2.0 * (pi - x[q]) * (pi - x[q + 1]));
            apply_cx(psi, q, q + 1);
        }
    }
    return psi;
}

/// Fidelity kernel of the ZZ feature map, one qubit per feature.
inline KernelMatrix pauli_zz_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    int reps = 2) {
    if (A.cols() != B.cols())
        throw std::invalid_argument("pauli_zz_kernel: feature dimensions differ");
    if (reps < 1) throw std::invalid_argument("pauli_zz_kernel: reps must be >= 1");
    auto encode_all = [&](const Eigen::MatrixXd& X) {
        std::vector<Statevector> states(static_cast<std::size_t>(X.rows()));
        parallel_for(states.size(), [&](std::size_t i) {
            states[i] = encode_zz(X.row(static_cast<Eigen::Index>(i)).transpose(), reps);
        });
        return states;
    };
    return {detail::fidelity_gram(encode_all(A), encode_all(B)), {}};
}

inline KernelMatrix pauli_zz_kernel(const Eigen::MatrixXd& A, int reps = 2) {
    if (reps < 1) throw std::invalid_argument("pauli_zz_kernel: reps must be >= 1");
    std::vector<Statevector> states(static_cast<std::size_t>(A.rows()));
    parallel_for(states.size(), [&](std::size_t i) {
        states[i] = encode_zz(A.row(static_cast<Eigen::Index>(i)).transpose(), reps);
    });
    return {detail::fidelity_gram_self(states), {}};
}

/// RBF kernel K(i,j) = exp(-gamma ||A_i - B_j||^2).
inline KernelMatrix rbf_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double gamma) {
    if (A.cols() != B.cols())
        throw std::invalid_argument("rbf_kernel: feature dimensions differ");
    if (!(gamma > 0.0)) throw std::invalid_argument("rbf_kernel: gamma must be positive");
    Eigen::MatrixXd K(A.rows(), B.rows());
    parallel_for(static_cast<std::size_t>(A.rows()), [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = 0; j < B.rows(); ++j)
            K(ii, j) = std::exp(-gamma * (A.row(ii) - B.row(j)).squaredNorm());
    });
    return {std::move(K), {}};
}

/// The 1/(m * Var(X)) heuristic for the RBF width.
inline double rbf_gamma_scale(const Eigen::MatrixXd& X) {
    const double var =
        (X.array() - X.mean()).square().sum() / static_cast<double>(X.size());
    const double denom = static_cast<double>(X.cols()) * var;
    return denom > 0.0 ? 1.0 / denom : 1.0;
}

/// Largest eigenvalue of a symmetric kernel divided by its dimension; in
/// [1/n, 1] for unit-diagonal PSD kernels.
inline double max_normalized_eigenvalue(const KernelMatrix& K) {
    const auto n = K.values.rows();
    if (n == 0 || n != K.values.cols())
        throw std::invalid_argument("max_normalized_eigenvalue: matrix must be square");
    const double asym = (K.values - K.values.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8)
        throw std::invalid_argument("max_normalized_eigenvalue: matrix is not symmetric");
    // symmetrize to kill roundoff asymmetry before decomposing
    const Eigen::MatrixXd S = 0.5 * (K.values + K.values.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff() / static_cast<double>(n);
}

/// Von Neumann entropy of the single-qubit reduced state of `psi` at `qubit`,
/// in nats. Eigenvalues are clipped at 0 before the log (0 ln 0 := 0).
inline double single_qubit_entropy(const Statevector& psi, int qubit) {
    const Eigen::Index mask = Eigen::Index{1} << qubit;
    const Eigen::Index step = mask << 1;
    double p0 = 0.0;
    double p1 = 0.0;
    Complex coherence{0.0, 0.0};
    for (Eigen::Index base = 0; base < psi.size(); base += step)
        for (Eigen::Index i = base; i < base + mask; ++i) {
            p0 += std::norm(psi[i]);
            p1 += std::norm(psi[i + mask]);
            coherence += psi[i] * std::conj(psi[i + mask]);
        }
    const double half_diff = 0.5 * (p0 - p1);
    const double radius = std::sqrt(half_diff * half_diff + std::norm(coherence));
    const double trace = p0 + p1;
    auto xlnx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
    return -(xlnx(0.5 * trace + radius) + xlnx(0.5 * trace - radius));
}

/// Mean per-qubit entanglement entropy of one encoded state.
inline double entanglement_entropy(const Statevector& psi, int n_qubits) {
    double total = 0.0;
    for (int q = 0; q < n_qubits; ++q) total += single_qubit_entropy(psi, q);
    return total / static_cast<double>(n_qubits);
}

/// Mean per-qubit entropy of the chromosome's encoded states, averaged over
/// the rows of X.
inline double entanglement_entropy(const Chromosome& c, const Eigen::MatrixXd& X) {
    if (X.rows() == 0) throw std::invalid_argument("entanglement_entropy: empty dataset");
    double total = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        total += entanglement_entropy(encode(c, X.row(i).transpose()), c.n_qubits);
    return total / static_cast<double>(X.rows());
}

/// Same aggregate for the ZZ feature map states.
inline double entanglement_entropy_zz(const Eigen::MatrixXd& X, int reps = 2) {
    if (X.rows() == 0) throw std::invalid_argument("entanglement_entropy_zz: empty dataset");
    const int n_qubits = static_cast<int>(X.cols());
    double total = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        total += entanglement_entropy(encode_zz(X.row(i).transpose(), reps), n_qubits);
    return total / static_cast<double>(X.rows());
}

inline KernelDiagnostics diagnose(const Chromosome& c, const Eigen::MatrixXd& X) {
    return {max_normalized_eigenvalue(quantum_kernel(c, X)), entanglement_entropy(c, X)};
}

/// Row-major CSV dump of the full matrix, 17 significant digits.
inline void write_kernel_csv(const KernelMatrix& K, std::ostream& out) {
    char buf[64];
    for (Eigen::Index i = 0; i < K.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < K.values.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", K.values(i, j));
            if (j > 0) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace qkevo
